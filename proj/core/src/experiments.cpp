#include "spl/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <thread>

#include "spl/errors.hpp"
#include "spl/kvdoc.hpp"

namespace spl {

namespace {

double rms(std::span<const double> v) {
    double acc = 0.0;
    for (double x : v) acc += x * x;
    return v.empty() ? 0.0 : std::sqrt(acc / static_cast<double>(v.size()));
}

double mse(std::span<const double> a, std::span<const double> b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        acc += d * d;
    }
    return a.empty() ? 0.0 : acc / static_cast<double>(a.size());
}

}  // namespace

void parallel_for(int count, int jobs, const std::function<void(int)>& fn) {
    if (count <= 0) return;
    jobs = std::max(1, std::min(jobs, count));
    if (jobs == 1) {
        for (int i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> workers;
    workers.reserve(static_cast<std::size_t>(jobs));
    for (int w = 0; w < jobs; ++w) {
        workers.emplace_back([&] {
            for (;;) {
                const int i = next.fetch_add(1);
                if (i >= count) return;
                fn(i);
            }
        });
    }
    for (auto& t : workers) t.join();
}

// ---------------------------------------------------------------------------
// recovery experiments
// ---------------------------------------------------------------------------

RecoveryReport run_recovery(const RecoverySpec& spec) {
    const BenchmarkTask* task = find_task(spec.task_id);
    if (!task) throw ConfigError("unknown benchmark task: " + spec.task_id);
    if (spec.trials < 1) throw ContractError("run_recovery: trials must be >= 1");

    const ExpressionTree target = task->target_tree();
    const SuccessRule rule = spec.rule_override.value_or(
        task->has_const ? SuccessRule::TestRmse : SuccessRule::SymbolicEquivalence);

    RecoveryReport report;
    report.task_id = spec.task_id;
    report.trials.resize(static_cast<std::size_t>(spec.trials));

    parallel_for(spec.trials, spec.jobs, [&](int i) {
        const auto t0 = std::chrono::steady_clock::now();
        const std::uint64_t trial_seed = split_seed(spec.seed, static_cast<std::uint64_t>(i));

        SamplingSpec sampling = task->sampling();
        if (spec.points_override > 0) sampling.points = spec.points_override;
        Rng data_rng(split_seed(trial_seed, 1));
        FunctionDatasetPair data =
            make_function_dataset(target, sampling, spec.noise_level, data_rng);

        SearchConfig cfg = task->search_config(spec.desk_scale);
        if (spec.episodes_override > 0) cfg.episodes = spec.episodes_override;
        cfg.seed = split_seed(trial_seed, 2);
        if (spec.disable_adaptive_scaling) cfg.adaptive_scaling = false;
        if (spec.disable_parsimony) cfg.eta = 1.0;
        if (spec.disable_transplant) cfg.transplant.interval_episodes = 0;
        if (spec.early_stop_on_exact_fit)
            cfg.stop_at_rmse = 1e-9 * std::max(rms(data.train.target), 1e-30);

        Grammar grammar = task->make_grammar();
        DiscoveryResult result = run_discovery(grammar, data.train, cfg);

        TrialOutcome out;
        out.trial = i;
        out.seed = trial_seed;
        out.best_reward = result.best_reward;
        out.train_rmse = result.best_rmse;
        out.n_rules = result.best_n_rules;
        out.episode_found = result.episode_found;
        out.expression = result.expression;

        if (!result.tree.empty()) {
            ExpressionTree fitted = result.constants.empty()
                                        ? result.tree
                                        : substitute_constants(result.tree, result.constants);
            Dataset test = align_dataset(grammar, data.test);
            out.test_rmse = rmse_of(fitted, test.Y, test.target);
            if (rule == SuccessRule::SymbolicEquivalence) {
                DomainSpec domain;
                for (const auto& v : sampling.vars) domain.ranges.push_back({v.lo, v.hi});
                try {
                    out.success = equivalent(fitted, target, domain);
                } catch (const DataError&) {
                    out.success = false;
                }
            } else {
                out.success = out.test_rmse < 1e-6 * rms(test.target);
            }
        }
        out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        report.trials[static_cast<std::size_t>(i)] = std::move(out);
    });

    report.recovery_rate =
        static_cast<double>(report.successes()) / static_cast<double>(spec.trials);
    return report;
}

std::vector<GridCell> run_grid(const GridSpec& spec) {
    std::vector<GridCell> cells;
    std::uint64_t stream = 0;
    for (double noise : spec.noise_levels) {
        for (int points : spec.point_counts) {
            RecoverySpec rs;
            rs.task_id = "toy";
            rs.trials = spec.trials;
            rs.desk_scale = spec.desk_scale;
            rs.seed = split_seed(spec.seed, stream++);
            rs.jobs = spec.jobs;
            rs.noise_level = noise;
            rs.points_override = points;
            RecoveryReport r = run_recovery(rs);
            cells.push_back({noise, points, r.recovery_rate});
        }
    }
    return cells;
}

// ---------------------------------------------------------------------------
// polynomial projection / support extraction
// ---------------------------------------------------------------------------

namespace {

void enumerate_monomials(int vars, int max_degree, std::vector<std::vector<int>>& out) {
    std::vector<int> exps(static_cast<std::size_t>(vars), 0);
    // lexicographic enumeration of exponent tuples with total degree cap
    std::function<void(int, int)> rec = [&](int var, int remaining) {
        if (var == vars) {
            out.push_back(exps);
            return;
        }
        for (int e = 0; e <= remaining; ++e) {
            exps[static_cast<std::size_t>(var)] = e;
            rec(var + 1, remaining - e);
        }
        exps[static_cast<std::size_t>(var)] = 0;
    };
    rec(0, max_degree);
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        int da = 0, db = 0;
        for (int x : a) da += x;
        for (int x : b) db += x;
        if (da != db) return da < db;
        return a > b;  // within a degree, earlier variables first
    });
}

std::string monomial_label(const std::vector<int>& exps, const std::vector<std::string>& vars) {
    std::string s;
    for (std::size_t v = 0; v < exps.size(); ++v) {
        if (exps[v] == 0) continue;
        if (!s.empty()) s += "*";
        s += vars[v];
        if (exps[v] > 1) s += "^" + std::to_string(exps[v]);
    }
    return s.empty() ? "1" : s;
}

}  // namespace

PolyProjection project_polynomial(const ExpressionTree& tree, std::span<const double> constants,
                                  const std::vector<std::string>& vars,
                                  const std::vector<std::pair<double, double>>& box,
                                  int max_degree, int samples) {
    const int nv = static_cast<int>(vars.size());
    std::vector<std::vector<int>> monomials;
    enumerate_monomials(nv, max_degree, monomials);

    // quasi-random sample cloud over the box
    static const double alphas[] = {0.41421356237309515, 0.7320508075688772, 0.23606797749978969,
                                    0.6457513110645907, 0.3166247903553998, 0.60555127546398929};
    std::vector<std::vector<double>> points(static_cast<std::size_t>(samples),
                                            std::vector<double>(static_cast<std::size_t>(nv)));
    for (int k = 0; k < samples; ++k) {
        for (int d = 0; d < nv; ++d) {
            double frac = 0.5 + (k + 1) * alphas[d % 6];
            frac -= std::floor(frac);
            points[static_cast<std::size_t>(k)][static_cast<std::size_t>(d)] =
                box[static_cast<std::size_t>(d)].first +
                (box[static_cast<std::size_t>(d)].second - box[static_cast<std::size_t>(d)].first) *
                    frac;
        }
    }

    std::vector<double> values;
    values.reserve(static_cast<std::size_t>(samples));
    std::vector<std::vector<double>> columns(monomials.size());
    for (auto& c : columns) c.reserve(static_cast<std::size_t>(samples));
    for (int k = 0; k < samples; ++k) {
        const auto& p = points[static_cast<std::size_t>(k)];
        const double v = evaluate_point(tree, p, constants);
        if (!std::isfinite(v)) continue;
        values.push_back(v);
        for (std::size_t m = 0; m < monomials.size(); ++m) {
            double term = 1.0;
            for (int d = 0; d < nv; ++d)
                for (int e = 0; e < monomials[m][static_cast<std::size_t>(d)]; ++e)
                    term *= p[static_cast<std::size_t>(d)];
            columns[m].push_back(term);
        }
    }
    if (values.size() < monomials.size() * 2)
        throw DataError("project_polynomial: too few valid sample points");

    PolyProjection proj;
    proj.coefficients = solve_least_squares(columns, values);
    for (const auto& m : monomials) proj.labels.push_back(monomial_label(m, vars));
    proj.value_rms = rms(values);

    std::vector<double> residual(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        double fit = 0.0;
        for (std::size_t m = 0; m < columns.size(); ++m)
            fit += proj.coefficients[m] * columns[m][i];
        residual[i] = values[i] - fit;
    }
    proj.residual_rms = rms(residual);
    return proj;
}

std::set<std::string> extract_support(const PolyProjection& proj, double threshold) {
    std::set<std::string> support;
    double max_abs = 0.0;
    for (double c : proj.coefficients) max_abs = std::max(max_abs, std::abs(c));
    if (max_abs == 0.0) return support;
    for (std::size_t i = 0; i < proj.coefficients.size(); ++i)
        if (std::abs(proj.coefficients[i]) > threshold * max_abs)
            support.insert(proj.labels[i]);
    return support;
}

// ---------------------------------------------------------------------------
// Lorenz
// ---------------------------------------------------------------------------

LorenzReport run_lorenz(const LorenzSpec& spec) {
    LorenzReport report;
    report.trials.resize(static_cast<std::size_t>(spec.trials));

    struct DimTruth {
        const char* name;
        std::vector<std::string> support;
        std::vector<double> coeffs;
    };
    const std::vector<DimTruth> truth = {
        {"dx", {"x", "y"}, {-spec.data.sigma, spec.data.sigma}},
        {"dy", {"x", "y", "x*z"}, {spec.data.rho, -1.0, -1.0}},
        {"dz", {"z", "x*y"}, {-spec.data.beta, 1.0}},
    };

    parallel_for(spec.trials, spec.jobs, [&](int i) {
        const std::uint64_t trial_seed = split_seed(spec.seed, static_cast<std::uint64_t>(i));
        LorenzConfig data_cfg = spec.data;
        data_cfg.seed = split_seed(trial_seed, 1);
        std::vector<Dataset> dims = make_lorenz_dataset(data_cfg);

        std::vector<std::pair<double, double>> box;
        for (const auto& row : dims[0].Y.rows) {
            const auto [lo, hi] = std::minmax_element(row.begin(), row.end());
            box.emplace_back(*lo, *hi);
        }

        LorenzTrialResult trial;
        trial.seed = trial_seed;
        trial.all_support_exact = true;
        for (int d = 0; d < 3; ++d) {
            Grammar grammar = make_arith_grammar({"x", "y", "z"}, true);
            SearchConfig cfg;
            cfg.eta = spec.eta;
            cfg.t_max = spec.t_max;
            cfg.episodes = spec.episodes;
            cfg.max_constants = spec.max_constants;
            cfg.sims_per_expansion = spec.sims_per_expansion;
            cfg.fit_max_points = 256;
            cfg.transplant.interval_episodes = spec.transplant_interval;
            cfg.seed = split_seed(trial_seed, 10 + static_cast<std::uint64_t>(d));
            DiscoveryResult result =
                run_discovery(grammar, dims[static_cast<std::size_t>(d)], cfg);

            LorenzDimensionResult dim;
            dim.name = truth[static_cast<std::size_t>(d)].name;
            dim.expression = result.expression;
            dim.train_rmse = result.best_rmse;
            dim.true_support.insert(truth[static_cast<std::size_t>(d)].support.begin(),
                                    truth[static_cast<std::size_t>(d)].support.end());
            dim.true_coefficients = truth[static_cast<std::size_t>(d)].coeffs;

            if (!result.tree.empty()) {
                PolyProjection proj =
                    project_polynomial(result.tree, result.constants, {"x", "y", "z"}, box, 3);
                if (proj.residual_rms < 1e-3 * std::max(proj.value_rms, 1e-12)) {
                    dim.support = extract_support(proj);
                    for (const auto& label : truth[static_cast<std::size_t>(d)].support) {
                        auto it = std::find(proj.labels.begin(), proj.labels.end(), label);
                        dim.coefficients.push_back(
                            it == proj.labels.end()
                                ? 0.0
                                : proj.coefficients[static_cast<std::size_t>(
                                      it - proj.labels.begin())]);
                    }
                    for (std::size_t c = 0; c < dim.true_coefficients.size(); ++c) {
                        const double rel =
                            std::abs(dim.coefficients[c] - dim.true_coefficients[c]) /
                            std::abs(dim.true_coefficients[c]);
                        dim.max_coeff_rel_error = std::max(dim.max_coeff_rel_error, rel);
                    }
                }
            }
            dim.support_exact = dim.support == dim.true_support;
            int fp = 0;
            for (const auto& s : dim.support)
                if (!dim.true_support.count(s)) ++fp;
            dim.false_positives = fp;
            trial.all_support_exact = trial.all_support_exact && dim.support_exact;
            trial.dims.push_back(std::move(dim));
        }
        report.trials[static_cast<std::size_t>(i)] = std::move(trial);
    });

    for (const auto& t : report.trials)
        if (t.all_support_exact) ++report.trials_support_exact;
    return report;
}

// ---------------------------------------------------------------------------
// free-fall baselines and ball-drop experiment
// ---------------------------------------------------------------------------

BaselineFit fit_baseline_model(int model_id, const Dataset& train) {
    const char* templates[] = {
        "C + C*t + C*t^2 + C*t^3",
        "C + C*t + C*exp(C*t)",
        "C + C*log(cosh(C*t))",
    };
    if (model_id < 1 || model_id > 3)
        throw ConfigError("fit_baseline_model: model_id must be 1, 2 or 3");
    ExpressionTree tree = parse_expression(templates[model_id - 1], {"t"});

    FitOptions opts;
    opts.seed = 0x6a11 + static_cast<std::uint64_t>(model_id);
    FitResult fit = fit_constants(tree, train.Y, train.target, opts);

    BaselineFit out;
    out.model_id = model_id;
    out.constants = fit.constants;
    out.train_rmse = fit.rmse;
    out.expression = render(tree, RenderStyle::Canonical, fit.constants);
    return out;
}

Dataset make_drag_fall_dataset(double h0, double g, double k, double duration, double rate,
                               double noise_level, std::uint64_t seed) {
    auto rhs = [&](double, std::span<const double> y, std::span<double> dydt) {
        dydt[0] = y[1];
        dydt[1] = -g + k * y[1] * y[1];
    };
    const double sample_dt = 1.0 / rate;
    const int substeps = 20;
    const double dt = sample_dt / substeps;
    const std::vector<double> y0 = {h0, 0.0};
    Trajectory traj = integrate_ode(rhs, y0, 0.0, duration, dt);

    Dataset ds;
    ds.var_names = {"t"};
    ds.Y.rows.resize(1);
    for (std::size_t i = 0; i < traj.times.size(); i += substeps) {
        ds.Y.rows[0].push_back(traj.times[i]);
        ds.target.push_back(traj.states[0][i]);
    }
    if (noise_level > 0.0) {
        Rng rng(seed);
        ds.target = add_noise(ds.target, noise_level, rng);
        ds.meta.noise_level = noise_level;
    }
    ds.meta.dt = sample_dt;
    ds.meta.source = "synthetic:drag_fall";
    return ds;
}

std::pair<Dataset, Dataset> split_by_time(const Dataset& full, double split_time) {
    auto t_it = std::find(full.var_names.begin(), full.var_names.end(), "t");
    if (t_it == full.var_names.end()) throw DataError("split_by_time: dataset has no 't' column");
    const auto t_row = static_cast<std::size_t>(t_it - full.var_names.begin());

    Dataset train, test;
    train.var_names = test.var_names = full.var_names;
    train.meta = test.meta = full.meta;
    train.Y.rows.resize(full.Y.rows.size());
    test.Y.rows.resize(full.Y.rows.size());
    for (std::size_t i = 0; i < full.target.size(); ++i) {
        Dataset& dst = full.Y.rows[t_row][i] <= split_time ? train : test;
        for (std::size_t v = 0; v < full.Y.rows.size(); ++v)
            dst.Y.rows[v].push_back(full.Y.rows[v][i]);
        dst.target.push_back(full.target[i]);
    }
    if (train.target.empty() || test.target.empty())
        throw DataError("split_by_time: one side of the split is empty");
    return {train, test};
}

BalldropReport run_balldrop(const BalldropSpec& spec) {
    BalldropReport report;
    std::vector<std::pair<std::string, Dataset>> balls;

    namespace fs = std::filesystem;
    if (!spec.data_dir.empty() && fs::is_directory(spec.data_dir)) {
        std::vector<fs::path> files;
        for (const auto& entry : fs::directory_iterator(spec.data_dir))
            if (entry.path().extension() == ".csv") files.push_back(entry.path());
        std::sort(files.begin(), files.end());
        for (const auto& f : files) {
            CsvSchema schema;
            schema.target_column = "H";
            schema.variable_columns = {"t"};
            try {
                balls.emplace_back(f.stem().string(), load_csv(f.string(), schema));
            } catch (const DataError& e) {
                report.skipped.push_back(f.stem().string() + ": " + e.what());
            }
        }
    }
    if (balls.empty() && spec.synthetic_fallback) {
        balls.emplace_back("synthetic_low_drag",
                           make_drag_fall_dataset(48.0, 9.81, 0.002, 3.0, 30.0, 1e-4, 11));
        balls.emplace_back("synthetic_mid_drag",
                           make_drag_fall_dataset(48.0, 9.81, 0.02, 3.0, 30.0, 1e-4, 12));
        balls.emplace_back("synthetic_high_drag",
                           make_drag_fall_dataset(48.0, 9.81, 0.08, 3.0, 30.0, 1e-4, 13));
    }
    if (balls.empty()) {
        report.skipped.push_back("no ball CSV files found in '" + spec.data_dir + "'");
        return report;
    }

    for (std::size_t b = 0; b < balls.size(); ++b) {
        const auto& [name, full] = balls[b];
        auto [train, test] = split_by_time(full, spec.split_time);

        Grammar grammar = make_balldrop_grammar();
        SearchConfig cfg;
        cfg.eta = spec.eta;
        cfg.t_max = spec.t_max;
        cfg.episodes = spec.episodes;
        cfg.max_constants = spec.max_constants;
        cfg.transplant.interval_episodes = 1000;
        cfg.seed = split_seed(spec.seed, b);
        DiscoveryResult result = run_discovery(grammar, train, cfg);

        BalldropRow row;
        row.ball = name;
        row.spl_expression = result.expression;

        Dataset test_aligned = align_dataset(grammar, test);
        if (!result.tree.empty()) {
            ExpressionTree fitted = result.constants.empty()
                                        ? result.tree
                                        : substitute_constants(result.tree, result.constants);
            EvalResult pred = evaluate(fitted, test_aligned.Y);
            row.mse_spl = pred.valid ? mse(pred.values, test_aligned.target)
                                     : std::numeric_limits<double>::infinity();
        }
        for (int model = 1; model <= 3; ++model) {
            BaselineFit fit = fit_baseline_model(model, train);
            ExpressionTree tree = parse_expression(
                model == 1 ? "C + C*t + C*t^2 + C*t^3"
                           : (model == 2 ? "C + C*t + C*exp(C*t)" : "C + C*log(cosh(C*t))"),
                {"t"});
            ExpressionTree fitted = substitute_constants(tree, fit.constants);
            EvalResult pred = evaluate(fitted, test_aligned.Y);
            const double m = pred.valid ? mse(pred.values, test_aligned.target)
                                        : std::numeric_limits<double>::infinity();
            if (model == 1)
                row.mse_model1 = m;
            else if (model == 2)
                row.mse_model2 = m;
            else
                row.mse_model3 = m;
        }
        report.rows.push_back(std::move(row));
    }
    return report;
}

// ---------------------------------------------------------------------------
// report files
// ---------------------------------------------------------------------------

void write_recovery_csv(const RecoveryReport& report, const std::string& path) {
    std::vector<std::vector<std::string>> rows;
    for (const auto& t : report.trials) {
        rows.push_back({std::to_string(t.trial), std::to_string(t.seed),
                        t.success ? "1" : "0", format_double(t.best_reward),
                        format_double(t.train_rmse), format_double(t.test_rmse),
                        std::to_string(t.n_rules), std::to_string(t.episode_found),
                        t.expression});
    }
    write_csv(path,
              {"trial", "seed", "success", "best_reward", "train_rmse", "test_rmse", "n_rules",
               "episode_found", "expression"},
              rows);
}

void write_grid_csv(const std::vector<GridCell>& cells, const std::string& path) {
    std::vector<std::vector<std::string>> rows;
    for (const auto& c : cells)
        rows.push_back(
            {format_double(c.noise), std::to_string(c.points), format_double(c.recovery_rate)});
    write_csv(path, {"noise", "points", "recovery_rate"}, rows);
}

void write_lorenz_csv(const LorenzReport& report, const std::string& path) {
    std::vector<std::vector<std::string>> rows;
    for (std::size_t i = 0; i < report.trials.size(); ++i) {
        for (const auto& d : report.trials[i].dims) {
            std::string support;
            for (const auto& s : d.support) {
                if (!support.empty()) support += ' ';
                support += s;
            }
            rows.push_back({std::to_string(i), d.name, d.support_exact ? "yes" : "no",
                            std::to_string(d.false_positives),
                            format_double(d.max_coeff_rel_error), support, d.expression});
        }
    }
    write_csv(path,
              {"trial", "dimension", "support_exact", "false_positives", "max_coeff_rel_error",
               "support", "expression"},
              rows);
}

void write_balldrop_csv(const BalldropReport& report, const std::string& path) {
    std::vector<std::vector<std::string>> rows;
    for (const auto& r : report.rows)
        rows.push_back({r.ball, format_double(r.mse_spl), format_double(r.mse_model1),
                        format_double(r.mse_model2), format_double(r.mse_model3),
                        r.spl_expression});
    write_csv(path, {"ball", "mse_spl", "mse_model1", "mse_model2", "mse_model3", "spl_expression"},
              rows);
}

}  // namespace spl
