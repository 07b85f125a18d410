#include "spl/numdata.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "spl/errors.hpp"
#include "spl/kvdoc.hpp"

namespace spl {

namespace {

double rms(std::span<const double> v) {
    double acc = 0.0;
    for (double x : v) acc += x * x;
    return std::sqrt(acc / static_cast<double>(v.size()));
}

/// Solve the square system A x = b in place (partial pivoting). A is n x n,
/// row major. Small n only (SG filter design, polynomial projections).
void solve_inplace(std::vector<double>& A, std::vector<double>& b, int n) {
    for (int col = 0; col < n; ++col) {
        int pivot = col;
        for (int r = col + 1; r < n; ++r)
            if (std::abs(A[r * n + col]) > std::abs(A[pivot * n + col])) pivot = r;
        if (A[pivot * n + col] == 0.0) throw DataError("singular linear system");
        if (pivot != col) {
            for (int c = 0; c < n; ++c) std::swap(A[pivot * n + c], A[col * n + c]);
            std::swap(b[pivot], b[col]);
        }
        const double inv = 1.0 / A[col * n + col];
        for (int r = col + 1; r < n; ++r) {
            const double factor = A[r * n + col] * inv;
            if (factor == 0.0) continue;
            for (int c = col; c < n; ++c) A[r * n + c] -= factor * A[col * n + c];
            b[r] -= factor * b[col];
        }
    }
    for (int col = n - 1; col >= 0; --col) {
        double acc = b[col];
        for (int c = col + 1; c < n; ++c) acc -= A[col * n + c] * b[c];
        b[col] = acc / A[col * n + col];
    }
}

}  // namespace

std::vector<double> add_noise(std::span<const double> values, double level, Rng& rng) {
    if (level < 0.0) throw ContractError("add_noise: negative level");
    std::vector<double> out(values.begin(), values.end());
    if (level == 0.0) return out;
    const double scale = rms(values);
    if (scale == 0.0) throw DataError("add_noise: all-zero signal, noise scale undefined");
    const double sigma = level * scale;
    for (auto& v : out) v += rng.normal(0.0, sigma);
    return out;
}

std::vector<double> central_difference(std::span<const double> series, double dt) {
    const std::size_t n = series.size();
    if (n < 3) throw ContractError("central_difference: need at least 3 samples");
    if (dt <= 0.0) throw ContractError("central_difference: dt must be positive");
    std::vector<double> out(n);
    const double inv2dt = 1.0 / (2.0 * dt);
    out[0] = (-3.0 * series[0] + 4.0 * series[1] - series[2]) * inv2dt;
    for (std::size_t k = 1; k + 1 < n; ++k) out[k] = (series[k + 1] - series[k - 1]) * inv2dt;
    out[n - 1] = (3.0 * series[n - 1] - 4.0 * series[n - 2] + series[n - 3]) * inv2dt;
    return out;
}

std::vector<double> savitzky_golay_weights(int window, int polyorder, int offset) {
    if (window % 2 == 0 || window <= polyorder)
        throw ContractError("savitzky_golay: window must be odd and > polyorder");
    const int h = window / 2;
    const int terms = polyorder + 1;
    // normal equations for the LSQ fit over offsets -h..h, then evaluate the
    // fitted polynomial at `offset`: w = p(offset)^T (X^T X)^-1 X^T
    std::vector<double> xtx(static_cast<std::size_t>(terms * terms), 0.0);
    for (int i = -h; i <= h; ++i) {
        double pi = 1.0;
        std::vector<double> powers(terms);
        for (int a = 0; a < terms; ++a) {
            powers[a] = pi;
            pi *= i;
        }
        for (int a = 0; a < terms; ++a)
            for (int b = 0; b < terms; ++b) xtx[a * terms + b] += powers[a] * powers[b];
    }
    std::vector<double> weights(static_cast<std::size_t>(window), 0.0);
    for (int j = -h; j <= h; ++j) {
        // column j of X^T is the power vector of offset j
        std::vector<double> rhs(terms);
        double pj = 1.0;
        for (int a = 0; a < terms; ++a) {
            rhs[a] = pj;
            pj *= j;
        }
        std::vector<double> lhs = xtx;
        solve_inplace(lhs, rhs, terms);
        // rhs now holds (X^T X)^-1 e_j-powers; dot with offset powers
        double w = 0.0, po = 1.0;
        for (int a = 0; a < terms; ++a) {
            w += rhs[a] * po;
            po *= offset;
        }
        weights[static_cast<std::size_t>(j + h)] = w;
    }
    return weights;
}

std::vector<double> savitzky_golay(std::span<const double> series, int window, int polyorder) {
    const std::size_t n = series.size();
    if (window % 2 == 0 || window <= polyorder)
        throw ContractError("savitzky_golay: window must be odd and > polyorder");
    if (n < static_cast<std::size_t>(window))
        throw ContractError("savitzky_golay: series shorter than window");
    const int h = window / 2;
    const auto center = savitzky_golay_weights(window, polyorder, 0);

    std::vector<double> out(n);
    for (std::size_t k = static_cast<std::size_t>(h); k + static_cast<std::size_t>(h) < n; ++k) {
        double acc = 0.0;
        for (int j = -h; j <= h; ++j)
            acc += center[static_cast<std::size_t>(j + h)] * series[k + static_cast<std::size_t>(j)];
        out[k] = acc;
    }
    // edges: evaluate the first/last window's fitted polynomial at the edge offsets
    for (int e = 0; e < h; ++e) {
        const auto w_head = savitzky_golay_weights(window, polyorder, e - h);
        const auto w_tail = savitzky_golay_weights(window, polyorder, h - e);
        double head = 0.0, tail = 0.0;
        for (int j = 0; j < window; ++j) {
            head += w_head[static_cast<std::size_t>(j)] * series[static_cast<std::size_t>(j)];
            tail += w_tail[static_cast<std::size_t>(j)] *
                    series[n - static_cast<std::size_t>(window) + static_cast<std::size_t>(j)];
        }
        out[static_cast<std::size_t>(e)] = head;
        out[n - 1 - static_cast<std::size_t>(e)] = tail;
    }
    return out;
}

Trajectory integrate_ode(const OdeRhs& rhs, std::span<const double> y0, double t0, double t1,
                         double dt) {
    if (dt <= 0.0) throw ContractError("integrate_ode: dt must be positive");
    const std::size_t dim = y0.size();
    const auto steps = static_cast<std::size_t>(std::llround((t1 - t0) / dt));

    Trajectory traj;
    traj.times.reserve(steps + 1);
    traj.states.assign(dim, {});
    for (auto& row : traj.states) row.reserve(steps + 1);

    std::vector<double> y(y0.begin(), y0.end());
    std::vector<double> k1(dim), k2(dim), k3(dim), k4(dim), tmp(dim);

    auto record = [&](double t) {
        traj.times.push_back(t);
        for (std::size_t d = 0; d < dim; ++d) traj.states[d].push_back(y[d]);
    };
    record(t0);

    for (std::size_t s = 0; s < steps; ++s) {
        const double t = t0 + static_cast<double>(s) * dt;
        rhs(t, y, k1);
        for (std::size_t d = 0; d < dim; ++d) tmp[d] = y[d] + 0.5 * dt * k1[d];
        rhs(t + 0.5 * dt, tmp, k2);
        for (std::size_t d = 0; d < dim; ++d) tmp[d] = y[d] + 0.5 * dt * k2[d];
        rhs(t + 0.5 * dt, tmp, k3);
        for (std::size_t d = 0; d < dim; ++d) tmp[d] = y[d] + dt * k3[d];
        rhs(t + dt, tmp, k4);
        for (std::size_t d = 0; d < dim; ++d)
            y[d] += dt / 6.0 * (k1[d] + 2.0 * k2[d] + 2.0 * k3[d] + k4[d]);
        for (double v : y)
            if (!std::isfinite(v))
                throw DataError("integrate_ode: state blew up at t=" +
                                format_double(t + dt));
        record(t + dt);
    }
    return traj;
}

void lorenz_rhs(double sigma, double rho, double beta, std::span<const double> y,
                std::span<double> dydt) {
    dydt[0] = sigma * (y[1] - y[0]);
    dydt[1] = y[0] * (rho - y[2]) - y[1];
    dydt[2] = y[0] * y[1] - beta * y[2];
}

std::vector<Dataset> make_lorenz_dataset(const LorenzConfig& cfg) {
    auto rhs = [&](double, std::span<const double> y, std::span<double> dydt) {
        lorenz_rhs(cfg.sigma, cfg.rho, cfg.beta, y, dydt);
    };
    Trajectory traj = integrate_ode(rhs, cfg.y0, 0.0, cfg.t_end, cfg.dt);

    Rng rng(cfg.seed);
    const char* names[] = {"x", "y", "z"};
    std::vector<std::vector<double>> noisy(3);
    for (int d = 0; d < 3; ++d)
        noisy[static_cast<std::size_t>(d)] =
            cfg.noise_level > 0.0
                ? add_noise(traj.states[static_cast<std::size_t>(d)], cfg.noise_level, rng)
                : traj.states[static_cast<std::size_t>(d)];

    std::vector<std::vector<double>> derivs(3);
    std::string smoothing_desc;
    for (int d = 0; d < 3; ++d) {
        auto& series = noisy[static_cast<std::size_t>(d)];
        if (cfg.smooth_states_first) {
            auto smoothed = savitzky_golay(series, cfg.sg_window, cfg.sg_polyorder);
            derivs[static_cast<std::size_t>(d)] = central_difference(smoothed, cfg.dt);
            smoothing_desc = "savitzky_golay_states(" + std::to_string(cfg.sg_window) + "," +
                             std::to_string(cfg.sg_polyorder) + ")+central_difference";
        } else {
            auto diff = central_difference(series, cfg.dt);
            derivs[static_cast<std::size_t>(d)] =
                savitzky_golay(diff, cfg.sg_window, cfg.sg_polyorder);
            smoothing_desc = "central_difference+savitzky_golay(" +
                             std::to_string(cfg.sg_window) + "," +
                             std::to_string(cfg.sg_polyorder) + ")";
        }
    }

    std::vector<std::vector<double>> observed = noisy;
    if (cfg.smooth_observations && cfg.noise_level > 0.0) {
        for (auto& row : observed) row = savitzky_golay(row, cfg.sg_window, cfg.sg_polyorder);
        smoothing_desc += "+smoothed_observations";
    }

    std::vector<Dataset> out(3);
    for (int d = 0; d < 3; ++d) {
        Dataset& ds = out[static_cast<std::size_t>(d)];
        ds.var_names = {"x", "y", "z"};
        ds.Y.rows = observed;
        ds.target = derivs[static_cast<std::size_t>(d)];
        ds.meta.noise_level = cfg.noise_level;
        ds.meta.dt = cfg.dt;
        ds.meta.smoothing = smoothing_desc;
        ds.meta.source = std::string("lorenz:d") + names[d] + "/dt";
    }
    return out;
}

FunctionDatasetPair make_function_dataset(const ExpressionTree& target, const SamplingSpec& spec,
                                          double noise_level, Rng& rng) {
    if (target.constant_count() != 0)
        throw ContractError("make_function_dataset: target must have no unfitted constants");
    if (spec.points < 1) throw ContractError("make_function_dataset: need at least one point");

    auto draw = [&](Dataset& ds) {
        const std::size_t dims = spec.vars.size();
        ds.var_names.clear();
        for (const auto& v : spec.vars) ds.var_names.push_back(v.name);
        ds.Y.rows.assign(dims, std::vector<double>(static_cast<std::size_t>(spec.points)));
        ds.target.resize(static_cast<std::size_t>(spec.points));
        std::vector<double> point(dims);
        for (int k = 0; k < spec.points; ++k) {
            for (int attempt = 0;; ++attempt) {
                for (std::size_t d = 0; d < dims; ++d)
                    point[d] = rng.uniform(spec.vars[d].lo, spec.vars[d].hi);
                const double y = evaluate_point(target, point);
                if (std::isfinite(y)) {
                    for (std::size_t d = 0; d < dims; ++d)
                        ds.Y.rows[d][static_cast<std::size_t>(k)] = point[d];
                    ds.target[static_cast<std::size_t>(k)] = y;
                    break;
                }
                if (!spec.resample_invalid)
                    throw DataError("make_function_dataset: target invalid at a sampled point");
                if (attempt > 10000)
                    throw DataError("make_function_dataset: cannot sample a valid point");
            }
        }
    };

    FunctionDatasetPair pair;
    draw(pair.train);
    draw(pair.test);
    if (noise_level > 0.0) {
        pair.train.target = add_noise(pair.train.target, noise_level, rng);
        pair.train.meta.noise_level = noise_level;
    }
    pair.train.meta.source = "synthetic:train";
    pair.test.meta.source = "synthetic:test";
    return pair;
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    for (char c : line) {
        if (c == ',') {
            out.push_back(field);
            field.clear();
        } else if (c != '\r') {
            field += c;
        }
    }
    out.push_back(field);
    for (auto& f : out) {
        std::size_t a = f.find_first_not_of(" \t");
        std::size_t b = f.find_last_not_of(" \t");
        f = a == std::string::npos ? "" : f.substr(a, b - a + 1);
    }
    return out;
}

}  // namespace

Dataset load_csv(const std::string& path, const CsvSchema& schema, CsvLoadInfo* info) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open data file: " + path);

    std::string line;
    if (!std::getline(in, line)) throw DataError("empty data file: " + path);
    const auto header = split_csv_line(line);

    auto col_of = [&](const std::string& name) -> int {
        auto it = std::find(header.begin(), header.end(), name);
        return it == header.end() ? -1 : static_cast<int>(it - header.begin());
    };

    if (schema.target_column.empty()) throw ConfigError("csv schema: target column not set");
    const int target_col = col_of(schema.target_column);
    if (target_col < 0)
        throw DataError(path + ": missing target column '" + schema.target_column + "'");

    std::vector<std::string> var_cols = schema.variable_columns;
    if (var_cols.empty()) {
        for (const auto& h : header)
            if (h != schema.target_column && h != schema.time_column) var_cols.push_back(h);
    }
    std::vector<int> var_idx;
    for (const auto& name : var_cols) {
        int c = col_of(name);
        if (c < 0) throw DataError(path + ": missing column '" + name + "'");
        var_idx.push_back(c);
    }
    int time_col = -1;
    if (!schema.time_column.empty()) {
        time_col = col_of(schema.time_column);
        if (time_col < 0)
            throw DataError(path + ": missing time column '" + schema.time_column + "'");
    }

    Dataset ds;
    ds.var_names = var_cols;
    ds.Y.rows.assign(var_cols.size(), {});
    std::vector<double> times;
    std::size_t dropped = 0;

    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != header.size())
            throw DataError(path + ": row with " + std::to_string(fields.size()) +
                            " fields, header has " + std::to_string(header.size()));
        std::vector<double> values(fields.size());
        bool ok = true;
        for (std::size_t i = 0; i < fields.size(); ++i) {
            char* end = nullptr;
            values[i] = std::strtod(fields[i].c_str(), &end);
            if (end != fields[i].c_str() + fields[i].size() || !std::isfinite(values[i])) {
                ok = false;
                break;
            }
        }
        if (!ok) {
            ++dropped;
            continue;
        }
        for (std::size_t v = 0; v < var_idx.size(); ++v)
            ds.Y.rows[v].push_back(values[static_cast<std::size_t>(var_idx[v])]);
        ds.target.push_back(values[static_cast<std::size_t>(target_col)]);
        if (time_col >= 0) times.push_back(values[static_cast<std::size_t>(time_col)]);
    }
    if (ds.target.empty()) throw DataError(path + ": no data rows");
    if (times.size() >= 2) ds.meta.dt = times[1] - times[0];
    ds.meta.source = path;
    if (info) info->rows_dropped = dropped;
    return ds;
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write file: " + path);
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (i) out << ',';
        out << header[i];
    }
    out << '\n';
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out << ',';
            out << row[i];
        }
        out << '\n';
    }
}

std::vector<double> solve_least_squares(const std::vector<std::vector<double>>& columns,
                                        std::span<const double> rhs) {
    const int k = static_cast<int>(columns.size());
    if (k == 0) throw ContractError("solve_least_squares: no columns");
    const std::size_t n = rhs.size();
    for (const auto& col : columns)
        if (col.size() != n) throw ContractError("solve_least_squares: ragged columns");
    std::vector<double> ata(static_cast<std::size_t>(k * k), 0.0);
    std::vector<double> atb(static_cast<std::size_t>(k), 0.0);
    for (int a = 0; a < k; ++a) {
        for (int b = a; b < k; ++b) {
            double acc = 0.0;
            for (std::size_t i = 0; i < n; ++i)
                acc += columns[static_cast<std::size_t>(a)][i] * columns[static_cast<std::size_t>(b)][i];
            ata[static_cast<std::size_t>(a * k + b)] = acc;
            ata[static_cast<std::size_t>(b * k + a)] = acc;
        }
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) acc += columns[static_cast<std::size_t>(a)][i] * rhs[i];
        atb[static_cast<std::size_t>(a)] = acc;
    }
    // tiny ridge keeps near-collinear bases solvable
    for (int a = 0; a < k; ++a) ata[static_cast<std::size_t>(a * k + a)] *= 1.0 + 1e-12;
    solve_inplace(ata, atb, k);
    return atb;
}

void save_dataset_meta(const Dataset& ds, const std::string& path) {
    KvDoc doc;
    doc.add("source", ds.meta.source);
    doc.add_double("noise_level", ds.meta.noise_level);
    if (ds.meta.dt > 0.0) doc.add_double("dt", ds.meta.dt);
    if (!ds.meta.smoothing.empty()) doc.add("smoothing", ds.meta.smoothing);
    doc.add_int("points", static_cast<std::int64_t>(ds.num_points()));
    std::string vars;
    for (const auto& v : ds.var_names) {
        if (!vars.empty()) vars += ' ';
        vars += v;
    }
    doc.add("variables", vars);
    doc.save(path);
}

}  // namespace spl
