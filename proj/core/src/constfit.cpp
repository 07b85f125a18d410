#include "spl/constfit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "spl/errors.hpp"
#include "spl/rng.hpp"

namespace spl {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Budget {
    int remaining;
    bool exhausted() const { return remaining <= 0; }
};

class LineSearch {
  public:
    LineSearch(const std::function<double(std::span<const double>)>& f,
               std::span<const double> origin, std::span<const double> direction, Budget& budget)
        : f_(f), origin_(origin), dir_(direction), budget_(budget),
          probe_(origin.begin(), origin.end()) {}

    double eval(double alpha) {
        if (budget_.exhausted()) return kInf;
        --budget_.remaining;
        for (std::size_t i = 0; i < probe_.size(); ++i)
            probe_[i] = origin_[i] + alpha * dir_[i];
        double v = f_(probe_);
        return std::isnan(v) ? kInf : v;
    }

    /// Minimize along the line from alpha=0 (value f0 already known).
    /// Returns (alpha*, f*).
    std::pair<double, double> minimize(double f0, double step, int max_expansions) {
        // bracket: find a descent point, shrinking the probe step until one
        // appears (narrow curved valleys defeat any fixed step size)
        double a = 0.0, fa = f0;
        double b = 0.0, fb = f0;
        bool found = false;
        double probe = step;
        for (int shrink = 0; shrink < 16 && !budget_.exhausted(); ++shrink) {
            double f_pos = eval(probe);
            if (f_pos < fa) {
                b = probe;
                fb = f_pos;
                found = true;
                break;
            }
            double f_neg = eval(-probe);
            if (f_neg < fa) {
                b = -probe;
                fb = f_neg;
                found = true;
                break;
            }
            probe *= 0.125;
        }
        if (!found) return {0.0, f0};
        double c = b * 2.0;
        double fc = eval(c);
        int expansions = 0;
        while (fc < fb && expansions < max_expansions && !budget_.exhausted()) {
            a = b;
            fa = fb;
            b = c;
            fb = fc;
            c = b * 2.0;
            fc = eval(c);
            ++expansions;
        }
        if (fc < fb) return {c, fc};  // ran out of expansions while still descending

        // golden-section on [a, c] around b
        const double gr = 0.6180339887498949;
        double lo = std::min(a, c), hi = std::max(a, c);
        double x1 = hi - gr * (hi - lo);
        double x2 = lo + gr * (hi - lo);
        double f1 = eval(x1);
        double f2 = eval(x2);
        for (int it = 0; it < 80 && !budget_.exhausted(); ++it) {
            if (std::abs(hi - lo) < 1e-12 * (1.0 + std::abs(x1) + std::abs(x2))) break;
            if (f1 < f2) {
                hi = x2;
                x2 = x1;
                f2 = f1;
                x1 = hi - gr * (hi - lo);
                f1 = eval(x1);
            } else {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo + gr * (hi - lo);
                f2 = eval(x2);
            }
        }
        double best_alpha = f1 < f2 ? x1 : x2;
        double best_f = std::min(f1, f2);
        if (fb < best_f) {
            best_alpha = b;
            best_f = fb;
        }
        if (f0 <= best_f) return {0.0, f0};
        return {best_alpha, best_f};
    }

  private:
    const std::function<double(std::span<const double>)>& f_;
    std::span<const double> origin_;
    std::span<const double> dir_;
    Budget& budget_;
    std::vector<double> probe_;
};

}  // namespace

PowellResult powell_minimize(const std::function<double(std::span<const double>)>& objective,
                             std::vector<double> x0, const PowellOptions& opts) {
    const std::size_t dim = x0.size();
    if (dim == 0) throw ContractError("powell_minimize: empty start point");

    Budget budget{opts.max_evals_per_dim * static_cast<int>(dim)};
    PowellResult result;
    result.x = std::move(x0);
    --budget.remaining;
    result.f = objective(result.x);
    if (std::isnan(result.f)) result.f = kInf;

    // initial direction set: coordinate axes
    std::vector<std::vector<double>> dirs(dim, std::vector<double>(dim, 0.0));
    for (std::size_t i = 0; i < dim; ++i) dirs[i][i] = 1.0;

    std::vector<double> cycle_start(dim), extrapolated(dim), displacement(dim);
    for (int cycle = 0; cycle < opts.max_cycles; ++cycle) {
        if (budget.exhausted()) break;
        cycle_start = result.x;
        const double f_start = result.f;
        double biggest_drop = 0.0;
        std::size_t biggest_index = 0;

        for (std::size_t i = 0; i < dim; ++i) {
            LineSearch ls(objective, result.x, dirs[i], budget);
            auto [alpha, f_new] = ls.minimize(result.f, opts.initial_step,
                                              opts.max_bracket_expansions);
            double drop = result.f - f_new;
            if (drop > biggest_drop) {
                biggest_drop = drop;
                biggest_index = i;
            }
            if (alpha != 0.0) {
                for (std::size_t k = 0; k < dim; ++k) result.x[k] += alpha * dirs[i][k];
                result.f = f_new;
            }
        }

        const double cycle_improvement =
            std::isfinite(f_start) ? f_start - result.f : (std::isfinite(result.f) ? kInf : 0.0);
        if (cycle_improvement <= opts.tol) {
            result.converged = true;
            break;
        }

        double norm = 0.0;
        for (std::size_t k = 0; k < dim; ++k) {
            displacement[k] = result.x[k] - cycle_start[k];
            norm += displacement[k] * displacement[k];
        }
        if (norm == 0.0) continue;

        // classic replacement tests on the extrapolated point: only swap in
        // the cycle displacement when it is a genuinely productive direction,
        // otherwise the set degenerates into near-parallel vectors
        for (std::size_t k = 0; k < dim; ++k)
            extrapolated[k] = 2.0 * result.x[k] - cycle_start[k];
        --budget.remaining;
        double f_ext = objective(extrapolated);
        if (std::isnan(f_ext)) f_ext = kInf;
        if (f_ext < f_start) {
            const double d1 = f_start - result.f - biggest_drop;
            const double d2 = f_start - f_ext;
            const double keep_test =
                2.0 * (f_start - 2.0 * result.f + f_ext) * d1 * d1 - biggest_drop * d2 * d2;
            if (keep_test < 0.0) {
                LineSearch ls(objective, result.x, displacement, budget);
                auto [alpha, f_new] = ls.minimize(result.f, opts.initial_step,
                                                  opts.max_bracket_expansions);
                if (alpha != 0.0) {
                    for (std::size_t k = 0; k < dim; ++k)
                        result.x[k] += alpha * displacement[k];
                    result.f = f_new;
                }
                dirs[biggest_index] = dirs[dim - 1];
                dirs[dim - 1] = displacement;
            }
        }
    }

    result.evaluations = opts.max_evals_per_dim * static_cast<int>(dim) - budget.remaining;
    return result;
}

double rmse_of(const ExpressionTree& t, const DataMatrix& Y, std::span<const double> target,
               std::span<const double> constants) {
    thread_local std::vector<double> values;
    if (!evaluate_into(t, Y, constants, values)) return kInf;
    double acc = 0.0;
    const std::size_t n = target.size();
    for (std::size_t i = 0; i < n; ++i) {
        const double d = values[i] - target[i];
        acc += d * d;
    }
    const double mse = acc / static_cast<double>(n);
    return std::isfinite(mse) ? std::sqrt(mse) : kInf;
}

FitResult fit_constants(const ExpressionTree& t, const DataMatrix& Y,
                        std::span<const double> target, const FitOptions& opts) {
    const int slots = t.constant_count();
    if (slots < 1)
        throw ContractError("fit_constants: tree has no constant slots");
    if (target.empty()) throw DataError("fit_constants: empty target");
    if (target.size() != Y.num_points())
        throw ContractError("fit_constants: target length does not match data");

    // optional strided subsample for the inner objective
    DataMatrix sub_Y;
    std::vector<double> sub_target;
    const DataMatrix* fit_Y = &Y;
    std::span<const double> fit_target = target;
    if (opts.max_points > 0 && target.size() > static_cast<std::size_t>(opts.max_points)) {
        const std::size_t stride = (target.size() + opts.max_points - 1) /
                                   static_cast<std::size_t>(opts.max_points);
        sub_Y.rows.resize(Y.rows.size());
        for (std::size_t i = 0; i < target.size(); i += stride) {
            for (std::size_t v = 0; v < Y.rows.size(); ++v)
                sub_Y.rows[v].push_back(Y.rows[v][i]);
            sub_target.push_back(target[i]);
        }
        fit_Y = &sub_Y;
        fit_target = sub_target;
    }

    auto objective = [&](std::span<const double> c) {
        return rmse_of(t, *fit_Y, fit_target, c);
    };

    PowellOptions popts;
    popts.tol = opts.tol;
    popts.max_evals_per_dim = opts.fast ? 2000 : 20000;
    if (opts.fast) {
        // rollout-time fits: split the 2,000 evals/dim budget across the
        // starts and stop once further refinement cannot change candidate
        // ranking
        popts.max_evals_per_dim = 2000 / std::max(opts.starts, 1);
        popts.tol = std::max(opts.tol, 1e-5);
        popts.max_cycles = 12;
    }

    Rng rng(opts.seed);
    std::vector<std::vector<double>> starts;
    starts.emplace_back(slots, 0.0);
    if (opts.starts > 1) starts.emplace_back(slots, 1.0);
    std::vector<double> u(slots);
    while (static_cast<int>(starts.size()) < opts.starts) {
        for (auto& v : u) v = rng.uniform(0.0, opts.constant_hi);
        starts.push_back(u);
        if (static_cast<int>(starts.size()) >= opts.starts) break;
        for (auto& v : u) v = -v;
        starts.push_back(u);
    }

    FitResult best;
    best.rmse = kInf;
    for (const auto& s : starts) {
        PowellResult r = powell_minimize(objective, s, popts);
        best.evaluations += r.evaluations;
        if (r.f < best.rmse) {
            best.rmse = r.f;
            best.constants = r.x;
            best.converged = r.converged;
        }
    }
    if (best.constants.empty()) {
        best.constants.assign(static_cast<std::size_t>(slots), 0.0);
        best.rmse = objective(best.constants);
        best.converged = false;
    }
    if (fit_Y != &Y) best.rmse = rmse_of(t, Y, target, best.constants);
    return best;
}

}  // namespace spl
