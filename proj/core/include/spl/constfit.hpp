#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "spl/dataset.hpp"
#include "spl/expr.hpp"

namespace spl {

struct PowellOptions {
    double tol = 1e-10;            // stop when a full cycle improves less than this
    int max_evals_per_dim = 20000; // evaluation budget
    double initial_step = 1.0;     // first bracketing step of each line search
    int max_bracket_expansions = 50;
    int max_cycles = 200;
};

struct PowellResult {
    std::vector<double> x;
    double f = 0.0;
    int evaluations = 0;
    bool converged = false;
};

/// Conjugate-direction minimization without derivatives: cycle over a
/// direction set with bracketed golden-section line searches, replacing the
/// direction of largest decrease with the cycle displacement. The objective
/// may return +inf anywhere (treated as an ordinary bad value).
PowellResult powell_minimize(const std::function<double(std::span<const double>)>& objective,
                             std::vector<double> x0, const PowellOptions& opts = {});

struct FitOptions {
    bool fast = false;        // lowered budget for rollout-time fits (2,000 evals/dim)
    double constant_lo = -10.0;
    double constant_hi = 10.0;
    std::uint64_t seed = 0;   // drives the random starts
    double tol = 1e-10;
    /// When > 0 and the dataset is larger, the Powell objective runs on a
    /// strided subsample of at most this many points; the reported RMSE is
    /// still computed over the full dataset with the fitted constants.
    int max_points = 0;
    /// Start points: zero vector, ones vector, then +/- uniform random pairs
    /// up to this count.
    int starts = 4;
};

struct FitResult {
    std::vector<double> constants;
    double rmse = 0.0;
    bool converged = false;
    int evaluations = 0;
};

/// Fit the tree's constant slots to minimize RMSE(target, eval(t, Y, c)).
/// Multi-start: zero vector, ones vector, and a +/- uniform random pair from
/// [constant_lo, constant_hi]; best result wins. Invalid evaluations score
/// +inf. Throws ContractError when the tree has no slots or N == 0.
FitResult fit_constants(const ExpressionTree& t, const DataMatrix& Y,
                        std::span<const double> target, const FitOptions& opts = {});

/// RMSE between target and the tree evaluated with the given constants;
/// +inf when evaluation is invalid. (Callers with zero-slot trees use this
/// directly.)
double rmse_of(const ExpressionTree& t, const DataMatrix& Y, std::span<const double> target,
               std::span<const double> constants = {});

}  // namespace spl
