#pragma once

#include <optional>

#include "spl/constfit.hpp"
#include "spl/dataset.hpp"
#include "spl/expr.hpp"

namespace spl {

struct RewardConfig {
    double eta = 0.99;       // parsimony discount, in (0, 1]
    int max_constants = 3;   // slots beyond this score zero (no fit attempted)
    int max_rules = 0;       // 0 = unlimited; trees above this score zero
    bool simplify_before_eval = true;
    FitOptions fit;
};

struct RewardOutcome {
    double reward = 0.0;
    double rmse = 0.0;              // meaningful only when reward > 0
    bool valid = false;             // false on any zero-reward path
    std::optional<FitResult> fit;   // present when constants were fitted
    ExpressionTree evaluated;       // the (possibly simplified) tree that was scored
};

/// Parsimony-discounted score of a candidate tree against the dataset:
///     r = eta^n / (1 + RMSE)
/// with n the tree's production-rule count. Every failure path (invalid
/// evaluation, constant cap exceeded, oversize tree) maps to r = 0; the
/// result is always in [0, eta^n] and never NaN.
RewardOutcome compute_reward(const ExpressionTree& t, const Dataset& data,
                             const RewardConfig& cfg);

/// Reorder dataset rows so they align with the grammar's variable order.
/// Throws DataError when a grammar variable is missing from the dataset.
Dataset align_dataset(const Grammar& g, const Dataset& data);

}  // namespace spl
