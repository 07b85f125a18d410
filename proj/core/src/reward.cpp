#include "spl/reward.hpp"

#include <algorithm>
#include <cmath>

#include "spl/errors.hpp"

namespace spl {

RewardOutcome compute_reward(const ExpressionTree& t, const Dataset& data,
                             const RewardConfig& cfg) {
    RewardOutcome out;
    if (cfg.eta <= 0.0 || cfg.eta > 1.0) throw ContractError("compute_reward: eta must be in (0,1]");
    if (data.target.empty()) throw ContractError("compute_reward: empty target");

    const int n = t.n_rules();
    if (cfg.max_rules > 0 && n > cfg.max_rules) return out;

    out.evaluated = cfg.simplify_before_eval ? simplify(t) : t;
    if (out.evaluated.constant_count() > cfg.max_constants) return out;

    double rmse;
    if (out.evaluated.constant_count() > 0) {
        FitResult fit = fit_constants(out.evaluated, data.Y, data.target, cfg.fit);
        rmse = fit.rmse;
        out.fit = std::move(fit);
    } else {
        rmse = rmse_of(out.evaluated, data.Y, data.target);
    }
    if (!std::isfinite(rmse)) {
        out.fit.reset();
        return out;
    }

    out.rmse = rmse;
    out.valid = true;
    out.reward = std::pow(cfg.eta, n) / (1.0 + rmse);
    return out;
}

Dataset align_dataset(const Grammar& g, const Dataset& data) {
    Dataset out;
    out.target = data.target;
    out.meta = data.meta;
    out.var_names = g.variable_names();
    out.Y.rows.reserve(out.var_names.size());
    for (const auto& name : out.var_names) {
        auto it = std::find(data.var_names.begin(), data.var_names.end(), name);
        if (it == data.var_names.end())
            throw DataError("dataset has no column for grammar variable '" + name + "'");
        out.Y.rows.push_back(data.Y.rows[static_cast<std::size_t>(it - data.var_names.begin())]);
    }
    return out;
}

}  // namespace spl
