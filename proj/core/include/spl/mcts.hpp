#pragma once

#include <cstdint>
#include <deque>
#include <limits>
#include <string>
#include <unordered_map>
#include <vector>

#include "spl/grammar.hpp"
#include "spl/reward.hpp"
#include "spl/rng.hpp"

namespace spl {

struct TransplantConfig {
    /// Episodes between module transplantations; 0 disables transplantation.
    int interval_episodes = 0;
    /// Module size cap (in production rules) grows linearly from start to end
    /// across the run.
    int max_module_size_start = 5;
    int max_module_size_end = 20;
    /// Live augmented rules kept after each refresh. 0 = inherit the
    /// grammar's cap (they must agree when both are set).
    int pool_cap = 0;
    /// Completed expressions below this reward are never transplanted.
    /// <= 0 selects the default rule: the 90th percentile of completed
    /// rewards seen since the previous transplantation.
    double min_reward_to_transplant = 0.0;
    /// Start a fresh search tree after each refresh. The enriched grammar
    /// restates the search problem, so stale visit statistics (tuned to the
    /// previous rule set) are discarded; caches, the running best and R_max
    /// carry over.
    bool reset_tree_on_refresh = true;
};

struct SearchConfig {
    double eta = 0.99;
    double c = 0.70710678118654752440;  // 1/sqrt(2)
    double epsilon = 0.05;
    int t_max = 50;
    int episodes = 10000;
    int sims_per_expansion = 10;
    std::uint64_t seed = 0;
    TransplantConfig transplant;

    int max_constants = 3;
    bool simplify_before_eval = true;
    bool count_module_internals = false;
    /// Ablation switch: when false, UCT uses the raw max reward as Q instead
    /// of scaling by the global maximum.
    bool adaptive_scaling = true;

    double constant_lo = -10.0;
    double constant_hi = 10.0;
    /// Rollout-time constant fits subsample datasets larger than this (the
    /// final refit always uses every point). 0 disables.
    int fit_max_points = 512;

    /// Optional early exit once the best candidate's RMSE drops to or below
    /// this value (< 0 disables; the episode count then always runs out).
    double stop_at_rmse = -1.0;

    /// Tree-statistics snapshot cadence (0 = off) and destination.
    int checkpoint_every = 0;
    std::string checkpoint_path;

    /// Extra invariant checking during backpropagation (acceptance suite).
    bool validate_invariants = false;
};

struct SearchStats {
    std::uint64_t episodes_run = 0;
    std::uint64_t rollouts = 0;
    std::uint64_t completed_rollouts = 0;
    std::uint64_t reward_evaluations = 0;  // cache misses
    std::uint64_t cache_hits = 0;
    std::uint64_t transplant_events = 0;
    std::uint64_t invariant_violations = 0;
    std::size_t tree_nodes = 0;
    std::size_t pool_size = 0;
    double wall_seconds = 0.0;
};

struct DiscoveryResult {
    std::string expression;            // canonical rendering with fitted constants
    std::string expression_raw;        // canonical rendering with slot names
    ExpressionTree tree;               // simplified best tree (slots unfitted)
    std::vector<double> constants;     // final full-budget fit
    double best_reward = 0.0;          // max of reward_trace
    double best_rmse = std::numeric_limits<double>::infinity();
    int best_n_rules = 0;
    int episode_found = -1;
    std::vector<double> reward_trace;  // per-episode best-so-far
    double global_max_reward = 0.0;    // R_max
    SearchStats stats;
};

/// UCT selection score with greedy max-reward Q and adaptive scaling:
///   Qhat = r*(s,a) / R_max   (0 when R_max == 0)
///   UCT  = Qhat + c * sqrt(ln N(s) / N(s,a))
/// Unvisited actions score +inf.
double uct_score(int action_visits, double action_max_reward, int node_visits, double c,
                 double r_max, bool adaptive_scaling = true);

/// Per-(state,action) statistics backing UCT.
struct SearchNode {
    DerivationState state;
    struct Edge {
        RuleId action;
        int child;  // arena index
        int visits = 0;
        double max_reward = 0.0;
    };
    std::vector<Edge> edges;  // sorted by action id
    int total_visits = 0;
};

/// One sequential search tree over grammar derivations (Alg-style episode
/// loop: select, expand, simulate, backpropagate, with periodic module
/// transplantation). The grammar's augmented pool is mutated between
/// episodes; clone the grammar per trial when running trials in parallel.
class SplSearch {
  public:
    SplSearch(Grammar& grammar, const Dataset& data, const SearchConfig& cfg);

    DiscoveryResult run();

    /// Single-episode stepping (tests drive this directly).
    void step_episode();
    const SearchNode& root() const { return arena_[0]; }
    const std::deque<SearchNode>& arena() const { return arena_; }
    double r_max() const { return r_max_; }
    const SearchStats& stats() const { return stats_; }
    double best_reward() const { return best_reward_; }
    const std::vector<double>& reward_trace() const { return trace_; }

    /// Reward of a complete traversal, via the per-run cache.
    double reward_of(const std::vector<RuleId>& traversal);

    /// Promote high-reward completed trees into the grammar's augmented pool.
    void transplant_modules(int episode);

    /// N(s) == sum over edges of N(s,a) at every node.
    bool visit_counts_consistent() const;

    DiscoveryResult finalize();

  private:
    struct PathStep {
        int node;
        std::size_t edge_index;
    };

    int select(std::vector<PathStep>& path);
    int expand(int node_index, std::vector<PathStep>& path);
    double simulate(const DerivationState& start, std::vector<RuleId>* best_traversal);
    void backpropagate(const std::vector<PathStep>& path, double reward);
    void write_checkpoint(int episode) const;
    void record_completion(const std::vector<RuleId>& traversal, double reward);
    int make_node(DerivationState state);

    Grammar& grammar_;
    const Dataset& data_;
    SearchConfig cfg_;
    RewardConfig reward_cfg_;
    Rng rng_;
    std::uint64_t fit_salt_;

    std::deque<SearchNode> arena_;

    struct CachedReward {
        double reward;
        double rmse;
    };
    std::unordered_map<std::uint64_t, CachedReward> cache_;  // keyed by traversal hash
    std::unordered_map<std::uint64_t, std::vector<RuleId>> cache_keys_;  // collision guard
    std::unordered_map<std::string, CachedReward> canonical_cache_;  // simplified-form dedup

    // best-so-far
    double best_reward_ = 0.0;
    double best_rmse_ = std::numeric_limits<double>::infinity();
    std::vector<RuleId> best_traversal_;
    int episode_found_ = -1;

    double r_max_ = 0.0;
    std::vector<double> trace_;
    int episode_ = 0;
    bool stopped_early_ = false;

    // transplant bookkeeping
    std::vector<double> completion_rewards_;  // since last transplant
    struct ModuleCandidate {
        std::vector<RuleId> traversal;
        double reward;
    };
    std::vector<ModuleCandidate> module_candidates_;  // bounded, best-first

    SearchStats stats_;
};

/// Alg-loop driver: run cfg.episodes episodes and return the best expression
/// with constants refit at full budget. Deterministic for a fixed seed.
DiscoveryResult run_discovery(Grammar& g, const Dataset& data, const SearchConfig& cfg);

}  // namespace spl
