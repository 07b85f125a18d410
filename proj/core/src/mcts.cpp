#include "spl/mcts.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "spl/errors.hpp"
#include "spl/kvdoc.hpp"

namespace spl {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::size_t kMaxCacheEntries = 1u << 20;
constexpr std::size_t kMaxModuleCandidates = 256;

}  // namespace

double uct_score(int action_visits, double action_max_reward, int node_visits, double c,
                 double r_max, bool adaptive_scaling) {
    if (action_visits == 0) return kInf;
    double q = action_max_reward;
    if (adaptive_scaling) q = r_max > 0.0 ? action_max_reward / r_max : 0.0;
    return q + c * std::sqrt(std::log(static_cast<double>(node_visits)) /
                             static_cast<double>(action_visits));
}

SplSearch::SplSearch(Grammar& grammar, const Dataset& data, const SearchConfig& cfg)
    : grammar_(grammar), data_(data), cfg_(cfg), rng_(split_seed(cfg.seed, 0x5e1ec7)),
      fit_salt_(split_seed(cfg.seed, 0xf17)) {
    if (cfg_.episodes < 1) throw ContractError("search: episodes must be >= 1");
    if (cfg_.t_max < 1) throw ContractError("search: t_max must be >= 1");
    if (cfg_.sims_per_expansion < 1) throw ContractError("search: sims_per_expansion must be >= 1");
    if (cfg_.eta <= 0.0 || cfg_.eta > 1.0) throw ContractError("search: eta must be in (0,1]");
    if (cfg_.epsilon < 0.0 || cfg_.epsilon > 1.0)
        throw ContractError("search: epsilon must be in [0,1]");

    if (cfg_.transplant.pool_cap == 0)
        cfg_.transplant.pool_cap = static_cast<int>(grammar_.augmented_cap());
    else if (cfg_.transplant.pool_cap != static_cast<int>(grammar_.augmented_cap()))
        throw ContractError("search: transplant.pool_cap must match the grammar's augmented cap");

    reward_cfg_.eta = cfg_.eta;
    reward_cfg_.max_constants = cfg_.max_constants;
    reward_cfg_.max_rules = cfg_.count_module_internals ? 0 : cfg_.t_max;
    reward_cfg_.simplify_before_eval = cfg_.simplify_before_eval;
    reward_cfg_.fit.fast = true;
    reward_cfg_.fit.constant_lo = cfg_.constant_lo;
    reward_cfg_.fit.constant_hi = cfg_.constant_hi;
    reward_cfg_.fit.max_points = cfg_.fit_max_points;
    reward_cfg_.fit.starts = 2;  // final refit in finalize() uses the full set

    make_node(DerivationState::fresh(grammar_));
}

int SplSearch::make_node(DerivationState state) {
    arena_.push_back(SearchNode{std::move(state), {}, 0});
    return static_cast<int>(arena_.size()) - 1;
}

double SplSearch::reward_of(const std::vector<RuleId>& traversal) {
    const std::uint64_t key = hash_sequence(traversal);
    auto it = cache_.find(key);
    if (it != cache_.end()) {
        auto kit = cache_keys_.find(key);
        if (kit != cache_keys_.end() && kit->second == traversal) {
            ++stats_.cache_hits;
            record_completion(traversal, it->second.reward);
            return it->second.reward;
        }
    }

    BuildOptions bopts;
    bopts.count_module_internals = cfg_.count_module_internals;
    ExpressionTree tree = build_expression(grammar_, traversal, bopts);

    // distinct traversals frequently simplify to the same candidate; the
    // expensive part (the constant fit) is shared through a canonical-form
    // cache keyed on the simplified rendering and the rule count
    double reward;
    double rmse = kInf;
    const int n = tree.n_rules();
    if (reward_cfg_.max_rules > 0 && n > reward_cfg_.max_rules) {
        reward = 0.0;
    } else {
        ExpressionTree scored = cfg_.simplify_before_eval ? simplify(tree) : tree;
        std::string canon = render(scored, RenderStyle::Canonical);
        canon += '#';
        canon += std::to_string(n);
        auto cit = canonical_cache_.find(canon);
        if (cit != canonical_cache_.end()) {
            ++stats_.cache_hits;
            reward = cit->second.reward;
            rmse = cit->second.rmse;
        } else {
            RewardConfig rc = reward_cfg_;
            rc.simplify_before_eval = false;  // already simplified above
            rc.fit.seed = hash_sequence(traversal, fit_salt_);
            RewardOutcome outcome = compute_reward(scored, data_, rc);
            ++stats_.reward_evaluations;
            reward = outcome.reward;
            rmse = outcome.valid ? outcome.rmse : kInf;
            if (canonical_cache_.size() >= kMaxCacheEntries) canonical_cache_.clear();
            canonical_cache_[canon] = {reward, rmse};
        }
    }

    if (cache_.size() >= kMaxCacheEntries) {
        cache_.clear();
        cache_keys_.clear();
    }
    cache_[key] = {reward, rmse};
    cache_keys_[key] = traversal;

    if (reward > best_reward_) {
        best_reward_ = reward;
        best_rmse_ = rmse;
        best_traversal_ = traversal;
        episode_found_ = episode_;
    }
    record_completion(traversal, reward);
    return reward;
}

void SplSearch::record_completion(const std::vector<RuleId>& traversal, double reward) {
    if (cfg_.transplant.interval_episodes <= 0) return;
    completion_rewards_.push_back(reward);
    if (reward <= 0.0) return;
    // keep a bounded best-first candidate buffer
    if (module_candidates_.size() >= kMaxModuleCandidates &&
        reward <= module_candidates_.back().reward)
        return;
    auto pos = std::lower_bound(
        module_candidates_.begin(), module_candidates_.end(), reward,
        [](const ModuleCandidate& m, double r) { return m.reward > r; });
    module_candidates_.insert(pos, ModuleCandidate{traversal, reward});
    if (module_candidates_.size() > kMaxModuleCandidates) module_candidates_.pop_back();
}

int SplSearch::select(std::vector<PathStep>& path) {
    int node_index = 0;
    for (;;) {
        SearchNode& node = arena_[static_cast<std::size_t>(node_index)];
        if (node.state.complete() || node.state.step() >= cfg_.t_max) return node_index;

        const auto& valid = valid_actions(grammar_, node.state);
        // any valid action without an edge makes this node expandable; edges
        // and valid ids are both ascending, so a merge scan finds gaps
        {
            std::size_t e = 0;
            for (RuleId a : valid) {
                while (e < node.edges.size() && node.edges[e].action < a) ++e;
                if (e == node.edges.size() || node.edges[e].action != a) return node_index;
            }
        }

        std::size_t chosen_edge = 0;
        if (cfg_.epsilon > 0.0 && rng_.uniform() < cfg_.epsilon) {
            const RuleId a = valid[rng_.uniform_index(valid.size())];
            for (std::size_t e = 0; e < node.edges.size(); ++e)
                if (node.edges[e].action == a) {
                    chosen_edge = e;
                    break;
                }
        } else {
            double best = -kInf;
            std::size_t e = 0;
            bool found = false;
            for (RuleId a : valid) {
                while (node.edges[e].action != a) ++e;
                const double score = uct_score(node.edges[e].visits, node.edges[e].max_reward,
                                               node.total_visits, cfg_.c, r_max_,
                                               cfg_.adaptive_scaling);
                if (!found || score > best) {
                    best = score;
                    chosen_edge = e;
                    found = true;
                }
            }
        }
        path.push_back({node_index, chosen_edge});
        node_index = node.edges[chosen_edge].child;
    }
}

int SplSearch::expand(int node_index, std::vector<PathStep>& path) {
    SearchNode& node = arena_[static_cast<std::size_t>(node_index)];
    const auto& valid = valid_actions(grammar_, node.state);
    std::vector<RuleId> unexpanded;
    unexpanded.reserve(valid.size());
    {
        std::size_t e = 0;
        for (RuleId a : valid) {
            while (e < node.edges.size() && node.edges[e].action < a) ++e;
            if (e == node.edges.size() || node.edges[e].action != a) unexpanded.push_back(a);
        }
    }
    if (unexpanded.empty()) throw ContractError("expand: no unexpanded action");

    const RuleId action = unexpanded[rng_.uniform_index(unexpanded.size())];
    const int child = make_node(apply_rule(grammar_, node.state, action));

    SearchNode& node_again = arena_[static_cast<std::size_t>(node_index)];
    SearchNode::Edge edge{action, child, 0, 0.0};
    auto pos = std::lower_bound(node_again.edges.begin(), node_again.edges.end(), action,
                                [](const SearchNode::Edge& e, RuleId a) { return e.action < a; });
    const auto edge_index = static_cast<std::size_t>(pos - node_again.edges.begin());
    node_again.edges.insert(pos, edge);
    // edge indices after the insertion point shifted by one
    for (auto& step : path)
        if (step.node == node_index && step.edge_index >= edge_index) ++step.edge_index;
    path.push_back({node_index, edge_index});
    return child;
}

double SplSearch::simulate(const DerivationState& start, std::vector<RuleId>* best_traversal) {
    double best = 0.0;
    DerivationState scratch;
    for (int k = 0; k < cfg_.sims_per_expansion; ++k) {
        scratch = start;
        while (!scratch.complete() && scratch.step() < cfg_.t_max) {
            const auto& valid = valid_actions(grammar_, scratch);
            apply_rule_inplace(grammar_, scratch, valid[rng_.uniform_index(valid.size())]);
        }
        ++stats_.rollouts;
        if (!scratch.complete()) continue;  // size cap exceeded: zero reward
        ++stats_.completed_rollouts;
        const double r = reward_of(scratch.traversal);
        if (r > best) {
            best = r;
            if (best_traversal) *best_traversal = scratch.traversal;
        }
    }
    return best;
}

void SplSearch::backpropagate(const std::vector<PathStep>& path, double reward) {
    if (std::isnan(reward)) reward = 0.0;
    if (reward > r_max_) r_max_ = reward;
    for (const auto& step : path) {
        SearchNode& node = arena_[static_cast<std::size_t>(step.node)];
        SearchNode::Edge& edge = node.edges[step.edge_index];
        ++edge.visits;
        ++node.total_visits;
        edge.max_reward = std::max(edge.max_reward, reward);
        if (cfg_.validate_invariants) {
            const double qhat = r_max_ > 0.0 ? edge.max_reward / r_max_ : 0.0;
            if (qhat < 0.0 || qhat > 1.0 + 1e-12) ++stats_.invariant_violations;
        }
    }
}

void SplSearch::step_episode() {
    ++episode_;
    std::vector<PathStep> path;
    const int reached = select(path);
    SearchNode& node = arena_[static_cast<std::size_t>(reached)];

    if (node.state.complete()) {
        backpropagate(path, reward_of(node.state.traversal));
    } else if (node.state.step() >= cfg_.t_max) {
        backpropagate(path, 0.0);
    } else {
        const int child = expand(reached, path);
        const DerivationState& child_state = arena_[static_cast<std::size_t>(child)].state;
        if (child_state.complete()) {
            // completing expansion finishes the episode without simulation
            backpropagate(path, reward_of(child_state.traversal));
        } else {
            backpropagate(path, simulate(child_state, nullptr));
        }
    }

    if (cfg_.transplant.interval_episodes > 0 &&
        episode_ % cfg_.transplant.interval_episodes == 0) {
        transplant_modules(episode_);
        if (cfg_.transplant.reset_tree_on_refresh) {
            arena_.clear();
            make_node(DerivationState::fresh(grammar_));
        }
    }
    if (cfg_.checkpoint_every > 0 && episode_ % cfg_.checkpoint_every == 0)
        write_checkpoint(episode_);

    trace_.push_back(best_reward_);
    if (cfg_.stop_at_rmse >= 0.0 && best_rmse_ <= cfg_.stop_at_rmse) stopped_early_ = true;
}

void SplSearch::transplant_modules(int episode) {
    if (module_candidates_.empty()) {
        completion_rewards_.clear();
        return;
    }

    double threshold = cfg_.transplant.min_reward_to_transplant;
    if (threshold <= 0.0) {
        // default rule: 90th percentile of completion rewards seen since the
        // previous transplantation
        std::vector<double> rewards = completion_rewards_;
        std::sort(rewards.begin(), rewards.end());
        const auto idx = static_cast<std::size_t>(0.9 * static_cast<double>(rewards.size()));
        threshold = rewards[std::min(idx, rewards.size() - 1)];
    }

    const double progress =
        cfg_.episodes > 1 ? static_cast<double>(episode) / static_cast<double>(cfg_.episodes) : 1.0;
    const int size_cap = cfg_.transplant.max_module_size_start +
                         static_cast<int>(std::lround(
                             progress * (cfg_.transplant.max_module_size_end -
                                         cfg_.transplant.max_module_size_start)));

    // flatten a traversal to base rules only (nested modules expand in place)
    auto flatten = [&](const std::vector<RuleId>& traversal) {
        std::vector<RuleId> flat;
        flat.reserve(traversal.size());
        for (RuleId id : traversal) {
            const ProductionRule& r = grammar_.rule(id);
            if (r.source_traversal.empty())
                flat.push_back(id);
            else
                flat.insert(flat.end(), r.source_traversal.begin(), r.source_traversal.end());
        }
        return flat;
    };

    // pre-order segment length of the sub-derivation rooted at position i
    auto segment_length = [&](const std::vector<RuleId>& flat, std::size_t i) {
        int need = 1;
        std::size_t j = i;
        while (need > 0 && j < flat.size()) {
            need += grammar_.rule(flat[j]).arity - 1;
            ++j;
        }
        return j - i;
    };

    // a high-reward complete tree contributes every cap-sized sub-derivation
    // as a module candidate (divide and conquer: big discoveries seed their
    // building blocks into the grammar)
    struct NewModule {
        std::vector<RuleId> flat;
        double reward;
        std::uint64_t parent;
    };
    std::vector<NewModule> fresh;
    std::vector<std::string> seen;
    {
        // per parent: its cap-sized sub-derivations, longest first (most
        // structure per pool slot); parents visited round-robin in reward
        // order so one dominant tree cannot monopolize the pool
        struct ParentSegments {
            std::vector<std::vector<RuleId>> segments;
            double reward;
            std::uint64_t key;
        };
        std::vector<ParentSegments> parents;
        constexpr std::size_t kMaxParents = 24;
        for (const auto& cand : module_candidates_) {
            if (cand.reward < threshold) break;  // candidates are best-first
            if (parents.size() >= kMaxParents) break;
            std::vector<RuleId> flat = flatten(cand.traversal);
            ParentSegments ps;
            ps.reward = cand.reward;
            ps.key = hash_sequence(flat);
            for (std::size_t i = 0; i < flat.size(); ++i) {
                const std::size_t len = segment_length(flat, i);
                if (len < 2 || static_cast<int>(len) > size_cap) continue;
                ps.segments.emplace_back(flat.begin() + static_cast<std::ptrdiff_t>(i),
                                         flat.begin() + static_cast<std::ptrdiff_t>(i + len));
            }
            std::stable_sort(ps.segments.begin(), ps.segments.end(),
                             [](const auto& a, const auto& b) { return a.size() > b.size(); });
            if (!ps.segments.empty()) parents.push_back(std::move(ps));
        }
        for (std::size_t round = 0; !parents.empty(); ++round) {
            bool any = false;
            for (const auto& ps : parents) {
                if (round >= ps.segments.size()) continue;
                any = true;
                const auto& segment = ps.segments[round];
                ExpressionTree tree = build_expression(grammar_, segment);
                std::string key = commutative_key(simplify(tree));
                key += '@';
                key += grammar_.symbol(grammar_.rule(segment.front()).lhs).name;
                if (std::find(seen.begin(), seen.end(), key) != seen.end()) continue;
                seen.push_back(key);
                fresh.push_back({segment, ps.reward, ps.key});
            }
            if (!any || fresh.size() > 4 * static_cast<std::size_t>(cfg_.transplant.pool_cap))
                break;
        }
    }

    // existing pool rules compete with the new candidates on recorded reward
    std::vector<std::string> pool_keys;
    for (const auto& r : grammar_.augmented_rules()) {
        std::string key = commutative_key(simplify(build_expression(grammar_, r.source_traversal)));
        key += '@';
        key += grammar_.symbol(r.lhs).name;
        pool_keys.push_back(std::move(key));
    }
    struct PoolEntry {
        RuleId id;  // -1 for a fresh module
        std::size_t fresh_index = 0;
        double reward;
        std::uint64_t parent;
    };
    std::vector<PoolEntry> ranked;
    for (const auto& r : grammar_.augmented_rules())
        ranked.push_back({r.id, 0, r.recorded_reward, hash_sequence(r.source_traversal)});
    for (std::size_t i = 0; i < fresh.size(); ++i) {
        const std::string& key = seen[i];
        bool dup = false;
        for (const auto& pk : pool_keys)
            if (pk == key) dup = true;
        if (!dup) ranked.push_back({-1, i, fresh[i].reward, fresh[i].parent});
    }
    std::stable_sort(ranked.begin(), ranked.end(),
                     [](const PoolEntry& a, const PoolEntry& b) { return a.reward > b.reward; });

    // at most two pool slots per originating tree keeps the pool diverse
    bool pool_changed = false;
    std::vector<RuleId> keep;
    std::vector<std::pair<std::uint64_t, int>> parent_use;
    for (const auto& entry : ranked) {
        if (keep.size() >= static_cast<std::size_t>(cfg_.transplant.pool_cap)) break;
        int* count = nullptr;
        for (auto& [p, c] : parent_use)
            if (p == entry.parent) count = &c;
        if (!count) {
            parent_use.emplace_back(entry.parent, 0);
            count = &parent_use.back().second;
        }
        if (*count >= 2) continue;
        ++*count;
        if (entry.id >= 0) {
            keep.push_back(entry.id);
            continue;
        }
        const auto& mod = fresh[entry.fresh_index];
        ProductionRule rule = make_module_rule(grammar_, mod.flat);
        rule.recorded_reward = mod.reward;
        keep.push_back(grammar_.add_augmented(std::move(rule)));
        pool_changed = true;
    }
    if (pool_changed || keep.size() != grammar_.augmented_rules().size()) {
        grammar_.set_augmented_pool(std::move(keep));
        ++stats_.transplant_events;
    }
    stats_.pool_size = grammar_.augmented_rules().size();

    completion_rewards_.clear();
    module_candidates_.clear();
}

bool SplSearch::visit_counts_consistent() const {
    for (const auto& node : arena_) {
        int sum = 0;
        for (const auto& e : node.edges) sum += e.visits;
        if (sum != node.total_visits) return false;
    }
    return true;
}

void SplSearch::write_checkpoint(int episode) const {
    if (cfg_.checkpoint_path.empty()) return;
    KvDoc doc;
    doc.add_int("episode", episode);
    doc.add_double("r_max", r_max_);
    doc.add_double("best_reward", best_reward_);
    if (!best_traversal_.empty()) {
        ExpressionTree tree = build_expression(grammar_, best_traversal_);
        doc.add("best_expression", render(simplify(tree), RenderStyle::Canonical));
    }
    doc.add_int("tree_nodes", static_cast<std::int64_t>(arena_.size()));
    doc.add_int("root_visits", arena_[0].total_visits);
    for (const auto& r : grammar_.augmented_rules())
        doc.add("pool_rule", r.text + " | reward=" + format_double(r.recorded_reward) +
                                 " | id=" + std::to_string(r.id));
    doc.save(cfg_.checkpoint_path);
}

DiscoveryResult SplSearch::finalize() {
    DiscoveryResult out;
    out.reward_trace = trace_;
    out.best_reward = best_reward_;
    out.global_max_reward = r_max_;
    out.episode_found = episode_found_;
    out.stats = stats_;
    out.stats.episodes_run = static_cast<std::uint64_t>(episode_);
    out.stats.tree_nodes = arena_.size();
    out.stats.pool_size = grammar_.augmented_rules().size();
    if (cfg_.validate_invariants && !visit_counts_consistent()) ++out.stats.invariant_violations;

    if (best_traversal_.empty()) return out;  // nothing completed

    BuildOptions bopts;
    bopts.count_module_internals = cfg_.count_module_internals;
    ExpressionTree tree = build_expression(grammar_, best_traversal_, bopts);
    ExpressionTree simplified = cfg_.simplify_before_eval ? simplify(tree) : tree;
    out.best_n_rules = tree.n_rules();

    if (simplified.constant_count() > 0) {
        FitOptions fopts;
        fopts.fast = false;
        fopts.constant_lo = cfg_.constant_lo;
        fopts.constant_hi = cfg_.constant_hi;
        fopts.seed = hash_sequence(best_traversal_, fit_salt_);
        FitResult fit = fit_constants(simplified, data_.Y, data_.target, fopts);
        out.constants = fit.constants;
        out.best_rmse = fit.rmse;
    } else {
        out.best_rmse = rmse_of(simplified, data_.Y, data_.target);
    }
    out.tree = simplified;
    out.expression_raw = render(simplified, RenderStyle::Canonical);
    out.expression = render(simplified, RenderStyle::Canonical, out.constants);
    return out;
}

DiscoveryResult SplSearch::run() {
    const auto t0 = std::chrono::steady_clock::now();
    for (int e = 0; e < cfg_.episodes && !stopped_early_; ++e) step_episode();
    DiscoveryResult out = finalize();
    out.stats.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return out;
}

DiscoveryResult run_discovery(Grammar& g, const Dataset& data, const SearchConfig& cfg) {
    Dataset aligned = align_dataset(g, data);
    SplSearch search(g, aligned, cfg);
    return search.run();
}

}  // namespace spl
