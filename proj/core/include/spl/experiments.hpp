#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "spl/mcts.hpp"
#include "spl/numdata.hpp"
#include "spl/tasks.hpp"

namespace spl {

enum class SuccessRule {
    SymbolicEquivalence,  // numeric equivalence with the target on the test domain
    TestRmse,             // test RMSE below 1e-6 * RMS(test target)
};

struct RecoverySpec {
    std::string task_id;
    int trials = 20;
    bool desk_scale = true;
    std::uint64_t seed = 0;
    int jobs = 1;
    double noise_level = 0.0;
    int points_override = 0;     // 0 = task default
    int episodes_override = 0;   // 0 = task default for the scale
    std::optional<SuccessRule> rule_override;
    /// Stop a trial early once the train RMSE reaches (effectively) zero;
    /// recovery is judged on the final best expression either way.
    bool early_stop_on_exact_fit = true;
    // ablation switches
    bool disable_adaptive_scaling = false;
    bool disable_parsimony = false;
    bool disable_transplant = false;
};

struct TrialOutcome {
    int trial = 0;
    std::uint64_t seed = 0;
    bool success = false;
    double best_reward = 0.0;
    double train_rmse = 0.0;
    double test_rmse = 0.0;
    int n_rules = 0;
    int episode_found = -1;
    double seconds = 0.0;
    std::string expression;
};

struct RecoveryReport {
    std::string task_id;
    std::vector<TrialOutcome> trials;
    double recovery_rate = 0.0;

    int successes() const {
        int n = 0;
        for (const auto& t : trials) n += t.success ? 1 : 0;
        return n;
    }
};

/// Run `trials` independent seeded discoveries of the task's target and score
/// each against the success rule (equivalence for structure-only targets,
/// test-fit threshold when the target carries constants).
RecoveryReport run_recovery(const RecoverySpec& spec);

/// Noise x data-volume recovery grid on the "toy" target.
struct GridSpec {
    std::vector<double> noise_levels = {0.0, 0.02, 0.05, 0.10};
    std::vector<int> point_counts = {10, 20, 50, 100};
    int trials = 20;
    bool desk_scale = true;
    std::uint64_t seed = 0;
    int jobs = 1;
};

struct GridCell {
    double noise;
    int points;
    double recovery_rate;
};

std::vector<GridCell> run_grid(const GridSpec& spec);

// ---------------------------------------------------------------------------
// dynamics discovery (Lorenz)
// ---------------------------------------------------------------------------

struct LorenzSpec {
    LorenzSpec() {
        // pipeline tuning for coefficient reporting: a coarser grid keeps the
        // differentiation noise below the weakest term's contribution, and
        // filtered state observations stop product-term attenuation bias
        data.dt = 0.002;
        data.sg_window = 41;
        data.smooth_states_first = true;
        data.smooth_observations = true;
    }
    LorenzConfig data;
    int episodes = 1500;
    int trials = 1;
    std::uint64_t seed = 0;
    int jobs = 1;
    double eta = 0.98;
    int t_max = 50;
    int max_constants = 3;
    int sims_per_expansion = 50;
    int transplant_interval = 300;
};

struct LorenzDimensionResult {
    std::string name;  // "dx", "dy", "dz"
    std::string expression;
    std::set<std::string> support;        // extracted active monomials
    std::set<std::string> true_support;   // expected monomials
    bool support_exact = false;
    int false_positives = 0;
    std::vector<double> coefficients;      // aligned with true_support order
    std::vector<double> true_coefficients;
    double max_coeff_rel_error = 0.0;
    double train_rmse = 0.0;
};

struct LorenzTrialResult {
    std::uint64_t seed = 0;
    std::vector<LorenzDimensionResult> dims;
    bool all_support_exact = false;
};

struct LorenzReport {
    std::vector<LorenzTrialResult> trials;
    int trials_support_exact = 0;
};

LorenzReport run_lorenz(const LorenzSpec& spec);

/// Least-squares projection of a fitted expression onto the monomial basis of
/// total degree <= max_degree. Labels look like "1", "x", "x*z", "x^2*y".
struct PolyProjection {
    std::vector<std::string> labels;
    std::vector<double> coefficients;
    double residual_rms = 0.0;  // projection residual; large => not polynomial
    double value_rms = 0.0;
};

PolyProjection project_polynomial(const ExpressionTree& tree, std::span<const double> constants,
                                  const std::vector<std::string>& vars,
                                  const std::vector<std::pair<double, double>>& box,
                                  int max_degree, int samples = 512);

/// Active monomials of a projection: relative contribution above `threshold`.
std::set<std::string> extract_support(const PolyProjection& proj, double threshold = 1e-3);

// ---------------------------------------------------------------------------
// free-fall baselines
// ---------------------------------------------------------------------------

struct BaselineFit {
    int model_id = 0;
    std::string expression;        // with fitted constants
    std::vector<double> constants;
    double train_rmse = 0.0;
};

/// Fit one of the closed-form height models (1: cubic polynomial,
/// 2: c0+c1 t+c2 exp(c3 t), 3: c0+c1 log(cosh(c2 t))) to a (t, H) dataset.
BaselineFit fit_baseline_model(int model_id, const Dataset& train);

struct BalldropSpec {
    std::string data_dir;          // directory of per-ball CSVs (t,H)
    bool synthetic_fallback = false;
    double split_time = 2.0;       // train on t <= split_time
    int episodes = 6000;
    double eta = 0.9999;
    int t_max = 20;
    int max_constants = 4;
    std::uint64_t seed = 0;
};

struct BalldropRow {
    std::string ball;
    double mse_spl = 0.0;
    double mse_model1 = 0.0;
    double mse_model2 = 0.0;
    double mse_model3 = 0.0;
    std::string spl_expression;
};

struct BalldropReport {
    std::vector<BalldropRow> rows;
    std::vector<std::string> skipped;  // missing data notices
};

BalldropReport run_balldrop(const BalldropSpec& spec);

/// Synthetic drag fall: integrate h'' = -g + k*h'^2 from rest and sample at
/// `rate` Hz; the offline stand-in for the measured ball records.
Dataset make_drag_fall_dataset(double h0, double g, double k, double duration, double rate,
                               double noise_level, std::uint64_t seed);

/// Split a (t, H) dataset at `split_time` (train: t <= split, test: rest).
std::pair<Dataset, Dataset> split_by_time(const Dataset& full, double split_time);

// ---------------------------------------------------------------------------
// reports
// ---------------------------------------------------------------------------

void write_recovery_csv(const RecoveryReport& report, const std::string& path);
void write_grid_csv(const std::vector<GridCell>& cells, const std::string& path);
void write_lorenz_csv(const LorenzReport& report, const std::string& path);
void write_balldrop_csv(const BalldropReport& report, const std::string& path);

/// Run fn(0..count-1) on a small worker pool; results land in index order so
/// aggregation is deterministic regardless of the job count.
void parallel_for(int count, int jobs, const std::function<void(int)>& fn);

}  // namespace spl
