#pragma once

#include <optional>
#include <string>
#include <vector>

#include "spl/expr.hpp"
#include "spl/grammar.hpp"
#include "spl/mcts.hpp"
#include "spl/numdata.hpp"

namespace spl {

/// Grammar-level encodings of the benchmark argument constraints:
///   1 - trig arguments are single variables (or the constant placeholder)
///   2 - trig/log/root arguments are polynomials up to degree 3
///   3 - trig/log/root never nest inside one another
///   4 - small integer literals (1, 2) usable as leaves
/// Constraints are compiled into the grammar via dedicated argument
/// nonterminals, so valid_actions stays a pure table lookup.
struct BenchmarkTask {
    std::string id;           // "nguyen-1" .. "nguyen-12", "nguyen-1c" .., "toy"
    std::string target_text;  // ground truth, infix
    std::vector<std::string> vars;
    double sample_lo = -1.0;
    double sample_hi = 1.0;
    int points = 20;
    bool has_const = false;
    bool has_trig_exp = true;   // sin/cos/exp in the operator set
    bool has_log_sqrt = false;
    bool monomial_chain = true; // dedicated x^k chain nonterminal (see make_grammar)
    std::vector<int> constraints;

    // search hyperparameters at paper scale
    double eta = 0.9999;
    int t_max = 50;
    int episodes = 30000;
    int sims_per_expansion = 50;
    int transplant_interval = 10000;
    int module_size_end = 20;
    int pool_cap = 5;

    Grammar make_grammar() const;
    ExpressionTree target_tree() const;
    SamplingSpec sampling() const;
    SearchConfig search_config(bool desk_scale) const;
};

/// Every registered benchmark task (the 17 suite entries plus "toy").
const std::vector<BenchmarkTask>& benchmark_tasks();
const BenchmarkTask* find_task(const std::string& id);

/// Tasks of the criterion-style desk subset: nguyen-1, -2, -5, -6, -8.
std::vector<std::string> desk_subset();

/// Arithmetic grammar over the given variables with a constant placeholder
/// ({+,-,*,/} plus leaves); the dynamics-discovery search space.
Grammar make_arith_grammar(const std::vector<std::string>& vars, bool with_const = true,
                           std::size_t augmented_cap = 5);

/// Grammar for the ball-drop discovery: {+,-,*,/,exp,cosh,log} over time.
Grammar make_balldrop_grammar();

/// Maximum polynomial degree of the subtree at `node`, or nullopt when the
/// subtree is not a polynomial (division, pow, unary function). Constraint
/// soundness checks use this.
std::optional<int> polynomial_degree(const ExpressionTree& t, int node);

/// True when the tree violates constraint 3 (nested trig/log/root) or
/// constraint 2 (argument degree > 3) anywhere.
bool violates_argument_constraints(const ExpressionTree& t, int max_degree = 3);

}  // namespace spl
