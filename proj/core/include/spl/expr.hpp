#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "spl/dataset.hpp"
#include "spl/grammar.hpp"
#include "spl/parse.hpp"

namespace spl {

/// Evaluable expression tree. Immutable after construction; evaluation is
/// pure, so trees can be shared across threads freely.
class ExpressionTree {
  public:
    struct Node {
        enum class Kind { Unary, Binary, Var, Literal, ConstSlot };
        Kind kind;
        Op op = Op::Leaf;  // Unary/Binary only
        int child[2] = {-1, -1};
        int var_index = -1;
        double literal = 0.0;
        int const_slot = -1;
    };

    ExpressionTree() = default;
    ExpressionTree(std::vector<Node> nodes, int root, int n_rules,
                   std::vector<std::string> var_names = {});

    const std::vector<Node>& nodes() const { return nodes_; }
    int root() const { return root_; }
    bool empty() const { return root_ < 0; }
    const std::vector<std::string>& var_names() const { return var_names_; }

    /// Production rules in the deriving traversal (Eq-style parsimony count).
    int n_rules() const { return n_rules_; }
    int constant_count() const { return constant_count_; }
    /// Number of tree nodes (size sanity checks, reports).
    int node_count() const { return static_cast<int>(nodes_.size()); }

    // compiled postfix program, built once in the constructor
    struct Instr {
        enum class Code { PushVar, PushLit, PushConst, Unary, Binary };
        Code code;
        Op op = Op::Leaf;
        int index = 0;
        double literal = 0.0;
    };
    const std::vector<Instr>& program() const { return program_; }
    int stack_need() const { return stack_need_; }

  private:
    void compile();

    std::vector<Node> nodes_;
    int root_ = -1;
    int n_rules_ = 0;
    int constant_count_ = 0;
    std::vector<std::string> var_names_;
    std::vector<Instr> program_;
    int stack_need_ = 0;
};

struct EvalResult {
    std::vector<double> values;
    bool valid = false;
};

struct BuildOptions {
    /// When true, a transplanted module contributes its internal rule count
    /// to n_rules instead of counting as a single rule.
    bool count_module_internals = false;
};

/// Project a complete traversal into an expression tree. Constant
/// placeholders are numbered left to right. Throws ContractError when the
/// traversal does not end with an empty pending stack.
ExpressionTree build_expression(const Grammar& g, const std::vector<RuleId>& traversal,
                                const BuildOptions& opts = {});

/// Pointwise evaluation over the data matrix. Math-domain failures (division
/// by zero, log of a non-positive value, overflow to non-finite) flag the
/// result invalid instead of throwing.
EvalResult evaluate(const ExpressionTree& t, const DataMatrix& Y,
                    std::span<const double> constants = {});

/// Same, writing into a caller-owned buffer (hot path). Returns the validity flag.
bool evaluate_into(const ExpressionTree& t, const DataMatrix& Y,
                   std::span<const double> constants, std::vector<double>& out);

/// Evaluate at a single point (column vector of variable values).
double evaluate_point(const ExpressionTree& t, std::span<const double> point,
                      std::span<const double> constants = {});

/// Rewrite-rule simplification with a bounded fixpoint: literal folding,
/// identity elimination, merging of algebraically redundant constant slots
/// (C0+C1, C0*C1, constant +/-/*// literal). Slots are renumbered densely.
/// n_rules is preserved (parsimony counts the as-derived traversal).
ExpressionTree simplify(const ExpressionTree& t);

enum class RenderStyle {
    Raw,        // fully parenthesized, slots as C0,C1,...
    Canonical,  // precedence-aware, repeated products as powers
};

/// Deterministic infix rendering. When `constants` is nonempty, fitted values
/// are printed at 6 significant digits in place of the slot names.
std::string render(const ExpressionTree& t, RenderStyle style = RenderStyle::Canonical,
                   std::span<const double> constants = {});

/// Replace constant slots with fixed literal values.
ExpressionTree substitute_constants(const ExpressionTree& t, std::span<const double> constants);

/// Order-insensitive structural key: operands of +/* chains are sorted, so
/// commutative rearrangements of the same expression collide. Used to dedup
/// transplant modules; not a rendering.
std::string commutative_key(const ExpressionTree& t);

/// Per-variable sampling box for numeric equivalence checks.
struct DomainSpec {
    struct Range {
        double lo;
        double hi;
    };
    std::vector<Range> ranges;  // one per variable
    int samples = 256;
};

/// Numeric equivalence on >=`samples` quasi-random points: true iff the
/// maximum absolute difference is below `tol`, skipping points where either
/// side is non-finite. Throws DataError when no mutually valid point exists;
/// ContractError when either tree still has unfitted constant slots.
bool equivalent(const ExpressionTree& a, const ExpressionTree& b, const DomainSpec& domain,
                double tol = 1e-9);

/// Parse a ground-truth expression such as "x^3 + x^2 + x". Identifiers must
/// name a variable from `var_names`; "C" leaves become constant slots
/// (numbered in reading order); numerals become literals.
ExpressionTree parse_expression(const std::string& text,
                                const std::vector<std::string>& var_names);

}  // namespace spl
