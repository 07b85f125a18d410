#include "spl/expr.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>

#include "spl/errors.hpp"
#include "spl/kvdoc.hpp"

namespace spl {

using Node = ExpressionTree::Node;
using Kind = ExpressionTree::Node::Kind;
using Instr = ExpressionTree::Instr;

ExpressionTree::ExpressionTree(std::vector<Node> nodes, int root, int n_rules,
                               std::vector<std::string> var_names)
    : nodes_(std::move(nodes)), root_(root), n_rules_(n_rules),
      var_names_(std::move(var_names)) {
    int max_slot = -1;
    for (const auto& n : nodes_)
        if (n.kind == Kind::ConstSlot) max_slot = std::max(max_slot, n.const_slot);
    constant_count_ = max_slot + 1;
    compile();
}

void ExpressionTree::compile() {
    program_.clear();
    stack_need_ = 0;
    if (root_ < 0) return;
    // iterative post-order emit
    struct Frame {
        int node;
        int stage;
    };
    std::vector<Frame> stack{{root_, 0}};
    while (!stack.empty()) {
        auto [node, stage] = stack.back();
        stack.pop_back();
        const Node& n = nodes_[node];
        switch (n.kind) {
            case Kind::Var:
                program_.push_back({Instr::Code::PushVar, Op::Leaf, n.var_index, 0.0});
                break;
            case Kind::Literal:
                program_.push_back({Instr::Code::PushLit, Op::Leaf, 0, n.literal});
                break;
            case Kind::ConstSlot:
                program_.push_back({Instr::Code::PushConst, Op::Leaf, n.const_slot, 0.0});
                break;
            case Kind::Unary:
                if (stage == 0) {
                    stack.push_back({node, 1});
                    stack.push_back({n.child[0], 0});
                    continue;
                }
                program_.push_back({Instr::Code::Unary, n.op, 0, 0.0});
                break;
            case Kind::Binary:
                if (stage == 0) {
                    stack.push_back({node, 1});
                    stack.push_back({n.child[1], 0});
                    stack.push_back({n.child[0], 0});
                    continue;
                }
                program_.push_back({Instr::Code::Binary, n.op, 0, 0.0});
                break;
        }
    }
    // simulate stack depth
    int cur = 0;
    for (const auto& ins : program_) {
        switch (ins.code) {
            case Instr::Code::PushVar:
            case Instr::Code::PushLit:
            case Instr::Code::PushConst:
                ++cur;
                break;
            case Instr::Code::Unary:
                break;
            case Instr::Code::Binary:
                --cur;
                break;
        }
        stack_need_ = std::max(stack_need_, cur);
    }
}

// ---------------------------------------------------------------------------
// build_expression
// ---------------------------------------------------------------------------

namespace {

struct Builder {
    const Grammar& g;
    const std::vector<RuleId>& traversal;
    const BuildOptions& opts;
    std::size_t cursor = 0;
    std::vector<Node> nodes;
    int next_slot = 0;
    int n_rules = 0;

    int instantiate(const RuleTemplate& t, int tnode) {
        const auto& tn = t.nodes[tnode];
        if (tn.is_symbol) {
            const Symbol& sym = g.symbol(tn.symbol);
            switch (sym.kind) {
                case SymbolKind::Nonterminal:
                    return expand();
                case SymbolKind::Variable: {
                    Node n;
                    n.kind = Kind::Var;
                    n.var_index = sym.var_index;
                    nodes.push_back(n);
                    return static_cast<int>(nodes.size()) - 1;
                }
                case SymbolKind::Literal: {
                    Node n;
                    n.kind = Kind::Literal;
                    n.literal = sym.literal_value;
                    nodes.push_back(n);
                    return static_cast<int>(nodes.size()) - 1;
                }
                case SymbolKind::ConstPlaceholder: {
                    Node n;
                    n.kind = Kind::ConstSlot;
                    n.const_slot = next_slot++;
                    nodes.push_back(n);
                    return static_cast<int>(nodes.size()) - 1;
                }
            }
        }
        int left = instantiate(t, tn.child[0]);
        int right = tn.child[1] >= 0 ? instantiate(t, tn.child[1]) : -1;
        Node n;
        n.kind = right >= 0 ? Kind::Binary : Kind::Unary;
        n.op = tn.op;
        n.child[0] = left;
        n.child[1] = right;
        nodes.push_back(n);
        return static_cast<int>(nodes.size()) - 1;
    }

    int expand() {
        if (cursor >= traversal.size())
            throw ContractError("build_expression: traversal is incomplete");
        const ProductionRule& r = g.rule(traversal[cursor++]);
        n_rules += (opts.count_module_internals && r.flattened_size > 0) ? r.flattened_size : 1;
        return instantiate(r.rhs, r.rhs.root);
    }
};

}  // namespace

ExpressionTree build_expression(const Grammar& g, const std::vector<RuleId>& traversal,
                                const BuildOptions& opts) {
    Builder b{g, traversal, opts};
    int root = b.expand();
    if (b.cursor != traversal.size())
        throw ContractError("build_expression: traversal has trailing rules");
    return ExpressionTree(std::move(b.nodes), root, b.n_rules, g.variable_names());
}

// ---------------------------------------------------------------------------
// evaluation
// ---------------------------------------------------------------------------

namespace {

inline double apply_unary(Op op, double a) {
    switch (op) {
        case Op::Sin: return std::sin(a);
        case Op::Cos: return std::cos(a);
        case Op::Exp: return std::exp(a);
        case Op::Log: return std::log(a);
        case Op::Sqrt: return std::sqrt(a);
        case Op::Cosh: return std::cosh(a);
        case Op::Sign: return a > 0.0 ? 1.0 : (a < 0.0 ? -1.0 : 0.0);
        default: return std::numeric_limits<double>::quiet_NaN();
    }
}

inline double apply_binary(Op op, double a, double b) {
    switch (op) {
        case Op::Add: return a + b;
        case Op::Sub: return a - b;
        case Op::Mul: return a * b;
        case Op::Div: return a / b;
        case Op::Pow: return std::pow(a, b);
        default: return std::numeric_limits<double>::quiet_NaN();
    }
}

}  // namespace

bool evaluate_into(const ExpressionTree& t, const DataMatrix& Y,
                   std::span<const double> constants, std::vector<double>& out) {
    const std::size_t n = Y.num_points();
    out.resize(n);
    if (t.empty()) throw ContractError("evaluate on empty expression");
    if (t.constant_count() > 0 &&
        constants.size() != static_cast<std::size_t>(t.constant_count()))
        throw ContractError("evaluate: expected " + std::to_string(t.constant_count()) +
                            " constants, got " + std::to_string(constants.size()));
    for (const auto& node : t.nodes())
        if (node.kind == Kind::Var && node.var_index >= static_cast<int>(Y.num_vars()))
            throw ContractError("evaluate: variable index out of range");

    const auto& prog = t.program();
    double stack[64];
    const bool big = t.stack_need() > 60;
    std::vector<double> big_stack;
    if (big) big_stack.resize(static_cast<std::size_t>(t.stack_need()) + 4);
    double* sp_base = big ? big_stack.data() : stack;

    for (std::size_t j = 0; j < n; ++j) {
        double* sp = sp_base;
        for (const auto& ins : prog) {
            switch (ins.code) {
                case Instr::Code::PushVar:
                    *sp++ = Y.rows[static_cast<std::size_t>(ins.index)][j];
                    break;
                case Instr::Code::PushLit:
                    *sp++ = ins.literal;
                    break;
                case Instr::Code::PushConst:
                    *sp++ = constants[static_cast<std::size_t>(ins.index)];
                    break;
                case Instr::Code::Unary: {
                    double v = apply_unary(ins.op, sp[-1]);
                    if (!std::isfinite(v)) return false;
                    sp[-1] = v;
                    break;
                }
                case Instr::Code::Binary: {
                    double v = apply_binary(ins.op, sp[-2], sp[-1]);
                    if (!std::isfinite(v)) return false;
                    --sp;
                    sp[-1] = v;
                    break;
                }
            }
        }
        out[j] = sp_base[0];
    }
    return true;
}

EvalResult evaluate(const ExpressionTree& t, const DataMatrix& Y,
                    std::span<const double> constants) {
    EvalResult r;
    r.valid = evaluate_into(t, Y, constants, r.values);
    return r;
}

double evaluate_point(const ExpressionTree& t, std::span<const double> point,
                      std::span<const double> constants) {
    DataMatrix Y;
    Y.rows.reserve(point.size());
    for (double v : point) Y.rows.push_back({v});
    std::vector<double> out;
    // a non-finite value is the signal here, so bypass the validity flag
    const auto& prog = t.program();
    double stack[64];
    std::vector<double> big_stack;
    double* sp_base = stack;
    if (t.stack_need() > 60) {
        big_stack.resize(static_cast<std::size_t>(t.stack_need()) + 4);
        sp_base = big_stack.data();
    }
    double* sp = sp_base;
    for (const auto& ins : prog) {
        switch (ins.code) {
            case Instr::Code::PushVar:
                *sp++ = point[static_cast<std::size_t>(ins.index)];
                break;
            case Instr::Code::PushLit:
                *sp++ = ins.literal;
                break;
            case Instr::Code::PushConst:
                *sp++ = constants[static_cast<std::size_t>(ins.index)];
                break;
            case Instr::Code::Unary:
                sp[-1] = apply_unary(ins.op, sp[-1]);
                break;
            case Instr::Code::Binary: {
                double v = apply_binary(ins.op, sp[-2], sp[-1]);
                --sp;
                sp[-1] = v;
                break;
            }
        }
    }
    return sp_base[0];
}

// ---------------------------------------------------------------------------
// simplify
// ---------------------------------------------------------------------------

namespace {

bool subtree_equal(const std::vector<Node>& a, int ia, const std::vector<Node>& b, int ib) {
    const Node& x = a[ia];
    const Node& y = b[ib];
    if (x.kind != y.kind) return false;
    switch (x.kind) {
        case Kind::Var: return x.var_index == y.var_index;
        case Kind::Literal: return x.literal == y.literal;
        case Kind::ConstSlot: return x.const_slot == y.const_slot;
        case Kind::Unary:
            return x.op == y.op && subtree_equal(a, x.child[0], b, y.child[0]);
        case Kind::Binary:
            return x.op == y.op && subtree_equal(a, x.child[0], b, y.child[0]) &&
                   subtree_equal(a, x.child[1], b, y.child[1]);
    }
    return false;
}

struct Rewriter {
    std::vector<Node> out;
    bool changed = false;

    int push(Node n) {
        out.push_back(n);
        return static_cast<int>(out.size()) - 1;
    }

    int lit(double v) {
        Node n;
        n.kind = Kind::Literal;
        n.literal = v;
        return push(n);
    }

    int fresh_slot() {
        Node n;
        n.kind = Kind::ConstSlot;
        n.const_slot = -1;  // renumbered afterwards
        return push(n);
    }

    bool is_lit(int i, double v) const {
        return out[i].kind == Kind::Literal && out[i].literal == v;
    }
    bool is_lit(int i) const { return out[i].kind == Kind::Literal; }
    bool is_slot(int i) const { return out[i].kind == Kind::ConstSlot; }

    int mk_unary(Op op, int a) {
        if (is_lit(a)) {
            double v = apply_unary(op, out[a].literal);
            if (std::isfinite(v)) {
                changed = true;
                return lit(v);
            }
        }
        Node n;
        n.kind = Kind::Unary;
        n.op = op;
        n.child[0] = a;
        return push(n);
    }

    int mk_binary(Op op, int a, int b) {
        // literal folding
        if (is_lit(a) && is_lit(b)) {
            double v = apply_binary(op, out[a].literal, out[b].literal);
            if (std::isfinite(v)) {
                changed = true;
                return lit(v);
            }
        }
        switch (op) {
            case Op::Add:
                if (is_lit(a, 0.0)) { changed = true; return b; }
                if (is_lit(b, 0.0)) { changed = true; return a; }
                if (is_slot(a) && (is_slot(b) || is_lit(b))) { changed = true; return fresh_slot(); }
                if (is_lit(a) && is_slot(b)) { changed = true; return fresh_slot(); }
                break;
            case Op::Sub:
                if (is_lit(b, 0.0)) { changed = true; return a; }
                if (is_slot(a) && (is_slot(b) || is_lit(b))) { changed = true; return fresh_slot(); }
                if (is_lit(a) && is_slot(b)) { changed = true; return fresh_slot(); }
                break;
            case Op::Mul:
                if (is_lit(a, 1.0)) { changed = true; return b; }
                if (is_lit(b, 1.0)) { changed = true; return a; }
                if (is_lit(a, 0.0) || is_lit(b, 0.0)) { changed = true; return lit(0.0); }
                if (is_slot(a) && (is_slot(b) || is_lit(b))) { changed = true; return fresh_slot(); }
                if (is_lit(a) && is_slot(b)) { changed = true; return fresh_slot(); }
                break;
            case Op::Div:
                if (is_lit(b, 1.0)) { changed = true; return a; }
                if (is_lit(a, 0.0)) { changed = true; return lit(0.0); }
                if (is_slot(a) && is_slot(b)) { changed = true; return fresh_slot(); }
                if (is_slot(a) && is_lit(b) && out[b].literal != 0.0) {
                    changed = true;
                    return fresh_slot();
                }
                break;
            case Op::Pow:
                if (is_lit(b, 1.0)) { changed = true; return a; }
                if (is_lit(b, 0.0)) { changed = true; return lit(1.0); }
                if (is_lit(a, 1.0)) { changed = true; return lit(1.0); }
                break;
            default:
                break;
        }
        Node n;
        n.kind = Kind::Binary;
        n.op = op;
        n.child[0] = a;
        n.child[1] = b;
        return push(n);
    }

    int rewrite(const std::vector<Node>& src, int i) {
        const Node& n = src[i];
        switch (n.kind) {
            case Kind::Var:
            case Kind::Literal:
            case Kind::ConstSlot:
                return push(n);
            case Kind::Unary:
                return mk_unary(n.op, rewrite(src, n.child[0]));
            case Kind::Binary: {
                int a = rewrite(src, n.child[0]);
                int b = rewrite(src, n.child[1]);
                return mk_binary(n.op, a, b);
            }
        }
        return -1;
    }
};

/// Renumber constant slots densely in left-to-right (in-order) appearance.
void renumber_slots(std::vector<Node>& nodes, int root) {
    int next = 0;
    struct Walk {
        std::vector<Node>& nodes;
        int& next;
        void go(int i) {
            Node& n = nodes[i];
            switch (n.kind) {
                case Kind::ConstSlot:
                    n.const_slot = next++;
                    break;
                case Kind::Unary:
                    go(n.child[0]);
                    break;
                case Kind::Binary:
                    go(n.child[0]);
                    go(n.child[1]);
                    break;
                default:
                    break;
            }
        }
    };
    Walk{nodes, next}.go(root);
}

/// Drop unreachable nodes, keeping in-order slot numbering intact.
std::pair<std::vector<Node>, int> compact(const std::vector<Node>& nodes, int root) {
    std::vector<Node> out;
    struct Copy {
        const std::vector<Node>& src;
        std::vector<Node>& dst;
        int go(int i) {
            Node n = src[i];
            if (n.kind == Kind::Unary) {
                n.child[0] = go(n.child[0]);
            } else if (n.kind == Kind::Binary) {
                n.child[0] = go(n.child[0]);
                n.child[1] = go(n.child[1]);
            }
            dst.push_back(n);
            return static_cast<int>(dst.size()) - 1;
        }
    };
    int new_root = Copy{nodes, out}.go(root);
    return {std::move(out), new_root};
}

}  // namespace

ExpressionTree simplify(const ExpressionTree& t) {
    if (t.empty()) return t;
    std::vector<Node> cur = t.nodes();
    int root = t.root();
    for (int pass = 0; pass < 20; ++pass) {
        Rewriter rw;
        int new_root = rw.rewrite(cur, root);
        auto [compacted, croot] = compact(rw.out, new_root);
        cur = std::move(compacted);
        root = croot;
        if (!rw.changed) break;
    }
    renumber_slots(cur, root);
    return ExpressionTree(std::move(cur), root, t.n_rules(), t.var_names());
}

// ---------------------------------------------------------------------------
// rendering
// ---------------------------------------------------------------------------

namespace {

struct Renderer {
    const ExpressionTree& t;
    std::span<const double> constants;
    bool canonical;

    std::string var_name(int index) const {
        if (index < static_cast<int>(t.var_names().size())) return t.var_names()[index];
        return "x" + std::to_string(index);
    }

    std::string leaf(const Node& n) const {
        switch (n.kind) {
            case Kind::Var: return var_name(n.var_index);
            case Kind::Literal: return format_sig(n.literal, 6);
            case Kind::ConstSlot:
                if (!constants.empty() && n.const_slot < static_cast<int>(constants.size()))
                    return format_sig(constants[static_cast<std::size_t>(n.const_slot)], 6);
                return "C" + std::to_string(n.const_slot);
            default: return "?";
        }
    }

    // raw: every binary subexpression except the root is parenthesized
    std::string raw(int i, bool is_root) const {
        const Node& n = t.nodes()[i];
        switch (n.kind) {
            case Kind::Var:
            case Kind::Literal:
            case Kind::ConstSlot:
                return leaf(n);
            case Kind::Unary:
                return std::string(op_symbol(n.op)) + "(" + raw(n.child[0], true) + ")";
            case Kind::Binary: {
                std::string s =
                    raw(n.child[0], false) + op_symbol(n.op) + raw(n.child[1], false);
                return is_root ? s : "(" + s + ")";
            }
        }
        return "?";
    }

    static const char* op_symbol(Op op) {
        switch (op) {
            case Op::Add: return "+";
            case Op::Sub: return "-";
            case Op::Mul: return "*";
            case Op::Div: return "/";
            case Op::Pow: return "^";
            case Op::Sin: return "sin";
            case Op::Cos: return "cos";
            case Op::Exp: return "exp";
            case Op::Log: return "log";
            case Op::Sqrt: return "sqrt";
            case Op::Cosh: return "cosh";
            case Op::Sign: return "sign";
            default: return "?";
        }
    }

    static int precedence(Op op) {
        switch (op) {
            case Op::Add:
            case Op::Sub: return 1;
            case Op::Mul:
            case Op::Div: return 2;
            case Op::Pow: return 3;
            default: return 4;
        }
    }

    void flatten_mul(int i, std::vector<int>& factors) const {
        const Node& n = t.nodes()[i];
        if (n.kind == Kind::Binary && n.op == Op::Mul) {
            flatten_mul(n.child[0], factors);
            flatten_mul(n.child[1], factors);
        } else {
            factors.push_back(i);
        }
    }

    /// `fenced_right` marks the right operand of a non-associative operator
    /// (sub, div): equal precedence there still needs parentheses.
    std::string pretty(int i, int parent_prec, bool fenced_right) const {
        const Node& n = t.nodes()[i];
        switch (n.kind) {
            case Kind::Var:
            case Kind::Literal:
            case Kind::ConstSlot:
                return leaf(n);
            case Kind::Unary:
                return std::string(op_symbol(n.op)) + "(" + pretty(n.child[0], 0, false) + ")";
            case Kind::Binary:
                break;
        }
        const int prec = precedence(n.op);
        std::string s;
        if (n.op == Op::Mul) {
            // group repeated structurally-equal factors into powers
            std::vector<int> factors;
            flatten_mul(i, factors);
            std::vector<std::pair<int, int>> grouped;  // node, count
            for (int f : factors) {
                bool merged = false;
                for (auto& [gnode, count] : grouped) {
                    if (subtree_equal(t.nodes(), f, t.nodes(), gnode)) {
                        ++count;
                        merged = true;
                        break;
                    }
                }
                if (!merged) grouped.emplace_back(f, 1);
            }
            bool first = true;
            for (const auto& [gnode, count] : grouped) {
                if (!first) s += "*";
                first = false;
                std::string base = pretty(gnode, count > 1 ? 3 : prec, false);
                if (count > 1)
                    s += base + "^" + std::to_string(count);
                else
                    s += base;
            }
        } else if (n.op == Op::Add || n.op == Op::Sub) {
            std::string lhs = pretty(n.child[0], prec, false);
            std::string rhs = pretty(n.child[1], prec, n.op == Op::Sub);
            const char* join = n.op == Op::Add ? " + " : " - ";
            if (n.op == Op::Add && !rhs.empty() && rhs[0] == '-') {
                join = " - ";
                rhs.erase(0, 1);
            }
            s = lhs + join + rhs;
        } else if (n.op == Op::Div) {
            s = pretty(n.child[0], prec, false) + "/" + pretty(n.child[1], prec, true);
        } else {  // pow, right associative
            s = pretty(n.child[0], prec + 1, false) + "^" + pretty(n.child[1], prec, false);
        }
        const bool need_parens = prec < parent_prec || (prec == parent_prec && fenced_right);
        return need_parens ? "(" + s + ")" : s;
    }
};

}  // namespace

std::string render(const ExpressionTree& t, RenderStyle style, std::span<const double> constants) {
    if (t.empty()) return "";
    Renderer r{t, constants, style == RenderStyle::Canonical};
    if (style == RenderStyle::Raw) return r.raw(t.root(), true);
    return r.pretty(t.root(), 0, false);
}

ExpressionTree substitute_constants(const ExpressionTree& t, std::span<const double> constants) {
    if (static_cast<int>(constants.size()) != t.constant_count())
        throw ContractError("substitute_constants: wrong constant count");
    std::vector<Node> nodes = t.nodes();
    for (auto& n : nodes) {
        if (n.kind == Kind::ConstSlot) {
            n.kind = Kind::Literal;
            n.literal = constants[static_cast<std::size_t>(n.const_slot)];
            n.const_slot = -1;
        }
    }
    return ExpressionTree(std::move(nodes), t.root(), t.n_rules(), t.var_names());
}

namespace {

void flatten_commutative(const ExpressionTree& t, int i, Op op, std::vector<int>& out) {
    const Node& n = t.nodes()[static_cast<std::size_t>(i)];
    if (n.kind == Kind::Binary && n.op == op) {
        flatten_commutative(t, n.child[0], op, out);
        flatten_commutative(t, n.child[1], op, out);
    } else {
        out.push_back(i);
    }
}

std::string commutative_key_at(const ExpressionTree& t, int i) {
    const Node& n = t.nodes()[static_cast<std::size_t>(i)];
    switch (n.kind) {
        case Kind::Var:
            return "v" + std::to_string(n.var_index);
        case Kind::Literal:
            return format_sig(n.literal, 12);
        case Kind::ConstSlot:
            return "C";  // slots are interchangeable under refit
        case Kind::Unary:
            return std::string(op_name(n.op)) + "(" + commutative_key_at(t, n.child[0]) + ")";
        case Kind::Binary:
            break;
    }
    if (n.op == Op::Add || n.op == Op::Mul) {
        std::vector<int> operands;
        flatten_commutative(t, i, n.op, operands);
        std::vector<std::string> keys;
        keys.reserve(operands.size());
        for (int c : operands) keys.push_back(commutative_key_at(t, c));
        std::sort(keys.begin(), keys.end());
        std::string s = n.op == Op::Add ? "(+ " : "(* ";
        for (const auto& k : keys) {
            s += k;
            s += ' ';
        }
        s += ')';
        return s;
    }
    return "(" + std::string(op_name(n.op)) + " " + commutative_key_at(t, n.child[0]) + " " +
           commutative_key_at(t, n.child[1]) + ")";
}

}  // namespace

std::string commutative_key(const ExpressionTree& t) {
    if (t.empty()) return "";
    return commutative_key_at(t, t.root());
}

// ---------------------------------------------------------------------------
// equivalence
// ---------------------------------------------------------------------------

namespace {

double kronecker_alpha(std::size_t dim) {
    static const double primes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37};
    double s = std::sqrt(primes[dim % 12] + static_cast<double>(dim / 12));
    return s - std::floor(s);
}

}  // namespace

bool equivalent(const ExpressionTree& a, const ExpressionTree& b, const DomainSpec& domain,
                double tol) {
    if (a.constant_count() != 0 || b.constant_count() != 0)
        throw ContractError("equivalent: trees must have no unfitted constant slots");
    const int samples = std::max(domain.samples, 256);
    const std::size_t dims = domain.ranges.size();
    std::vector<double> point(dims);
    int valid_points = 0;
    double max_diff = 0.0;
    for (int k = 0; k < samples; ++k) {
        for (std::size_t d = 0; d < dims; ++d) {
            double frac = 0.5 + (k + 1) * kronecker_alpha(d);
            frac -= std::floor(frac);
            point[d] = domain.ranges[d].lo + (domain.ranges[d].hi - domain.ranges[d].lo) * frac;
        }
        double va = evaluate_point(a, point);
        double vb = evaluate_point(b, point);
        if (!std::isfinite(va) || !std::isfinite(vb)) continue;
        ++valid_points;
        max_diff = std::max(max_diff, std::abs(va - vb));
        if (max_diff >= tol) return false;
    }
    if (valid_points == 0)
        throw DataError("equivalent: no mutually valid sample in the given domain");
    return max_diff < tol;
}

// ---------------------------------------------------------------------------
// parsing ground-truth expressions
// ---------------------------------------------------------------------------

ExpressionTree parse_expression(const std::string& text,
                                const std::vector<std::string>& var_names) {
    ParsedExpr pe = parse_infix(text);
    std::vector<Node> nodes;
    nodes.reserve(pe.nodes.size());
    int next_slot = 0;

    struct Conv {
        const ParsedExpr& pe;
        const std::vector<std::string>& vars;
        std::vector<Node>& nodes;
        int& next_slot;
        const std::string& text;

        int go(int i) {
            const auto& pn = pe.nodes[i];
            Node n;
            if (pn.is_leaf) {
                auto it = std::find(vars.begin(), vars.end(), pn.leaf);
                if (it != vars.end()) {
                    n.kind = Kind::Var;
                    n.var_index = static_cast<int>(it - vars.begin());
                } else if (pn.leaf == "C") {
                    n.kind = Kind::ConstSlot;
                    n.const_slot = next_slot++;
                } else if (is_numeral(pn.leaf)) {
                    n.kind = Kind::Literal;
                    n.literal = std::strtod(pn.leaf.c_str(), nullptr);
                } else {
                    throw ConfigError("unknown identifier '" + pn.leaf + "' in: " + text);
                }
            } else {
                int a = go(pn.child[0]);
                int b = pn.child[1] >= 0 ? go(pn.child[1]) : -1;
                n.kind = b >= 0 ? Kind::Binary : Kind::Unary;
                n.op = pn.op;
                n.child[0] = a;
                n.child[1] = b;
            }
            nodes.push_back(n);
            return static_cast<int>(nodes.size()) - 1;
        }
    };

    int root = Conv{pe, var_names, nodes, next_slot, text}.go(pe.root);
    return ExpressionTree(std::move(nodes), root, static_cast<int>(nodes.size()), var_names);
}

}  // namespace spl
