#include "spl/tasks.hpp"

#include <algorithm>

#include "spl/errors.hpp"

namespace spl {

namespace {

bool has_constraint(const BenchmarkTask& t, int c) {
    return std::find(t.constraints.begin(), t.constraints.end(), c) != t.constraints.end();
}

}  // namespace

Grammar BenchmarkTask::make_grammar() const {
    GrammarBuilder b;
    b.start("A");
    const bool c1 = has_constraint(*this, 1);
    const bool c2 = has_constraint(*this, 2);
    const bool c4 = has_constraint(*this, 4);

    std::string nts = "A";
    if (monomial_chain) nts += " M";
    if (c1) nts += " V";
    if (c2) nts += " P W";
    b.nonterminal(nts);
    for (const auto& v : vars) b.variable(v);
    if (has_const) b.constant("C");
    if (c4 || c2) b.literal("1");
    if (c4) b.literal("2");

    b.rule("A", "A + A");
    b.rule("A", "A - A");
    b.rule("A", "A * A");
    b.rule("A", "A / A");
    if (monomial_chain) {
        // monomial sublanguage: x^k terms derive through a dedicated chain
        // nonterminal instead of k-deep binary products
        b.rule("A", "M");
        for (const auto& v : vars) b.rule("M", v + " * M");
        for (const auto& v : vars) b.rule("M", v);
    }

    // trig/log/root argument nonterminal per the constraint set
    const std::string arg = c1 ? "V" : (c2 ? "P" : "A");
    if (has_trig_exp) {
        b.rule("A", "sin(" + arg + ")");
        b.rule("A", "cos(" + arg + ")");
        b.rule("A", c1 ? "exp(" + arg + ")" : "exp(A)");
    }
    if (has_log_sqrt) {
        b.rule("A", "log(" + arg + ")");
        b.rule("A", "sqrt(" + arg + ")");
    }
    for (const auto& v : vars) b.rule("A", v);
    if (has_const) b.rule("A", "C");
    if (c4) {
        b.rule("A", "1");
        b.rule("A", "2");
    }

    if (c1) {
        for (const auto& v : vars) b.rule("V", v);
        if (has_const) b.rule("V", "C");
    }
    if (c2) {
        b.rule("P", "P + P");
        b.rule("P", "P - P");
        b.rule("P", "W");
        b.rule("P", "W * W");
        b.rule("P", "W * ( W * W )");
        b.rule("P", "1");
        if (has_const) {
            b.rule("P", "C");
            b.rule("P", "C * P");
        }
        for (const auto& v : vars) b.rule("W", v);
    }
    b.augmented_cap(static_cast<std::size_t>(pool_cap));
    return b.build();
}

ExpressionTree BenchmarkTask::target_tree() const { return parse_expression(target_text, vars); }

SamplingSpec BenchmarkTask::sampling() const {
    SamplingSpec spec;
    for (const auto& v : vars) spec.vars.push_back({v, sample_lo, sample_hi});
    spec.points = points;
    return spec;
}

SearchConfig BenchmarkTask::search_config(bool desk_scale) const {
    SearchConfig cfg;
    cfg.eta = eta;
    cfg.t_max = t_max;
    cfg.sims_per_expansion = sims_per_expansion;
    cfg.episodes = desk_scale ? std::max(episodes / 5, 1) : episodes;
    cfg.transplant.interval_episodes =
        desk_scale ? std::max(transplant_interval / 5, 1) : transplant_interval;
    cfg.transplant.max_module_size_end = module_size_end;
    cfg.transplant.pool_cap = pool_cap;
    return cfg;
}

const std::vector<BenchmarkTask>& benchmark_tasks() {
    static const std::vector<BenchmarkTask> tasks = [] {
        std::vector<BenchmarkTask> out;
        auto add = [&](std::string id, std::string target, std::vector<std::string> vars,
                       double lo, double hi, bool cst, bool logsqrt, std::vector<int> cons,
                       int episodes, int interval) {
            BenchmarkTask t;
            t.id = std::move(id);
            t.target_text = std::move(target);
            t.vars = std::move(vars);
            t.sample_lo = lo;
            t.sample_hi = hi;
            t.has_const = cst;
            t.has_log_sqrt = logsqrt;
            t.constraints = std::move(cons);
            t.episodes = episodes;
            t.transplant_interval = interval;
            out.push_back(std::move(t));
        };

        add("nguyen-1", "x^3 + x^2 + x", {"x"}, -1, 1, false, false, {1, 3}, 30000, 10000);
        add("nguyen-2", "x^4 + x^3 + x^2 + x", {"x"}, -1, 1, false, false, {1, 3}, 30000, 10000);
        add("nguyen-3", "x^5 + x^4 + x^3 + x^2 + x", {"x"}, -1, 1, false, false, {1, 3}, 60000,
            100000);
        add("nguyen-4", "x^6 + x^5 + x^4 + x^3 + x^2 + x", {"x"}, -1, 1, false, false, {1, 3},
            100000, 100000);
        add("nguyen-5", "sin(x^2)*cos(x) - 1", {"x"}, -1, 1, false, false, {2, 3}, 30000, 100000);
        add("nguyen-6", "sin(x^2) + sin(x + x^2)", {"x"}, -1, 1, false, false, {2, 3}, 30000,
            10000);
        add("nguyen-7", "log(x + 1) + log(x^2 + 1)", {"x"}, 0, 2, false, true, {2, 3}, 30000,
            5000);
        add("nguyen-8", "sqrt(x)", {"x"}, 0, 4, false, true, {}, 30000, 5000);
        add("nguyen-9", "sin(x) + sin(y^2)", {"x", "y"}, -1, 1, false, false, {2, 3, 4}, 30000,
            10000);
        add("nguyen-10", "2*sin(x)*cos(y)", {"x", "y"}, -1, 1, false, false, {2, 3, 4}, 30000,
            10000);
        add("nguyen-11", "x^y", {"x", "y"}, 0, 4, false, true, {2, 3}, 30000, 10000);
        add("nguyen-12", "x^4 - x^2 + y^2/2 - y", {"x", "y"}, -1, 1, false, false, {1, 3, 4},
            100000, 100000);
        add("nguyen-1c", "3.39*x^3 + 2.12*x^2 + 1.78*x", {"x"}, -1, 1, true, false, {1, 3}, 30000,
            2000);
        add("nguyen-2c", "0.48*x^4 + 3.39*x^3 + 2.12*x^2 + 1.78*x", {"x"}, -1, 1, true, false,
            {1, 3}, 60000, 10000);
        add("nguyen-5c", "sin(x^2)*cos(x) - 0.75", {"x"}, -1, 1, true, false, {2, 3}, 60000,
            10000);
        add("nguyen-8c", "sqrt(1.23*x)", {"x"}, 0, 4, true, true, {}, 30000, 2000);
        add("nguyen-9c", "sin(1.5*x) + sin(0.5*y^2)", {"x", "y"}, -1, 1, true, false, {2, 3, 4},
            60000, 1000);

        // desk-scale regression target over a wide range, searched with the
        // plain arithmetic grammar plus a constant placeholder
        BenchmarkTask toy;
        toy.id = "toy";
        toy.target_text = "0.3*x^3 + 0.5*x^2 + 2*x";
        toy.vars = {"x"};
        toy.sample_lo = -10;
        toy.sample_hi = 10;
        toy.points = 100;
        toy.has_const = true;
        toy.has_trig_exp = false;   // plain arithmetic search space
        toy.monomial_chain = false; // exactly {+,-,*,/,x,C}
        toy.eta = 0.99;
        toy.episodes = 10000;
        toy.sims_per_expansion = 10;
        toy.transplant_interval = 1000;
        out.push_back(std::move(toy));
        return out;
    }();
    return tasks;
}

const BenchmarkTask* find_task(const std::string& id) {
    for (const auto& t : benchmark_tasks())
        if (t.id == id) return &t;
    return nullptr;
}

std::vector<std::string> desk_subset() {
    return {"nguyen-1", "nguyen-2", "nguyen-5", "nguyen-6", "nguyen-8"};
}

Grammar make_arith_grammar(const std::vector<std::string>& vars, bool with_const,
                           std::size_t augmented_cap) {
    GrammarBuilder b;
    b.start("A").nonterminal("A");
    for (const auto& v : vars) b.variable(v);
    if (with_const) b.constant("C");
    b.rule("A", "A + A");
    b.rule("A", "A - A");
    b.rule("A", "A * A");
    b.rule("A", "A / A");
    for (const auto& v : vars) b.rule("A", v);
    if (with_const) b.rule("A", "C");
    b.augmented_cap(augmented_cap);
    return b.build();
}

Grammar make_balldrop_grammar() {
    GrammarBuilder b;
    b.start("A").nonterminal("A").variable("t").constant("C");
    b.rule("A", "A + A");
    b.rule("A", "A - A");
    b.rule("A", "A * A");
    b.rule("A", "A / A");
    b.rule("A", "exp(A)");
    b.rule("A", "cosh(A)");
    b.rule("A", "log(A)");
    b.rule("A", "t");
    b.rule("A", "C");
    return b.build();
}

// toy task grammar: the generic builder covers it (no trig, no constraints)
// because constraints/log/sqrt default off and has_const adds C.

std::optional<int> polynomial_degree(const ExpressionTree& t, int node) {
    const auto& n = t.nodes()[static_cast<std::size_t>(node)];
    using Kind = ExpressionTree::Node::Kind;
    switch (n.kind) {
        case Kind::Var: return 1;
        case Kind::Literal:
        case Kind::ConstSlot: return 0;
        case Kind::Unary: return std::nullopt;
        case Kind::Binary: {
            auto a = polynomial_degree(t, n.child[0]);
            auto b = polynomial_degree(t, n.child[1]);
            if (!a || !b) return std::nullopt;
            switch (n.op) {
                case Op::Add:
                case Op::Sub: return std::max(*a, *b);
                case Op::Mul: return *a + *b;
                default: return std::nullopt;  // div/pow are not polynomial here
            }
        }
    }
    return std::nullopt;
}

namespace {

bool subtree_has_argument_op(const ExpressionTree& t, int node) {
    const auto& n = t.nodes()[static_cast<std::size_t>(node)];
    using Kind = ExpressionTree::Node::Kind;
    if (n.kind == Kind::Unary) {
        switch (n.op) {
            case Op::Sin:
            case Op::Cos:
            case Op::Log:
            case Op::Sqrt:
                return true;
            default:
                return subtree_has_argument_op(t, n.child[0]);
        }
    }
    if (n.kind == Kind::Binary)
        return subtree_has_argument_op(t, n.child[0]) || subtree_has_argument_op(t, n.child[1]);
    return false;
}

}  // namespace

bool violates_argument_constraints(const ExpressionTree& t, int max_degree) {
    using Kind = ExpressionTree::Node::Kind;
    for (const auto& n : t.nodes()) {
        if (n.kind != Kind::Unary) continue;
        bool constrained = false;
        switch (n.op) {
            case Op::Sin:
            case Op::Cos:
            case Op::Log:
            case Op::Sqrt:
                constrained = true;
                break;
            default:
                break;
        }
        if (!constrained) continue;
        if (subtree_has_argument_op(t, n.child[0])) return true;  // nested trig/log/root
        auto deg = polynomial_degree(t, n.child[0]);
        if (!deg || *deg > max_degree) return true;
    }
    return false;
}

}  // namespace spl
