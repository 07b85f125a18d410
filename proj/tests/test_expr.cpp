#include <doctest.h>

#include <cmath>

#include "spl/errors.hpp"
#include "spl/expr.hpp"
#include "spl/grammar.hpp"
#include "spl/numdata.hpp"
#include "spl/tasks.hpp"
#include "test_util.hpp"

using namespace spl;

namespace {

Grammar tiny_grammar() {
    return GrammarBuilder()
        .start("f")
        .nonterminal("f A")
        .variable("x")
        .constant("C")
        .rule("f", "A")
        .rule("A", "A + A")
        .rule("A", "A * A")
        .rule("A", "A / A")
        .rule("A", "x")
        .rule("A", "C")
        .build();
}

RuleId rule_by_text(const Grammar& g, const std::string& text) {
    for (const auto& r : g.base_rules())
        if (r.text == text) return r.id;
    REQUIRE(false);
    return -1;
}

}  // namespace

TEST_CASE("build_expression: direct derivation of x + C0") {
    Grammar g = tiny_grammar();
    const RuleId f_a = rule_by_text(g, "f -> A");
    const RuleId add = rule_by_text(g, "A -> A + A");
    const RuleId x = rule_by_text(g, "A -> x");
    const RuleId c = rule_by_text(g, "A -> C");

    ExpressionTree t = build_expression(g, {f_a, add, x, c});
    CHECK(t.n_rules() == 4);
    CHECK(t.constant_count() == 1);
    CHECK(render(t, RenderStyle::Raw) == "x+C0");
    CHECK(render(t, RenderStyle::Canonical) == "x + C0");

    SUBCASE("incomplete traversal is rejected") {
        CHECK_THROWS_AS(build_expression(g, {f_a, add, x}), ContractError);
    }
    SUBCASE("trailing rules are rejected") {
        CHECK_THROWS_AS(build_expression(g, {f_a, x, c}), ContractError);
    }
}

TEST_CASE("build_expression: witness derivation of x^3 + x^2 + x") {
    Grammar g = GrammarBuilder()
                    .start("A")
                    .nonterminal("A")
                    .variable("x")
                    .rule("A", "A + A")
                    .rule("A", "A * A")
                    .rule("A", "x")
                    .build();
    // pre-order: (x*x*x) + ((x*x) + x)
    std::vector<RuleId> tr = {0, 1, 1, 2, 2, 2, 0, 1, 2, 2, 2};
    ExpressionTree t = build_expression(g, tr);
    CHECK(t.n_rules() == 11);
    CHECK(render(t, RenderStyle::Raw) == "((x*x)*x)+((x*x)+x)");
    CHECK(render(t, RenderStyle::Canonical) == "x^3 + x^2 + x");
}

TEST_CASE("evaluate: pointwise application with constants") {
    Grammar g = tiny_grammar();
    ExpressionTree t = build_expression(
        g, {rule_by_text(g, "f -> A"), rule_by_text(g, "A -> A + A"), rule_by_text(g, "A -> x"),
            rule_by_text(g, "A -> C")});
    DataMatrix Y;
    Y.rows = {{1, 2, 3}};
    const std::vector<double> constants = {1.0};
    EvalResult r = evaluate(t, Y, constants);
    REQUIRE(r.valid);
    CHECK(r.values == std::vector<double>{2, 3, 4});
}

TEST_CASE("evaluate: division by zero flags the result invalid") {
    Grammar g = tiny_grammar();
    ExpressionTree t = build_expression(
        g, {rule_by_text(g, "f -> A"), rule_by_text(g, "A -> A / A"), rule_by_text(g, "A -> x"),
            rule_by_text(g, "A -> x")});
    DataMatrix Y;
    Y.rows = {{1.0, 0.0, 2.0}};
    CHECK_FALSE(evaluate(t, Y).valid);
    Y.rows = {{1.0, 0.5, 2.0}};
    CHECK(evaluate(t, Y).valid);
}

TEST_CASE("evaluate: log/sqrt domain and overflow flag invalid") {
    ExpressionTree lg = parse_expression("log(x)", {"x"});
    DataMatrix Y;
    Y.rows = {{-1.0}};
    CHECK_FALSE(evaluate(lg, Y).valid);
    Y.rows = {{0.0}};
    CHECK_FALSE(evaluate(lg, Y).valid);

    ExpressionTree ex = parse_expression("exp(exp(x))", {"x"});
    Y.rows = {{1000.0}};
    CHECK_FALSE(evaluate(ex, Y).valid);
}

TEST_CASE("evaluate: shape mismatches are contract errors") {
    ExpressionTree t = parse_expression("x + C", {"x"});
    DataMatrix Y;
    Y.rows = {{1, 2}};
    CHECK_THROWS_AS(evaluate(t, Y, {}), ContractError);
    ExpressionTree two_vars = parse_expression("x + y", {"x", "y"});
    CHECK_THROWS_AS(evaluate(two_vars, Y), ContractError);
}

TEST_CASE("evaluate: a linear Lorenz candidate matches the analytic rate") {
    // clean Lorenz states; dx/dt = sigma*(y-x) pointwise
    LorenzConfig cfg;
    cfg.noise_level = 0.0;
    cfg.t_end = 1.0;
    auto dims = make_lorenz_dataset(cfg);

    ExpressionTree t = parse_expression("C*x + C*y", {"x", "y", "z"});
    REQUIRE(t.constant_count() == 2);
    const std::vector<double> constants = {-10.0, 10.0};
    EvalResult r = evaluate(t, dims[0].Y, constants);
    REQUIRE(r.valid);
    for (std::size_t i = 0; i < r.values.size(); ++i) {
        const double analytic = 10.0 * (dims[0].Y.rows[1][i] - dims[0].Y.rows[0][i]);
        CHECK(r.values[i] == doctest::Approx(analytic).epsilon(1e-12));
    }
}

TEST_CASE("simplify: adjacent constant slots merge") {
    ExpressionTree t = parse_expression("(C + C) + x", {"x"});
    CHECK(t.constant_count() == 2);
    ExpressionTree s = simplify(t);
    CHECK(s.constant_count() == 1);
    CHECK(render(s) == "C0 + x");
    CHECK(s.n_rules() == t.n_rules());  // parsimony count is preserved
}

TEST_CASE("simplify: identities and literal folding") {
    CHECK(render(simplify(parse_expression("1*x + 0", {"x"}))) == "x");
    CHECK(render(simplify(parse_expression("x/1", {"x"}))) == "x");
    CHECK(render(simplify(parse_expression("x^1", {"x"}))) == "x");
    CHECK(render(simplify(parse_expression("2*3 + x", {"x"}))) == "6 + x");
    CHECK(render(simplify(parse_expression("cos(0) + x", {"x"}))) == "1 + x");
    CHECK(render(simplify(parse_expression("2 + 3*4", {"x"}))) == "14");
}

TEST_CASE("simplify: structurally tight expressions stay intact") {
    ExpressionTree t = parse_expression("sin(x^2)*cos(x) - C", {"x"});
    ExpressionTree s = simplify(t);
    CHECK(render(s) == "sin(x^2)*cos(x) - C0");
    CHECK(s.constant_count() == 1);
}

TEST_CASE("render: fitted constants at six significant digits") {
    ExpressionTree t = parse_expression("C*x + C*y", {"x", "y"});
    const std::vector<double> constants = {-9.96612345, 9.96398765};
    CHECK(render(t, RenderStyle::Canonical, constants) == "-9.96612*x + 9.96399*y");
}

TEST_CASE("render: constant-only tree folds to its literal") {
    ExpressionTree t = simplify(parse_expression("2*3", {}));
    CHECK(render(t) == "6");
}

TEST_CASE("substitute_constants freezes slots into literals") {
    ExpressionTree t = parse_expression("C*x + C", {"x"});
    const std::vector<double> constants = {2.0, 1.0};
    ExpressionTree fixed = substitute_constants(t, constants);
    CHECK(fixed.constant_count() == 0);
    DataMatrix Y;
    Y.rows = {{0, 1, 2}};
    EvalResult r = evaluate(fixed, Y);
    REQUIRE(r.valid);
    CHECK(r.values == std::vector<double>{1, 3, 5});
}

TEST_CASE("equivalent: identities from the recovery rules") {
    DomainSpec pos;
    pos.ranges = {{0.0, 2.0}};
    CHECK(equivalent(parse_expression("log(x^3 + x^2 + x + 1)", {"x"}),
                     parse_expression("log(x + 1) + log(x^2 + 1)", {"x"}), pos));

    DomainSpec two;
    two.ranges = {{-3.0, 3.0}, {-3.0, 3.0}};
    CHECK_FALSE(equivalent(parse_expression("sin(x + y)", {"x", "y"}),
                           parse_expression("2*sin(x)*cos(y)", {"x", "y"}), two));
    CHECK(equivalent(parse_expression("sin(x + y)", {"x", "y"}),
                     parse_expression("sin(x)*cos(y) + cos(x)*sin(y)", {"x", "y"}), two));

    DomainSpec one;
    one.ranges = {{-1.0, 1.0}};
    CHECK(equivalent(parse_expression("x", {"x"}), parse_expression("x", {"x"}), one));
}

TEST_CASE("equivalent: unfitted slots are a contract violation") {
    DomainSpec d;
    d.ranges = {{0, 1}};
    CHECK_THROWS_AS(
        equivalent(parse_expression("C*x", {"x"}), parse_expression("x", {"x"}), d),
        ContractError);
}

TEST_CASE("equivalent: no mutually valid sample is an error") {
    DomainSpec d;
    d.ranges = {{-2.0, -1.0}};
    CHECK_THROWS_AS(equivalent(parse_expression("log(x)", {"x"}),
                               parse_expression("sqrt(x)", {"x"}), d),
                    DataError);
}

TEST_CASE("property: simplify preserves evaluation on random trees") {
    // constant slots are frozen to random literals first; slot merges change
    // the parameter vector, not the pointwise function
    std::vector<Grammar> grammars;
    grammars.push_back(tiny_grammar());
    grammars.push_back(find_task("nguyen-6")->make_grammar());

    Rng rng(123);
    for (auto& g : grammars) {
        int checked = 0;
        while (checked < 1000) {
            auto traversal = spltest::random_complete_traversal(g, 30, rng);
            ExpressionTree t = build_expression(g, traversal);
            if (t.constant_count() > 0) {
                std::vector<double> c(static_cast<std::size_t>(t.constant_count()));
                for (auto& v : c) v = rng.uniform(-3.0, 3.0);
                t = substitute_constants(t, c);
            }
            ExpressionTree s = simplify(t);

            DataMatrix Y;
            Y.rows.assign(g.variable_names().size(), {});
            for (auto& row : Y.rows) {
                row.resize(1000);
                for (auto& v : row) v = rng.uniform(-2.0, 2.0);
            }
            EvalResult before = evaluate(t, Y);
            EvalResult after = evaluate(s, Y);
            if (!before.valid) continue;  // domain failures compared elsewhere
            ++checked;
            REQUIRE(after.valid);
            for (std::size_t i = 0; i < before.values.size(); ++i) {
                const double scale = std::max(1.0, std::abs(before.values[i]));
                REQUIRE(std::abs(before.values[i] - after.values[i]) / scale < 1e-12);
            }
        }
    }
}

TEST_CASE("property: n_rules at least the terminal leaf count") {
    Grammar g = tiny_grammar();
    Rng rng(77);
    for (int i = 0; i < 200; ++i) {
        auto traversal = spltest::random_complete_traversal(g, 30, rng);
        ExpressionTree t = build_expression(g, traversal);
        int leaves = 0;
        for (const auto& n : t.nodes())
            if (n.kind != ExpressionTree::Node::Kind::Unary &&
                n.kind != ExpressionTree::Node::Kind::Binary)
                ++leaves;
        CHECK(t.n_rules() >= leaves);
    }
}
