#include <gtest/gtest.h>

#include <random>

#include "capplan/error.hpp"
#include "capplan/expr.hpp"

using namespace capplan;
using nlohmann::json;

namespace {

json ref(const std::string& id) { return {{"ref", id}}; }
json num(const std::string& v) { return {{"const", v}}; }
json flag(bool v) { return {{"const", v}}; }
json app(const std::string& op, json args) { return {{"apply", op}, {"args", std::move(args)}}; }

SortLookup reals_and(std::set<std::string> booleans = {}) {
  return [booleans](const std::string& id) -> std::optional<Sort> {
    if (id.empty() || id == "missing") return std::nullopt;
    return booleans.contains(id) ? Sort::Bool : Sort::Real;
  };
}

Valuation vals(std::initializer_list<std::pair<const char*, Value>> items) {
  Valuation v;
  for (const auto& [k, x] : items) v.emplace(k, x);
  return v;
}

}  // namespace

TEST(Expr, ParsesTheEqualsRelation) {
  Expr e = parse_expression(app("eq", {ref("TargetPosition"), ref("ProductPositionAfter")}), reals_and());
  const auto& a = std::get<Apply>(e.node);
  EXPECT_EQ(a.op, Op::Eq);
  ASSERT_EQ(a.args.size(), 2u);
  EXPECT_EQ(references(e), (std::set<std::string>{"TargetPosition", "ProductPositionAfter"}));
}

TEST(Expr, ArityRules) {
  EXPECT_THROW(parse_expression(app("and", json::array({flag(true)}))), ArityError);
  EXPECT_THROW(parse_expression(app("not", {flag(true), flag(false)})), ArityError);
  EXPECT_THROW(parse_expression(app("minus", json::array({num("1")}))), ArityError);
  EXPECT_THROW(parse_expression(app("leq", {num("1"), num("2"), num("3")})), ArityError);
  EXPECT_NO_THROW(parse_expression(app("plus", {num("1"), num("2"), num("3")})));
  EXPECT_THROW(Expr::apply(Op::Divide, {Expr::constant(Rational(1))}), ArityError);
}

TEST(Expr, UnknownOperatorAndMalformedNodes) {
  EXPECT_THROW(parse_expression(app("pow", {num("1"), num("2")})), UnknownOperator);
  EXPECT_THROW(parse_expression(json{{"weird", 1}}), SchemaError);
  EXPECT_THROW(parse_expression(json{{"const", "x1"}}), SchemaError);
}

TEST(Expr, NestedReferences) {
  Expr e = parse_expression(app("leq", {app("plus", {ref("a"), num("2.0")}), ref("b")}), reals_and());
  EXPECT_EQ(references(e), (std::set<std::string>{"a", "b"}));
  EXPECT_TRUE(references(Expr::constant(true)).empty());
}

TEST(Expr, Typecheck) {
  auto sorts = reals_and({"flag"});
  EXPECT_EQ(typecheck(parse_expression(app("plus", {ref("a"), num("1")})), sorts), Sort::Real);
  EXPECT_EQ(typecheck(parse_expression(app("eq", {ref("flag"), flag(true)})), sorts), Sort::Bool);
  EXPECT_THROW(typecheck(parse_expression(app("plus", {ref("flag"), num("1")})), sorts), TypeError);
  EXPECT_THROW(typecheck(parse_expression(app("and", {ref("a"), flag(true)})), sorts), TypeError);
  EXPECT_THROW(typecheck(parse_expression(app("eq", {ref("a"), flag(true)})), sorts), TypeError);
  EXPECT_THROW(typecheck(parse_expression(app("lt", {ref("flag"), flag(true)})), sorts), TypeError);
  EXPECT_THROW(typecheck(parse_expression(ref("missing")), sorts), DanglingReference);
}

TEST(Expr, EvaluatesExactly) {
  Expr e = parse_expression(app("eq", {app("divide", {num("1"), num("3")}), app("minus", {ref("x"), num("2/3")})}));
  EXPECT_TRUE(evaluate_bool(e, vals({{"x", Rational(1)}})));
  EXPECT_FALSE(evaluate_bool(e, vals({{"x", Rational(2)}})));
  Expr sum = parse_expression(app("times", {ref("x"), num("0.1"), num("3")}));
  EXPECT_EQ(std::get<Rational>(evaluate(sum, vals({{"x", Rational(10)}}))), Rational(3));
}

TEST(Expr, EvaluationErrors) {
  Expr div = parse_expression(app("divide", {num("1"), ref("x")}));
  EXPECT_THROW(evaluate(div, vals({{"x", Rational(0)}})), DivisionByZero);
  EXPECT_THROW(evaluate(div, {}), MissingValue);
  Expr bad = parse_expression(app("and", {ref("x"), flag(true)}));
  EXPECT_THROW(evaluate(bad, vals({{"x", Rational(1)}})), TypeError);
}

TEST(Expr, LogicalOperators) {
  Expr e = parse_expression(app("or", {app("not", json::array({ref("p")})), app("and", {ref("q"), app("neq", {ref("x"), num("1")})})}));
  EXPECT_TRUE(evaluate_bool(e, vals({{"p", false}, {"q", false}, {"x", Rational(1)}})));
  EXPECT_FALSE(evaluate_bool(e, vals({{"p", true}, {"q", true}, {"x", Rational(1)}})));
  EXPECT_TRUE(evaluate_bool(e, vals({{"p", true}, {"q", true}, {"x", Rational(2)}})));
}

TEST(Expr, Linearity) {
  EXPECT_TRUE(is_linear(parse_expression(app("leq", {app("times", {num("2"), ref("a")}), ref("b")}))));
  EXPECT_FALSE(is_linear(parse_expression(app("eq", {app("times", {ref("a"), ref("b")}), num("1")}))));
  EXPECT_FALSE(is_linear(parse_expression(app("eq", {app("divide", {num("1"), ref("b")}), num("1")}))));
  EXPECT_TRUE(is_linear(parse_expression(app("eq", {app("divide", {ref("b"), num("4")}), num("1")}))));
}

TEST(Expr, SmtLibAndInfixRendering) {
  Expr e = parse_expression(app("leq", {app("plus", {ref("a"), num("-2.5")}), ref("b")}));
  EXPECT_EQ(to_smtlib(e), "(<= (+ |a| (- (/ 5.0 2.0))) |b|)");
  EXPECT_EQ(to_smtlib(mk_implies(Expr::ref("c"), Expr::ref("d"))), "(or (not |c|) |d|)");
  EXPECT_EQ(to_smtlib(parse_expression(app("neq", {ref("a"), ref("b")}))), "(distinct |a| |b|)");
  EXPECT_FALSE(to_infix(e).empty());
}

TEST(Expr, BuildersFoldDegenerateCases) {
  EXPECT_EQ(mk_and({}), Expr::constant(true));
  EXPECT_EQ(mk_or({}), Expr::constant(false));
  EXPECT_EQ(mk_and({Expr::ref("x")}), Expr::ref("x"));
}

TEST(Expr, JsonRoundTrip) {
  json doc = app("and", {app("geq", {ref("a"), num("1/3")}), app("not", json::array({ref("p")}))});
  Expr e = parse_expression(doc);
  EXPECT_EQ(parse_expression(to_json(e)), e);
}

// Renaming references and the valuation consistently leaves the value unchanged.
TEST(Expr, EvaluationIsInvariantUnderRenaming) {
  std::mt19937 rng(3);
  std::uniform_int_distribution<int> small(-3, 3);
  Expr e = parse_expression(app("or", {app("leq", {app("plus", {ref("a"), ref("b")}), num("1")}),
                                       app("eq", {app("times", {num("2"), ref("a")}), ref("c")})}));
  auto rename = [](const std::string& s) { return "renamed_" + s; };
  Expr renamed = rename_refs(e, rename);
  EXPECT_EQ(references(renamed), (std::set<std::string>{"renamed_a", "renamed_b", "renamed_c"}));
  for (int i = 0; i < 200; ++i) {
    Valuation v, w;
    for (const char* k : {"a", "b", "c"}) {
      Rational x(small(rng), 1 + std::abs(small(rng)));
      v.emplace(k, x);
      w.emplace(rename(k), x);
    }
    EXPECT_EQ(evaluate(e, v), evaluate(renamed, w));
  }
}
