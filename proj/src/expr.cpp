#include "capplan/expr.hpp"

#include <array>
#include <sstream>
#include <utility>

#include "capplan/error.hpp"

namespace capplan {

namespace {

struct OpInfo {
  Op op;
  std::string_view name;
  std::string_view smt;
  std::string_view infix;
  std::size_t min_arity;
  std::size_t max_arity;  // 0 = unbounded
};

constexpr std::array<OpInfo, 13> kOps{{
    {Op::Plus, "plus", "+", "+", 2, 0},
    {Op::Minus, "minus", "-", "-", 2, 2},
    {Op::Times, "times", "*", "*", 2, 0},
    {Op::Divide, "divide", "/", "/", 2, 2},
    {Op::Eq, "eq", "=", "=", 2, 2},
    {Op::Neq, "neq", "distinct", "!=", 2, 2},
    {Op::Lt, "lt", "<", "<", 2, 2},
    {Op::Gt, "gt", ">", ">", 2, 2},
    {Op::Leq, "leq", "<=", "<=", 2, 2},
    {Op::Geq, "geq", ">=", ">=", 2, 2},
    {Op::And, "and", "and", "and", 2, 0},
    {Op::Or, "or", "or", "or", 2, 0},
    {Op::Not, "not", "not", "not", 1, 1},
}};

const OpInfo& info(Op op) { return kOps[static_cast<std::size_t>(op)]; }

bool is_arith(Op op) {
  return op == Op::Plus || op == Op::Minus || op == Op::Times || op == Op::Divide;
}
bool is_order(Op op) { return op == Op::Lt || op == Op::Gt || op == Op::Leq || op == Op::Geq; }
bool is_logic(Op op) { return op == Op::And || op == Op::Or || op == Op::Not; }

void check_arity(Op op, std::size_t n) {
  const OpInfo& i = info(op);
  if (n < i.min_arity || (i.max_arity != 0 && n > i.max_arity)) {
    std::ostringstream msg;
    msg << "operator '" << i.name << "' takes ";
    if (i.max_arity == i.min_arity) msg << "exactly " << i.min_arity;
    else msg << "at least " << i.min_arity;
    msg << " argument(s), got " << n;
    throw ArityError(msg.str());
  }
}

}  // namespace

std::string_view op_name(Op op) { return info(op).name; }

std::optional<Op> op_from_name(std::string_view name) {
  for (const auto& i : kOps)
    if (i.name == name) return i.op;
  return std::nullopt;
}

std::string_view sort_name(Sort sort) { return sort == Sort::Bool ? "Bool" : "Real"; }

Expr Expr::apply(Op op, std::vector<Expr> args) {
  check_arity(op, args.size());
  return Expr{Apply{op, std::move(args)}};
}

Expr mk_and(std::vector<Expr> conjuncts) {
  if (conjuncts.empty()) return Expr::constant(true);
  if (conjuncts.size() == 1) return std::move(conjuncts.front());
  return Expr::apply(Op::And, std::move(conjuncts));
}

Expr mk_or(std::vector<Expr> disjuncts) {
  if (disjuncts.empty()) return Expr::constant(false);
  if (disjuncts.size() == 1) return std::move(disjuncts.front());
  return Expr::apply(Op::Or, std::move(disjuncts));
}

Expr mk_not(Expr e) { return Expr::apply(Op::Not, {std::move(e)}); }

Expr mk_eq(Expr lhs, Expr rhs) { return Expr::apply(Op::Eq, {std::move(lhs), std::move(rhs)}); }

Expr mk_implies(Expr antecedent, Expr consequent) {
  return Expr::apply(Op::Or, {mk_not(std::move(antecedent)), std::move(consequent)});
}

Expr parse_expression(const nlohmann::json& doc) {
  if (!doc.is_object()) throw SchemaError("expression node must be an object");
  if (doc.contains("const")) {
    const auto& c = doc.at("const");
    if (c.is_boolean()) return Expr::constant(c.get<bool>());
    if (c.is_string()) {
      try {
        return Expr::constant(parse_rational(c.get<std::string>()));
      } catch (const std::invalid_argument& e) {
        throw SchemaError("invalid numeric constant '" + c.get<std::string>() + "': " + e.what());
      }
    }
    throw SchemaError("'const' must be a boolean or a decimal string");
  }
  if (doc.contains("ref")) {
    const auto& r = doc.at("ref");
    if (!r.is_string() || r.get<std::string>().empty())
      throw SchemaError("'ref' must be a non-empty string");
    return Expr::ref(r.get<std::string>());
  }
  if (doc.contains("apply")) {
    const auto& name = doc.at("apply");
    if (!name.is_string()) throw SchemaError("'apply' must be an operator name");
    auto op = op_from_name(name.get<std::string>());
    if (!op) throw UnknownOperator("unknown operator '" + name.get<std::string>() + "'");
    if (!doc.contains("args") || !doc.at("args").is_array())
      throw SchemaError("'apply' node needs an 'args' array");
    std::vector<Expr> args;
    for (const auto& a : doc.at("args")) args.push_back(parse_expression(a));
    return Expr::apply(*op, std::move(args));
  }
  throw SchemaError("expression node needs one of 'const', 'ref', 'apply'");
}

Expr parse_expression(const nlohmann::json& doc, const SortLookup& sorts) {
  Expr e = parse_expression(doc);
  typecheck(e, sorts);
  return e;
}

nlohmann::json to_json(const Expr& e) {
  return std::visit(
      [](const auto& n) -> nlohmann::json {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Constant>) {
          if (const bool* b = std::get_if<bool>(&n.value)) return {{"const", *b}};
          return {{"const", to_decimal_string(std::get<Rational>(n.value))}};
        } else if constexpr (std::is_same_v<T, Ref>) {
          return {{"ref", n.id}};
        } else {
          nlohmann::json args = nlohmann::json::array();
          for (const auto& a : n.args) args.push_back(to_json(a));
          return {{"apply", std::string(op_name(n.op))}, {"args", std::move(args)}};
        }
      },
      e.node);
}

Sort typecheck(const Expr& e, const SortLookup& sorts) {
  if (const auto* c = std::get_if<Constant>(&e.node)) return is_bool(c->value) ? Sort::Bool : Sort::Real;
  if (const auto* r = std::get_if<Ref>(&e.node)) {
    auto s = sorts(r->id);
    if (!s) throw DanglingReference("expression references unknown property '" + r->id + "'");
    return *s;
  }
  const auto& a = std::get<Apply>(e.node);
  check_arity(a.op, a.args.size());
  std::vector<Sort> arg_sorts;
  for (const auto& arg : a.args) arg_sorts.push_back(typecheck(arg, sorts));

  auto require_all = [&](Sort want) {
    for (Sort s : arg_sorts)
      if (s != want)
        throw TypeError("operator '" + std::string(op_name(a.op)) + "' expects " +
                        std::string(sort_name(want)) + " arguments");
  };
  if (is_arith(a.op)) {
    require_all(Sort::Real);
    return Sort::Real;
  }
  if (is_order(a.op)) {
    require_all(Sort::Real);
    return Sort::Bool;
  }
  if (is_logic(a.op)) {
    require_all(Sort::Bool);
    return Sort::Bool;
  }
  // eq / neq: both sides of one sort.
  if (arg_sorts[0] != arg_sorts[1])
    throw TypeError("operator '" + std::string(op_name(a.op)) + "' compares Bool with Real");
  return Sort::Bool;
}

namespace {

void collect_refs(const Expr& e, std::set<std::string>& out) {
  if (const auto* r = std::get_if<Ref>(&e.node)) out.insert(r->id);
  else if (const auto* a = std::get_if<Apply>(&e.node))
    for (const auto& arg : a->args) collect_refs(arg, out);
}

const Rational& as_real(const Value& v) {
  if (const auto* r = std::get_if<Rational>(&v)) return *r;
  throw TypeError("expected a real value, got a boolean");
}

bool as_bool(const Value& v) {
  if (const auto* b = std::get_if<bool>(&v)) return *b;
  throw TypeError("expected a boolean value, got a real");
}

}  // namespace

std::set<std::string> references(const Expr& e) {
  std::set<std::string> out;
  collect_refs(e, out);
  return out;
}

Value evaluate(const Expr& e, const Valuation& valuation) {
  if (const auto* c = std::get_if<Constant>(&e.node)) return c->value;
  if (const auto* r = std::get_if<Ref>(&e.node)) {
    auto it = valuation.find(r->id);
    if (it == valuation.end()) throw MissingValue("no value for '" + r->id + "'");
    return it->second;
  }
  const auto& a = std::get<Apply>(e.node);
  switch (a.op) {
    case Op::And:
      for (const auto& arg : a.args)
        if (!as_bool(evaluate(arg, valuation))) return false;
      return true;
    case Op::Or:
      for (const auto& arg : a.args)
        if (as_bool(evaluate(arg, valuation))) return true;
      return false;
    case Op::Not:
      return !as_bool(evaluate(a.args[0], valuation));
    default:
      break;
  }

  std::vector<Value> vals;
  vals.reserve(a.args.size());
  for (const auto& arg : a.args) vals.push_back(evaluate(arg, valuation));

  switch (a.op) {
    case Op::Plus: {
      Rational sum = 0;
      for (const auto& v : vals) sum += as_real(v);
      return sum;
    }
    case Op::Times: {
      Rational prod = 1;
      for (const auto& v : vals) prod *= as_real(v);
      return prod;
    }
    case Op::Minus:
      return Rational(as_real(vals[0]) - as_real(vals[1]));
    case Op::Divide: {
      const Rational& den = as_real(vals[1]);
      if (den == 0) throw DivisionByZero("division by zero");
      return Rational(as_real(vals[0]) / den);
    }
    case Op::Eq:
    case Op::Neq: {
      if (vals[0].index() != vals[1].index()) throw TypeError("comparison of Bool with Real");
      bool same = vals[0] == vals[1];
      return a.op == Op::Eq ? same : !same;
    }
    case Op::Lt: return as_real(vals[0]) < as_real(vals[1]);
    case Op::Gt: return as_real(vals[0]) > as_real(vals[1]);
    case Op::Leq: return as_real(vals[0]) <= as_real(vals[1]);
    case Op::Geq: return as_real(vals[0]) >= as_real(vals[1]);
    default:
      break;
  }
  throw UnsupportedExpression("unhandled operator");
}

bool evaluate_bool(const Expr& e, const Valuation& valuation) {
  return as_bool(evaluate(e, valuation));
}

namespace {

bool has_variable(const Expr& e) {
  if (std::holds_alternative<Ref>(e.node)) return true;
  if (const auto* a = std::get_if<Apply>(&e.node))
    for (const auto& arg : a->args)
      if (has_variable(arg)) return true;
  return false;
}

}  // namespace

bool is_linear(const Expr& e) {
  const auto* a = std::get_if<Apply>(&e.node);
  if (!a) return true;
  if (a->op == Op::Times) {
    int variable_factors = 0;
    for (const auto& arg : a->args)
      if (has_variable(arg)) ++variable_factors;
    if (variable_factors > 1) return false;
  }
  if (a->op == Op::Divide && has_variable(a->args[1])) return false;
  for (const auto& arg : a->args)
    if (!is_linear(arg)) return false;
  return true;
}

Expr rename_refs(const Expr& e, const std::function<std::string(const std::string&)>& rename) {
  if (const auto* r = std::get_if<Ref>(&e.node)) return Expr::ref(rename(r->id));
  if (const auto* a = std::get_if<Apply>(&e.node)) {
    std::vector<Expr> args;
    args.reserve(a->args.size());
    for (const auto& arg : a->args) args.push_back(rename_refs(arg, rename));
    return Expr{Apply{a->op, std::move(args)}};
  }
  return e;
}

namespace {

void write_smtlib(const Expr& e, std::string& out) {
  if (const auto* c = std::get_if<Constant>(&e.node)) {
    if (const bool* b = std::get_if<bool>(&c->value)) out += *b ? "true" : "false";
    else out += to_smtlib_real(std::get<Rational>(c->value));
    return;
  }
  if (const auto* r = std::get_if<Ref>(&e.node)) {
    out += '|';
    out += r->id;
    out += '|';
    return;
  }
  const auto& a = std::get<Apply>(e.node);
  out += '(';
  out += info(a.op).smt;
  for (const auto& arg : a.args) {
    out += ' ';
    write_smtlib(arg, out);
  }
  out += ')';
}

void write_infix(const Expr& e, std::string& out) {
  if (const auto* c = std::get_if<Constant>(&e.node)) {
    out += to_string(c->value);
    return;
  }
  if (const auto* r = std::get_if<Ref>(&e.node)) {
    out += r->id;
    return;
  }
  const auto& a = std::get<Apply>(e.node);
  if (a.op == Op::Not) {
    out += "not ";
    bool wrap = std::holds_alternative<Apply>(a.args[0].node);
    if (wrap) out += '(';
    write_infix(a.args[0], out);
    if (wrap) out += ')';
    return;
  }
  std::string sep = " " + std::string(info(a.op).infix) + " ";
  for (std::size_t i = 0; i < a.args.size(); ++i) {
    if (i) out += sep;
    bool wrap = std::holds_alternative<Apply>(a.args[i].node);
    if (wrap) out += '(';
    write_infix(a.args[i], out);
    if (wrap) out += ')';
  }
}

}  // namespace

std::string to_smtlib(const Expr& e) {
  std::string out;
  write_smtlib(e, out);
  return out;
}

std::string to_infix(const Expr& e) {
  std::string out;
  write_infix(e, out);
  return out;
}

}  // namespace capplan
