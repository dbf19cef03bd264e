#pragma once

// Expression trees over constants, property references and a fixed set of
// arithmetic, relational and logical operators. The same tree type is used
// for model constraints (references name properties) and for encoded SMT
// assertions (references name solver variables).

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "capplan/rational.hpp"

namespace capplan {

enum class Op { Plus, Minus, Times, Divide, Eq, Neq, Lt, Gt, Leq, Geq, And, Or, Not };

enum class Sort { Bool, Real };

std::string_view op_name(Op op);
/// Inverse of op_name; std::nullopt for names outside the supported set.
std::optional<Op> op_from_name(std::string_view name);
std::string_view sort_name(Sort sort);

struct Expr;

struct Constant {
  Value value;
  bool operator==(const Constant&) const = default;
};

struct Ref {
  std::string id;
  bool operator==(const Ref&) const = default;
};

struct Apply {
  Op op;
  std::vector<Expr> args;
  bool operator==(const Apply&) const;
};

struct Expr {
  std::variant<Constant, Ref, Apply> node;

  static Expr constant(bool b) { return Expr{Constant{b}}; }
  static Expr constant(Rational r) { return Expr{Constant{std::move(r)}}; }
  static Expr ref(std::string id) { return Expr{Ref{std::move(id)}}; }
  /// Checked construction; throws ArityError.
  static Expr apply(Op op, std::vector<Expr> args);

  bool operator==(const Expr&) const = default;
};

inline bool Apply::operator==(const Apply& other) const {
  return op == other.op && args == other.args;
}

// Builders that fold the degenerate cases arity rules forbid.
Expr mk_and(std::vector<Expr> conjuncts);  // [] -> true, [x] -> x
Expr mk_or(std::vector<Expr> disjuncts);   // [] -> false, [x] -> x
Expr mk_not(Expr e);
Expr mk_eq(Expr lhs, Expr rhs);
/// a => b rendered as (or (not a) b).
Expr mk_implies(Expr antecedent, Expr consequent);

/// Maps a reference id to its sort, or std::nullopt if unknown.
using SortLookup = std::function<std::optional<Sort>(const std::string&)>;

/// Structural parse of the JSON expression schema
/// ({"const": ...}, {"ref": ...}, {"apply": ..., "args": [...]}).
/// Throws UnknownOperator, ArityError, or SchemaError for malformed nodes.
Expr parse_expression(const nlohmann::json& doc);
/// Parse then type check; the root may have either sort.
Expr parse_expression(const nlohmann::json& doc, const SortLookup& sorts);

nlohmann::json to_json(const Expr& e);

/// Infers the sort of e. Throws TypeError, or DanglingReference for unknown refs.
Sort typecheck(const Expr& e, const SortLookup& sorts);

std::set<std::string> references(const Expr& e);

using Valuation = std::map<std::string, Value, std::less<>>;

/// Exact evaluation. Throws MissingValue, DivisionByZero, TypeError.
Value evaluate(const Expr& e, const Valuation& valuation);
bool evaluate_bool(const Expr& e, const Valuation& valuation);

/// False iff some product has two variable-containing factors or some
/// division has a variable-containing divisor.
bool is_linear(const Expr& e);

/// Rewrites every reference through `rename`.
Expr rename_refs(const Expr& e, const std::function<std::string(const std::string&)>& rename);

/// SMT-LIB2 term; references become quoted symbols |id|.
std::string to_smtlib(const Expr& e);

/// Human-readable infix rendering for reports.
std::string to_infix(const Expr& e);

}  // namespace capplan
