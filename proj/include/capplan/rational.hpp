#pragma once

#include <string>
#include <string_view>
#include <variant>

#include <boost/multiprecision/cpp_int.hpp>

namespace capplan {

using Rational = boost::multiprecision::cpp_rational;
using Integer = boost::multiprecision::cpp_int;

/// Parses "12", "-2.5", "1e-3", "3.25E2" or "p/q" into an exact rational.
/// Throws std::invalid_argument on malformed input or a zero denominator.
Rational parse_rational(std::string_view text);

/// Exact decimal when the denominator is of the form 2^a*5^b, otherwise "p/q".
std::string to_decimal_string(const Rational& value);

/// SMT-LIB2 real literal: `5.0`, `(- 5.0)`, `(/ 1.0 3.0)`, `(- (/ 1.0 3.0))`.
std::string to_smtlib_real(const Rational& value);

/// A ground value: boolean or exact real.
using Value = std::variant<bool, Rational>;

inline bool is_bool(const Value& v) { return std::holds_alternative<bool>(v); }
inline bool is_real(const Value& v) { return std::holds_alternative<Rational>(v); }

/// "true"/"false" or the exact decimal rendering.
std::string to_string(const Value& v);

}  // namespace capplan
