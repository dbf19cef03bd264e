#include "capplan/rational.hpp"

#include <cctype>
#include <stdexcept>

namespace capplan {

namespace {

Integer parse_integer_digits(std::string_view digits) {
  if (digits.empty()) throw std::invalid_argument("empty digit sequence");
  Integer out = 0;
  for (char ch : digits) {
    if (!std::isdigit(static_cast<unsigned char>(ch)))
      throw std::invalid_argument("invalid digit in number");
    out = out * 10 + (ch - '0');
  }
  return out;
}

Integer pow10(unsigned exponent) {
  Integer out = 1;
  for (unsigned i = 0; i < exponent; ++i) out *= 10;
  return out;
}

}  // namespace

Rational parse_rational(std::string_view text) {
  if (text.empty()) throw std::invalid_argument("empty number");

  if (auto slash = text.find('/'); slash != std::string_view::npos) {
    Rational num = parse_rational(text.substr(0, slash));
    Rational den = parse_rational(text.substr(slash + 1));
    if (den == 0) throw std::invalid_argument("zero denominator");
    return num / den;
  }

  bool negative = false;
  if (text.front() == '-' || text.front() == '+') {
    negative = text.front() == '-';
    text.remove_prefix(1);
  }

  long exponent = 0;
  if (auto e = text.find_first_of("eE"); e != std::string_view::npos) {
    std::string_view exp_text = text.substr(e + 1);
    bool exp_negative = false;
    if (!exp_text.empty() && (exp_text.front() == '-' || exp_text.front() == '+')) {
      exp_negative = exp_text.front() == '-';
      exp_text.remove_prefix(1);
    }
    if (exp_text.empty() || exp_text.size() > 6) throw std::invalid_argument("bad exponent");
    exponent = static_cast<long>(parse_integer_digits(exp_text));
    if (exp_negative) exponent = -exponent;
    text = text.substr(0, e);
  }

  std::string_view int_part = text;
  std::string_view frac_part;
  if (auto dot = text.find('.'); dot != std::string_view::npos) {
    int_part = text.substr(0, dot);
    frac_part = text.substr(dot + 1);
  }
  if (int_part.empty() && frac_part.empty()) throw std::invalid_argument("no digits");

  Integer mantissa = int_part.empty() ? Integer(0) : parse_integer_digits(int_part);
  if (!frac_part.empty()) {
    mantissa = mantissa * pow10(static_cast<unsigned>(frac_part.size())) +
               parse_integer_digits(frac_part);
  }
  exponent -= static_cast<long>(frac_part.size());

  Rational out(mantissa);
  if (exponent > 0) out *= Rational(pow10(static_cast<unsigned>(exponent)));
  if (exponent < 0) out /= Rational(pow10(static_cast<unsigned>(-exponent)));
  return negative ? Rational(-out) : out;
}

std::string to_decimal_string(const Rational& value) {
  Integer num = boost::multiprecision::numerator(value);
  Integer den = boost::multiprecision::denominator(value);
  if (den == 1) return num.str();

  // Finite decimal iff den = 2^a * 5^b; scale to 10^k.
  Integer rest = den;
  unsigned twos = 0, fives = 0;
  while (rest % 2 == 0) { rest /= 2; ++twos; }
  while (rest % 5 == 0) { rest /= 5; ++fives; }
  if (rest != 1) return num.str() + "/" + den.str();

  unsigned digits = std::max(twos, fives);
  Integer scaled = num * (pow10(digits) / den);
  bool negative = scaled < 0;
  if (negative) scaled = -scaled;
  std::string s = scaled.str();
  if (s.size() <= digits) s.insert(0, digits - s.size() + 1, '0');
  s.insert(s.size() - digits, ".");
  return negative ? "-" + s : s;
}

std::string to_smtlib_real(const Rational& value) {
  Integer num = boost::multiprecision::numerator(value);
  Integer den = boost::multiprecision::denominator(value);
  bool negative = num < 0;
  if (negative) num = -num;
  std::string body = den == 1 ? num.str() + ".0"
                              : "(/ " + num.str() + ".0 " + den.str() + ".0)";
  return negative ? "(- " + body + ")" : body;
}

std::string to_string(const Value& v) {
  if (const bool* b = std::get_if<bool>(&v)) return *b ? "true" : "false";
  return to_decimal_string(std::get<Rational>(v));
}

}  // namespace capplan
