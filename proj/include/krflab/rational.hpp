#pragma once

// Exact rational scalar used by the cohomology engine, plus "p/q" text I/O.

#include <boost/multiprecision/cpp_int.hpp>

#include <algorithm>
#include <cctype>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace krflab {

using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

/// Parses "p", "p/q", "-p/q" or a terminating decimal such as "0.25".
inline Rational parse_rational(std::string_view text) {
  std::string s;
  for (char c : text)
    if (!std::isspace(static_cast<unsigned char>(c))) s.push_back(c);
  if (s.empty()) throw std::invalid_argument("empty rational literal");

  auto parse_int = [&](const std::string& digits) -> BigInt {
    if (digits.empty() || digits == "-" || digits == "+")
      throw std::invalid_argument("malformed rational literal '" + std::string(text) + "'");
    std::size_t start = (digits[0] == '-' || digits[0] == '+') ? 1 : 0;
    for (std::size_t i = start; i < digits.size(); ++i)
      if (!std::isdigit(static_cast<unsigned char>(digits[i])))
        throw std::invalid_argument("malformed rational literal '" + std::string(text) + "'");
    return BigInt(digits[0] == '+' ? digits.substr(1) : digits);
  };

  if (auto slash = s.find('/'); slash != std::string::npos) {
    BigInt num = parse_int(s.substr(0, slash));
    BigInt den = parse_int(s.substr(slash + 1));
    if (den == 0) throw std::invalid_argument("zero denominator in '" + std::string(text) + "'");
    return Rational(num, den);
  }
  if (auto dot = s.find('.'); dot != std::string::npos) {
    std::string whole = s.substr(0, dot);
    std::string frac = s.substr(dot + 1);
    bool neg = !whole.empty() && whole[0] == '-';
    if (whole.empty() || whole == "-" || whole == "+") whole += "0";
    if (frac.empty()) frac = "0";
    BigInt w = parse_int(whole);
    BigInt f = parse_int(frac);
    BigInt scale = boost::multiprecision::pow(BigInt(10), static_cast<unsigned>(frac.size()));
    Rational r(boost::multiprecision::abs(w) * scale + f, scale);
    return neg ? Rational(-r) : r;
  }
  return Rational(parse_int(s));
}

inline std::string to_string(const Rational& r) {
  if (denominator(r) == 1) return numerator(r).str();
  return numerator(r).str() + "/" + denominator(r).str();
}

inline double to_double(const Rational& r) { return r.convert_to<double>(); }

/// Comma-separated list of rationals, e.g. "4,-1" or "1/2, 3".
inline std::vector<Rational> parse_rational_list(std::string_view text) {
  std::vector<Rational> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto comma = text.find(',', start);
    auto piece = text.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
    out.push_back(parse_rational(piece));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

/// Exact square root of a nonnegative rational if it is a perfect square.
inline bool exact_sqrt(const Rational& r, Rational& root) {
  if (r < 0) return false;
  BigInt n = numerator(r), d = denominator(r);
  BigInt sn = boost::multiprecision::sqrt(n);
  BigInt sd = boost::multiprecision::sqrt(d);
  if (sn * sn != n || sd * sd != d) return false;
  root = Rational(sn, sd);
  return true;
}

/// Nearest rational with denominator 2^bits, used to turn approximate roots into
/// compact interval endpoints.
inline Rational dyadic_floor(const Rational& r, unsigned bits) {
  BigInt scale = BigInt(1) << bits;
  BigInt scaled = numerator(r) * scale;
  BigInt q = scaled / denominator(r);
  if (q * denominator(r) > scaled) q -= 1;  // floor for negatives
  return Rational(q, scale);
}

}  // namespace krflab
