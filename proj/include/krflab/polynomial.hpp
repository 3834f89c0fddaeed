#pragma once

// Univariate polynomials over the rationals and first-positive-root isolation.

#include "krflab/rational.hpp"

#include <optional>
#include <utility>
#include <vector>

namespace krflab {

/// Dense coefficient list, coeffs[k] multiplies t^k. Trailing zeros are trimmed.
class Polynomial {
 public:
  Polynomial() = default;
  explicit Polynomial(std::vector<Rational> coeffs) : coeffs_(std::move(coeffs)) { trim(); }

  int degree() const { return coeffs_.empty() ? -1 : static_cast<int>(coeffs_.size()) - 1; }
  bool is_zero() const { return coeffs_.empty(); }
  const std::vector<Rational>& coeffs() const { return coeffs_; }
  const Rational& leading() const { return coeffs_.back(); }
  Rational coeff(std::size_t k) const { return k < coeffs_.size() ? coeffs_[k] : Rational(0); }

  Rational operator()(const Rational& t) const {
    Rational acc = 0;
    for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * t + *it;
    return acc;
  }

  Polynomial derivative() const {
    std::vector<Rational> d;
    for (std::size_t k = 1; k < coeffs_.size(); ++k) d.push_back(coeffs_[k] * static_cast<int>(k));
    return Polynomial(std::move(d));
  }

  friend Polynomial operator-(const Polynomial& p) {
    std::vector<Rational> c = p.coeffs_;
    for (auto& x : c) x = -x;
    return Polynomial(std::move(c));
  }

  /// Euclidean division; divisor must be nonzero.
  static std::pair<Polynomial, Polynomial> divmod(const Polynomial& num, const Polynomial& den) {
    std::vector<Rational> rem = num.coeffs_;
    int dd = den.degree();
    if (num.degree() < dd) return {Polynomial(), num};
    std::vector<Rational> quot(num.degree() - dd + 1);
    for (int k = num.degree() - dd; k >= 0; --k) {
      Rational q = rem[k + dd] / den.leading();
      quot[k] = q;
      for (int j = 0; j <= dd; ++j) rem[k + j] -= q * den.coeffs_[j];
    }
    rem.resize(dd);
    return {Polynomial(std::move(quot)), Polynomial(std::move(rem))};
  }

  static Polynomial gcd(Polynomial a, Polynomial b) {
    while (!b.is_zero()) {
      auto r = divmod(a, b).second;
      a = std::move(b);
      b = std::move(r);
    }
    if (a.is_zero()) return a;
    Rational lead = a.leading();
    std::vector<Rational> c = a.coeffs_;
    for (auto& x : c) x /= lead;
    return Polynomial(std::move(c));
  }

 private:
  void trim() {
    while (!coeffs_.empty() && coeffs_.back() == 0) coeffs_.pop_back();
  }
  std::vector<Rational> coeffs_;
};

/// A root location: exact when lo == hi, otherwise an isolating interval.
struct RootBracket {
  Rational lo;
  Rational hi;
  bool exact() const { return lo == hi; }
  Rational mid() const { return (lo + hi) / 2; }
};

namespace detail {

inline std::vector<Polynomial> sturm_chain(const Polynomial& p) {
  std::vector<Polynomial> chain{p, p.derivative()};
  while (!chain.back().is_zero()) {
    auto r = Polynomial::divmod(chain[chain.size() - 2], chain.back()).second;
    if (r.is_zero()) break;
    chain.push_back(-r);
  }
  return chain;
}

inline int sign_changes(const std::vector<Polynomial>& chain, const Rational& t) {
  int changes = 0, prev = 0;
  for (const auto& q : chain) {
    Rational v = q(t);
    int s = v > 0 ? 1 : (v < 0 ? -1 : 0);
    if (s == 0) continue;
    if (prev != 0 && s != prev) ++changes;
    prev = s;
  }
  return changes;
}

// Number of distinct roots in the half-open interval (a, b] of a square-free p.
inline int roots_in(const std::vector<Polynomial>& chain, const Rational& a, const Rational& b) {
  return sign_changes(chain, a) - sign_changes(chain, b);
}

}  // namespace detail

/// Smallest root t > 0 of p, if any. Degree <= 1 and degree 2 with a square
/// discriminant are solved exactly; everything else is isolated by Sturm
/// sequences and bisected down to `width`.
inline std::optional<RootBracket> first_positive_root(const Polynomial& p,
                                                      const Rational& width = Rational(1, 1000000000000LL)) {
  if (p.degree() <= 0) return std::nullopt;
  if (p.degree() == 1) {
    Rational r = -p.coeff(0) / p.coeff(1);
    if (r > 0) return RootBracket{r, r};
    return std::nullopt;
  }
  if (p.degree() == 2) {
    const Rational a = p.coeff(2), b = p.coeff(1), c = p.coeff(0);
    Rational disc = b * b - 4 * a * c;
    if (disc < 0) return std::nullopt;
    Rational s;
    if (exact_sqrt(disc, s)) {
      Rational r1 = (-b - s) / (2 * a), r2 = (-b + s) / (2 * a);
      if (r1 > r2) std::swap(r1, r2);
      if (r1 > 0) return RootBracket{r1, r1};
      if (r2 > 0) return RootBracket{r2, r2};
      return std::nullopt;
    }
  }

  // Square-free part keeps Sturm counting valid for repeated roots.
  Polynomial g = Polynomial::gcd(p, p.derivative());
  Polynomial sf = g.degree() > 0 ? Polynomial::divmod(p, g).first : p;
  auto chain = detail::sturm_chain(sf);

  // Cauchy bound on root magnitudes.
  Rational bound = 0;
  for (int k = 0; k < sf.degree(); ++k) {
    Rational q = sf.coeff(k) / sf.leading();
    if (q < 0) q = -q;
    if (q > bound) bound = q;
  }
  bound += 1;

  Rational lo = 0, hi = bound;
  if (detail::roots_in(chain, lo, hi) == 0) return std::nullopt;
  while (hi - lo > width) {
    Rational m = (lo + hi) / 2;
    if (sf(m) == 0 && detail::roots_in(chain, lo, m) == 1) return RootBracket{m, m};
    if (detail::roots_in(chain, lo, m) > 0)
      hi = m;
    else
      lo = m;
  }
  if (sf(hi) == 0) return RootBracket{hi, hi};
  return RootBracket{lo, hi};
}

}  // namespace krflab
