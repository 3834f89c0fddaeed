#pragma once

// Built-in manifold models.
//
// Units: intersection numbers are in units of (2π)^n, so ∫_X ω_FS = 1 on CP^1,
// and class coordinates are the coefficients of the named Kähler forms.

#include "krflab/cohomology.hpp"

#include <string>
#include <vector>

namespace krflab::cohomology {

namespace detail {
inline SymmetricForm lin(std::vector<Rational> c) { return SymmetricForm::linear(std::move(c)); }
}  // namespace detail

/// CP^1 with basis [ω_FS]; Ric(ω_FS) = 2ω_FS so 2πc1 = 2.
inline ManifoldModel riemann_surface_genus0() {
  ManifoldModel m;
  m.name = "riemann-surface:0";
  m.n = 1;
  m.basis = {"omega_FS"};
  m.tensor = detail::lin({1});
  m.c1twopi = ClassVector{2};
  m.cone.constraints = {{"lambda>0", detail::lin({1})}};
  m.kodaira = std::nullopt;
  m.notes = "CP^1; class lambda*[omega_FS]; volume in units of 2*pi";
  return m;
}

/// Genus g >= 2 curve with basis [ω_hyp]; Ric(ω_hyp) = −2ω_hyp.
inline ManifoldModel riemann_surface_hyperbolic(int genus = 2) {
  if (genus < 2) throw std::invalid_argument("hyperbolic model needs genus >= 2");
  ManifoldModel m;
  m.name = "riemann-surface:" + std::to_string(genus);
  m.n = 1;
  m.basis = {"omega_hyp"};
  m.tensor = detail::lin({Rational(genus - 1)});
  m.c1twopi = ClassVector{-2};
  m.cone.constraints = {{"lambda>0", detail::lin({1})}};
  m.kodaira = 1;
  m.notes = "genus " + std::to_string(genus) + " curve; class lambda*[omega_hyp]; Gauss-Bonnet gives volume g-1 in units of 2*pi";
  return m;
}

/// E_1 x ... x E_n restricted to the span of the factor classes e_i.
inline ManifoldModel torus(int n) {
  if (n < 1) throw std::invalid_argument("torus dimension must be positive");
  ManifoldModel m;
  m.name = "torus:" + std::to_string(n);
  m.n = n;
  for (int i = 0; i < n; ++i) m.basis.push_back("e" + std::to_string(i + 1));
  const auto dim = static_cast<std::size_t>(n);
  m.tensor = SymmetricForm(n, dim);
  std::vector<std::size_t> all(dim);
  for (std::size_t i = 0; i < dim; ++i) all[i] = i;
  m.tensor.set(all, 1);
  m.c1twopi = ClassVector::zero(dim);
  for (std::size_t i = 0; i < dim; ++i) {
    std::vector<Rational> c(dim, 0);
    c[i] = 1;
    m.cone.constraints.push_back({"lambda" + std::to_string(i + 1) + ">0", detail::lin(c)});
    if (n >= 2) m.catalogue.push_back({"E" + std::to_string(i + 1), 1, detail::lin(c)});
  }
  m.kodaira = 0;
  m.notes = "flat torus, diagonal classes sum lambda_i e_i with int_{E_i} e_i = 1; full H^{1,1} not modelled";
  return m;
}

/// CP^1 x CP^1 with a = π1*[ω_FS], b = π2*[ω_FS].
inline ManifoldModel product_p1p1() {
  ManifoldModel m;
  m.name = "p1xp1";
  m.n = 2;
  m.basis = {"a", "b"};
  m.tensor = SymmetricForm(2, 2);
  m.tensor.set({0, 1}, 1);
  m.c1twopi = ClassVector{2, 2};
  m.cone.constraints = {{"lambda1>0", detail::lin({1, 0})}, {"lambda2>0", detail::lin({0, 1})}};
  m.catalogue = {{"P1x{pt}", 1, detail::lin({1, 0})},
                 {"{pt}xP1", 1, detail::lin({0, 1})},
                 {"diagonal", 1, detail::lin({1, 1})}};
  m.kodaira = std::nullopt;
  m.notes = "class lambda1*a + lambda2*b; int a*b = 1 in units of (2*pi)^2";
  return m;
}

/// Blow-up of CP^2 at a point in the scaled basis a' = 2πa, b' = 2πb, where
/// a = π*[ω_FS]/2π and b is dual to E. Coordinates μ = λ/(2π).
inline ManifoldModel blowup_p2() {
  ManifoldModel m;
  m.name = "blowup-p2";
  m.n = 2;
  m.basis = {"a'", "b'"};
  m.tensor = SymmetricForm(2, 2);
  m.tensor.set({0, 0}, 1);
  m.tensor.set({1, 1}, -1);
  m.c1twopi = ClassVector{3, -1};
  m.cone.constraints = {{"volume>0", m.tensor},
                        {"int_H>0", detail::lin({1, 0})},
                        {"int_E>0", detail::lin({0, -1})}};
  m.catalogue = {{"E", 1, detail::lin({0, -1})},
                 {"H", 1, detail::lin({1, 0})},
                 {"strict-transform-line-through-p", 1, detail::lin({1, 1})}};
  m.kodaira = std::nullopt;
  m.notes =
      "geometric class lambda1*a + lambda2*b has coordinates mu = (lambda1, lambda2)/(2*pi); "
      "times are identical in both variables; volumes carry a factor (2*pi)^2";
  return m;
}

/// E x C with C of genus 2: basis e (flat on E), c ([ω_hyp] on C).
inline ManifoldModel product_ec() {
  ManifoldModel m;
  m.name = "product-ec";
  m.n = 2;
  m.basis = {"e", "c"};
  m.tensor = SymmetricForm(2, 2);
  m.tensor.set({0, 1}, 1);
  m.c1twopi = ClassVector{0, -2};
  m.cone.constraints = {{"lambda_E>0", detail::lin({1, 0})}, {"lambda_C>0", detail::lin({0, 1})}};
  m.catalogue = {{"Ex{pt}", 1, detail::lin({1, 0})}, {"{pt}xC", 1, detail::lin({0, 1})}};
  m.kodaira = 1;
  m.notes = "class lambda_E*e + lambda_C*c; Ric(omega_flat) = 0, Ric(omega_hyp) = -2 omega_hyp";
  return m;
}

/// The six built-in families at their default parameters.
inline std::vector<ManifoldModel> builtin_catalogue() {
  return {riemann_surface_genus0(), riemann_surface_hyperbolic(2), torus(1), product_p1p1(), blowup_p2(),
          product_ec()};
}

/// Resolves "cp1", "riemann-surface:<g>", "torus:<n>", "p1xp1", "blowup-p2",
/// "product-ec". Throws std::invalid_argument for unknown names.
inline ManifoldModel builtin_model(const std::string& name) {
  auto param = [&](const std::string& prefix) -> std::optional<int> {
    if (name.rfind(prefix, 0) != 0) return std::nullopt;
    try {
      std::size_t used = 0;
      int v = std::stoi(name.substr(prefix.size()), &used);
      if (used != name.size() - prefix.size()) return std::nullopt;
      return v;
    } catch (const std::exception&) {
      return std::nullopt;
    }
  };
  if (name == "cp1") return riemann_surface_genus0();
  if (name == "p1xp1") return product_p1p1();
  if (name == "blowup-p2") return blowup_p2();
  if (name == "product-ec") return product_ec();
  if (auto g = param("riemann-surface:")) {
    if (*g == 0) return riemann_surface_genus0();
    if (*g == 1) return torus(1);
    if (*g >= 2) return riemann_surface_hyperbolic(*g);
  }
  if (auto n = param("torus:"); n && *n >= 1 && *n <= 6) return torus(*n);
  throw std::invalid_argument("unknown model '" + name + "'");
}

}  // namespace krflab::cohomology
