#pragma once

// Homogeneous reductions of the Kähler-Ricci flow. Each model keeps the metric
// a positive combination of fixed Einstein factors, so the flow collapses to
// linear ODEs on the scales:
//
//   round P1        ω = λ ω_FS,              Ric(ω_FS) = 2ω_FS
//   P1 x P1         ω = λ1 ω_FS ⊕ λ2 ω_FS
//   E x C           ω = a ω_flat ⊕ b ω_hyp,  Ric(ω_flat) = 0, Ric(ω_hyp) = −2ω_hyp
//
// unnormalized ∂ω/∂t = −Ric(ω):       y_i' = s_i
// normalized   ∂ω/∂t = −Ric(ω) − ω:   y_i' = s_i − y_i
// with s_i the negated Einstein constant of the i-th factor.

#include "krflab/cohomology.hpp"
#include "krflab/errors.hpp"
#include "krflab/flow_mode.hpp"
#include "krflab/models.hpp"
#include "krflab/rational.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace krflab::ansatz {

enum class Kind { RoundP1, ProductP1P1, ProductEC };

inline const char* kind_name(Kind k) {
  switch (k) {
    case Kind::RoundP1: return "round-p1";
    case Kind::ProductP1P1: return "p1xp1";
    case Kind::ProductEC: return "product-ec";
  }
  return "?";
}

inline Kind parse_kind(const std::string& s) {
  if (s == "round-p1" || s == "RoundP1") return Kind::RoundP1;
  if (s == "p1xp1" || s == "ProductP1P1") return Kind::ProductP1P1;
  if (s == "product-ec" || s == "ProductEC") return Kind::ProductEC;
  throw std::invalid_argument("unknown ansatz kind '" + s + "' (expected round-p1, p1xp1 or product-ec)");
}

inline std::vector<std::string> coefficient_names(Kind k) {
  switch (k) {
    case Kind::RoundP1: return {"lambda"};
    case Kind::ProductP1P1: return {"lambda1", "lambda2"};
    case Kind::ProductEC: return {"a", "b"};
  }
  return {};
}

struct AnsatzModel {
  Kind kind = Kind::RoundP1;
  std::vector<Rational> scales;
  FlowMode mode = FlowMode::unnormalized;
};

inline void validate(const AnsatzModel& m) {
  const std::size_t want = m.kind == Kind::RoundP1 ? 1 : 2;
  if (m.scales.size() != want)
    throw std::invalid_argument(std::string(kind_name(m.kind)) + " takes " + std::to_string(want) + " scale(s)");
  for (const auto& s : m.scales)
    if (s <= 0) throw std::invalid_argument("initial scales must be positive, got " + to_string(s));
}

/// y' = −decay·y + source
struct OdeSystem {
  std::vector<Rational> source;
  int decay = 0;
};

inline OdeSystem reduce(const AnsatzModel& m) {
  validate(m);
  OdeSystem sys;
  switch (m.kind) {
    case Kind::RoundP1: sys.source = {Rational(-2)}; break;
    case Kind::ProductP1P1: sys.source = {Rational(-2), Rational(-2)}; break;
    case Kind::ProductEC: sys.source = {Rational(0), Rational(2)}; break;
  }
  sys.decay = m.mode == FlowMode::normalized ? 1 : 0;
  return sys;
}

/// Exact solution of the reduced system at time t.
inline std::vector<double> closed_form(const AnsatzModel& m, double t) {
  auto sys = reduce(m);
  std::vector<double> y(m.scales.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    double y0 = to_double(m.scales[i]), s = to_double(sys.source[i]);
    y[i] = sys.decay == 0 ? y0 + s * t : s + (y0 - s) * std::exp(-t);
  }
  return y;
}

/// Exact extinction time of the unnormalized reduction, the first zero of
/// y0_i + s_i t. Empty when no scale ever reaches zero.
inline std::optional<Rational> exact_extinction_time(const AnsatzModel& m) {
  auto sys = reduce(m);
  if (sys.decay != 0) throw DomainError("exact extinction times are rational only for the unnormalized flow");
  std::optional<Rational> best;
  for (std::size_t i = 0; i < m.scales.size(); ++i) {
    if (sys.source[i] >= 0) continue;
    Rational t = m.scales[i] / -sys.source[i];
    if (!best || t < *best) best = t;
  }
  return best;
}

/// Extinction time of either mode in closed form (normalized: y_i(t) = 0 at
/// t = log(1 + y0_i/|s_i|)).
inline std::optional<double> extinction_time(const AnsatzModel& m) {
  if (m.mode == FlowMode::unnormalized) {
    auto t = exact_extinction_time(m);
    if (!t) return std::nullopt;
    return to_double(*t);
  }
  auto sys = reduce(m);
  std::optional<double> best;
  for (std::size_t i = 0; i < m.scales.size(); ++i) {
    if (sys.source[i] >= 0) continue;
    double t = std::log1p(to_double(m.scales[i]) / -to_double(sys.source[i]));
    if (!best || t < *best) best = t;
  }
  return best;
}

struct Sample {
  double t;
  std::vector<double> y;
};

struct AnsatzTrajectory {
  AnsatzModel model;
  std::vector<Sample> samples;
  std::optional<double> extinction;  // located by bisection when the flow stops
  double max_closed_form_error = 0.0;
};

/// Volume in units of the product of the reference factor volumes.
inline double volume(const std::vector<double>& y) {
  double v = 1.0;
  for (double x : y) v *= x;
  return v;
}

/// Diameter proxy of the first factor (the fiber for E x C).
inline double fiber_diameter(const std::vector<double>& y) { return std::sqrt(std::max(y.front(), 0.0)); }

namespace detail {

inline std::vector<double> rk4(const OdeSystem& sys, const std::vector<double>& y, double h) {
  auto f = [&](const std::vector<double>& v) {
    std::vector<double> d(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) d[i] = to_double(sys.source[i]) - sys.decay * v[i];
    return d;
  };
  auto axpy = [](const std::vector<double>& a, double s, const std::vector<double>& b) {
    std::vector<double> r(a);
    for (std::size_t i = 0; i < r.size(); ++i) r[i] += s * b[i];
    return r;
  };
  auto k1 = f(y), k2 = f(axpy(y, h / 2, k1)), k3 = f(axpy(y, h / 2, k2)), k4 = f(axpy(y, h, k3));
  std::vector<double> out(y);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += h / 6 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
  return out;
}

inline double min_of(const std::vector<double>& y) { return *std::min_element(y.begin(), y.end()); }

}  // namespace detail

/// Fixed-step RK4 on the reduced system. Stops at extinction, located by
/// bisection on the last step to width 1e-12.
inline AnsatzTrajectory integrate(const AnsatzModel& m, double t_end, double dt, int record_every = 1) {
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
  if (!(t_end >= 0.0)) throw std::invalid_argument("t_end must be nonnegative");
  if (record_every < 1) throw std::invalid_argument("record_every must be positive");
  auto sys = reduce(m);
  AnsatzTrajectory tr{m, {}, std::nullopt, 0.0};
  std::vector<double> y;
  for (const auto& s : m.scales) y.push_back(to_double(s));
  double t = 0.0;
  auto record = [&](double time, const std::vector<double>& v) {
    tr.samples.push_back({time, v});
    auto exact = closed_form(m, time);
    for (std::size_t i = 0; i < v.size(); ++i)
      tr.max_closed_form_error = std::max(tr.max_closed_form_error, std::abs(v[i] - exact[i]));
  };
  record(t, y);
  const long steps = static_cast<long>(std::ceil(t_end / dt - 1e-9));
  for (long k = 1; k <= steps; ++k) {
    const double h = std::min(dt, t_end - t);
    auto next = detail::rk4(sys, y, h);
    if (detail::min_of(next) <= 0.0) {
      double lo = 0.0, hi = h;
      while (hi - lo > 1e-12 && hi - lo > 4 * std::numeric_limits<double>::epsilon() * (t + hi)) {
        double mid = 0.5 * (lo + hi);
        (detail::min_of(detail::rk4(sys, y, mid)) > 0.0 ? lo : hi) = mid;
      }
      tr.extinction = t + 0.5 * (lo + hi);
      return tr;
    }
    y = std::move(next);
    t = (k == steps) ? t_end : k * dt;
    if (k % record_every == 0 || k == steps) record(t, y);
  }
  return tr;
}

/// |Ric(bω_hyp) + bω_hyp| per unit ω_hyp along a normalized E x C trajectory.
inline std::vector<std::pair<double, double>> einstein_residual(const AnsatzTrajectory& tr) {
  if (tr.model.kind != Kind::ProductEC || tr.model.mode != FlowMode::normalized)
    throw DomainError("Einstein residual is defined for the normalized product-ec model");
  std::vector<std::pair<double, double>> out;
  for (const auto& s : tr.samples) out.emplace_back(s.t, std::abs(s.y[1] - 2.0));
  return out;
}

struct CollapseRow {
  double t;
  double fiber_rescaled;  // e^t·a
  double base;            // b
  double residual;        // |b − 2|
  double rate_bound;      // |λ_C − 2|·e^{−t/8}
  bool schwarz_ok;        // b ≥ min(λ_C, 2)
};

inline std::vector<CollapseRow> collapse_profile(const AnsatzTrajectory& tr) {
  if (tr.model.kind != Kind::ProductEC || tr.model.mode != FlowMode::normalized)
    throw DomainError("collapse profile is defined for the normalized product-ec model");
  const double lc = to_double(tr.model.scales[1]);
  const double floor = std::min(lc, 2.0);
  std::vector<CollapseRow> out;
  for (const auto& s : tr.samples) {
    double res = std::abs(s.y[1] - 2.0);
    out.push_back({s.t, std::exp(s.t) * s.y[0], s.y[1], res, std::abs(lc - 2.0) * std::exp(-s.t / 8.0),
                   s.y[1] >= floor * (1.0 - 1e-12)});
  }
  return out;
}

/// Cohomology model carrying the same classes: the scales are the class
/// coordinates in the basis of models.hpp.
inline cohomology::ManifoldModel cohomology_model(Kind k) {
  switch (k) {
    case Kind::RoundP1: return cohomology::riemann_surface_genus0();
    case Kind::ProductP1P1: return cohomology::product_p1p1();
    case Kind::ProductEC: return cohomology::product_ec();
  }
  throw std::logic_error("unreachable");
}

struct CrossCheck {
  std::optional<Rational> ansatz_T;     // empty: infinite
  std::optional<double> numeric_T;      // bisection on the RK4 trajectory
  cohomology::ExistenceTime cohomology_T;
  bool equal = false;
};

inline CrossCheck crosscheck_T(const AnsatzModel& m, double dt = 1e-3) {
  AnsatzModel un = m;
  un.mode = FlowMode::unnormalized;
  CrossCheck c;
  c.ansatz_T = exact_extinction_time(un);
  c.cohomology_T = cohomology::max_existence_time(cohomology_model(m.kind), cohomology::ClassVector(m.scales));
  if (c.ansatz_T) {
    auto tr = integrate(un, to_double(*c.ansatz_T) + 2 * dt, dt, 1 << 30);
    c.numeric_T = tr.extinction;
    c.equal = c.cohomology_T.exact() && !c.cohomology_T.infinite && c.cohomology_T.value() == *c.ansatz_T &&
              tr.extinction && std::abs(*tr.extinction - to_double(*c.ansatz_T)) <= 1e-10;
  } else {
    c.equal = c.cohomology_T.infinite;
  }
  return c;
}

/// Largest deviation between the normalized RK4 trajectory and the rescaled
/// unnormalized closed form y(s)/(1+s) at t = log(1+s).
inline double normalization_consistency(const AnsatzModel& m, double t_end, double dt) {
  AnsatzModel nm = m, um = m;
  nm.mode = FlowMode::normalized;
  um.mode = FlowMode::unnormalized;
  auto tr = integrate(nm, t_end, dt);
  double worst = 0.0;
  for (const auto& s : tr.samples) {
    double u = std::expm1(s.t);
    auto y = closed_form(um, u);
    for (std::size_t i = 0; i < y.size(); ++i) worst = std::max(worst, std::abs(s.y[i] - y[i] / (1.0 + u)));
  }
  return worst;
}

}  // namespace krflab::ansatz
