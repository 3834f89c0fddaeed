#pragma once

// Parabolic complex Monge-Ampère flow on flat tori of complex dimension 1 or 2.
//
//   unnormalized:  ∂φ/∂t = log det(g0 + H(φ)) − log det g0 − f
//   normalized:    ∂φ/∂t = log det(g0 + H(φ)) − log det g0 − f − φ
//
// where H(φ)_{ij̄} = ∂²φ/∂z_i∂z̄_j and Ω = det(g0)·e^f. On a flat torus c1 = 0,
// so the reference form stays ω0 for all t.

#include "krflab/errors.hpp"
#include "krflab/flow_mode.hpp"
#include "krflab/spectral.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace krflab::maflow {

using spectral::PeriodicGrid;
using HermitianMatrix = Eigen::Matrix<std::complex<double>, Eigen::Dynamic, Eigen::Dynamic>;

using krflab::FlowMode;

/// f(x) = Σ c·cos(2π k·x) + s·sin(2π k·x) over the real coordinates.
struct FourierTerm {
  std::vector<int> k;
  double cos_coef = 0.0;
  double sin_coef = 0.0;
};

inline std::vector<double> synthesize(const PeriodicGrid& grid, const std::vector<FourierTerm>& terms) {
  std::vector<double> f(grid.points(), 0.0);
  for (const auto& term : terms)
    if (static_cast<int>(term.k.size()) != grid.real_dim())
      throw std::invalid_argument("Fourier term wavevector must have " + std::to_string(grid.real_dim()) + " entries");
  for (std::size_t p = 0; p < grid.points(); ++p) {
    auto x = grid.coordinates(p);
    double v = 0.0;
    for (const auto& term : terms) {
      double phase = 0.0;
      for (int d = 0; d < grid.real_dim(); ++d) phase += term.k[d] * x[d];
      phase *= 2.0 * std::numbers::pi;
      v += term.cos_coef * std::cos(phase) + term.sin_coef * std::sin(phase);
    }
    f[p] = v;
  }
  return f;
}

/// Pointwise field of n×n Hermitian matrices (n ∈ {1,2}).
struct HermitianField {
  int n = 1;
  std::vector<double> h11;
  std::vector<double> h22;
  std::vector<double> re12;
  std::vector<double> im12;

  std::size_t size() const { return h11.size(); }

  HermitianMatrix at(std::size_t p) const {
    HermitianMatrix m(n, n);
    m(0, 0) = h11[p];
    if (n == 2) {
      m(1, 1) = h22[p];
      m(0, 1) = {re12[p], im12[p]};
      m(1, 0) = std::conj(m(0, 1));
    }
    return m;
  }
};

namespace detail {

// Closed-form 2×2 Hermitian algebra: [[a, c], [conj(c), d]].
struct Herm2 {
  double a, d;
  std::complex<double> c;
  double det() const { return a * d - std::norm(c); }
  double min_eig() const { return 0.5 * (a + d) - std::sqrt(0.25 * (a - d) * (a - d) + std::norm(c)); }
  double max_eig() const { return 0.5 * (a + d) + std::sqrt(0.25 * (a - d) * (a - d) + std::norm(c)); }
  // tr(G^{-1} M) for Hermitian M = [[p, q], [conj(q), r]]
  double trace_inv(double p, double r, std::complex<double> q) const {
    return (d * p + a * r - 2.0 * std::real(c * std::conj(q))) / det();
  }
};

}  // namespace detail

/// Loss of the open condition g0 + H(φ) > 0 at some grid point.
class AdmissibilityError : public DomainError {
 public:
  AdmissibilityError(std::size_t point, double min_eig, double floor)
      : DomainError("admissibility lost at grid point " + std::to_string(point) + ": min eigenvalue " +
                    std::to_string(min_eig) + " < " + std::to_string(floor)),
        point_(point),
        min_eig_(min_eig) {}
  std::size_t point() const { return point_; }
  double min_eigenvalue() const { return min_eig_; }

 private:
  std::size_t point_;
  double min_eig_;
};

/// Flat torus background: g0, the grid and Ω = det(g0)·e^f.
class TorusBackground {
 public:
  TorusBackground(int n, int N, HermitianMatrix g0, std::vector<FourierTerm> f_terms = {})
      : grid_(std::make_shared<const PeriodicGrid>(n, N)),
        symbols_(std::make_shared<const spectral::HessianSymbols>(*grid_)),
        g0_(std::move(g0)),
        f_terms_(std::move(f_terms)) {
    if (g0_.rows() != n || g0_.cols() != n) throw std::invalid_argument("g0 must be an n×n matrix");
    if ((g0_ - g0_.adjoint()).norm() > 1e-14 * (1.0 + g0_.norm())) throw std::invalid_argument("g0 must be Hermitian");
    Eigen::SelfAdjointEigenSolver<HermitianMatrix> es(g0_);
    if (es.eigenvalues().minCoeff() <= 0.0) throw std::invalid_argument("g0 must be positive definite");
    g0_ = 0.5 * (g0_ + g0_.adjoint());
    g0_inv_ = g0_.inverse();
    log_det_g0_ = std::log(std::real(g0_.determinant()));
    f_ = synthesize(*grid_, f_terms_);
    mean_f_ = 0.0;
    mean_exp_f_ = 0.0;
    for (double v : f_) {
      mean_f_ += v;
      mean_exp_f_ += std::exp(v);
    }
    mean_f_ /= static_cast<double>(f_.size());
    mean_exp_f_ /= static_cast<double>(f_.size());
  }

  int n() const { return grid_->complex_dim(); }
  int N() const { return grid_->resolution(); }
  const PeriodicGrid& grid() const { return *grid_; }
  const spectral::HessianSymbols& symbols() const { return *symbols_; }
  const HermitianMatrix& g0() const { return g0_; }
  const HermitianMatrix& g0_inverse() const { return g0_inv_; }
  double log_det_g0() const { return log_det_g0_; }
  const std::vector<double>& f() const { return f_; }
  const std::vector<FourierTerm>& f_terms() const { return f_terms_; }
  bool twisted() const { return !f_terms_.empty(); }
  /// Grid mean of f; the flow data assume it vanishes.
  double mean_f() const { return mean_f_; }
  /// ∫Ω / ∫ω0^n on the grid.
  double omega_volume_ratio() const { return mean_exp_f_; }

  detail::Herm2 g0_entries() const {
    detail::Herm2 g{std::real(g0_(0, 0)), 0.0, 0.0};
    if (n() == 2) {
      g.d = std::real(g0_(1, 1));
      g.c = g0_(0, 1);
    }
    return g;
  }

 private:
  std::shared_ptr<const PeriodicGrid> grid_;
  std::shared_ptr<const spectral::HessianSymbols> symbols_;
  HermitianMatrix g0_;
  HermitianMatrix g0_inv_;
  double log_det_g0_ = 0.0;
  std::vector<FourierTerm> f_terms_;
  std::vector<double> f_;
  double mean_f_ = 0.0;
  double mean_exp_f_ = 1.0;
};

/// H(φ)_{ij̄} = ∂²φ/∂z_i∂z̄_j by spectral differentiation.
inline HermitianField complex_hessian(const TorusBackground& bg, std::span<const double> phi) {
  const auto& grid = bg.grid();
  const auto& sym = bg.symbols();
  auto spec = grid.forward(phi);
  HermitianField h;
  h.n = bg.n();
  h.h11.resize(grid.points());
  grid.apply(spec, sym.diag[0], h.h11);
  if (h.n == 2) {
    h.h22.resize(grid.points());
    h.re12.resize(grid.points());
    h.im12.resize(grid.points());
    grid.apply(spec, sym.diag[1], h.h22);
    grid.apply(spec, sym.off_re, h.re12);
    grid.apply(spec, sym.off_im, h.im12);
  }
  return h;
}

/// Pointwise g̃ = g0 + H.
inline HermitianField metric_from_hessian(const TorusBackground& bg, HermitianField h) {
  auto g = bg.g0_entries();
  for (auto& v : h.h11) v += g.a;
  if (h.n == 2) {
    for (auto& v : h.h22) v += g.d;
    for (auto& v : h.re12) v += g.c.real();
    for (auto& v : h.im12) v += g.c.imag();
  }
  return h;
}

namespace detail {
inline Herm2 point(const HermitianField& g, std::size_t p) {
  if (g.n == 1) return {g.h11[p], 1.0, 0.0};
  return {g.h11[p], g.h22[p], {g.re12[p], g.im12[p]}};
}
inline double min_eig(const HermitianField& g, std::size_t p) {
  return g.n == 1 ? g.h11[p] : point(g, p).min_eig();
}
inline double max_eig(const HermitianField& g, std::size_t p) {
  return g.n == 1 ? g.h11[p] : point(g, p).max_eig();
}
inline double det(const HermitianField& g, std::size_t p) { return g.n == 1 ? g.h11[p] : point(g, p).det(); }
}  // namespace detail

/// Smallest eigenvalue of the metric over the grid and where it occurs.
inline std::pair<double, std::size_t> min_eigenvalue(const HermitianField& g) {
  double lo = std::numeric_limits<double>::infinity();
  std::size_t where = 0;
  for (std::size_t p = 0; p < g.size(); ++p) {
    double e = detail::min_eig(g, p);
    if (!(e >= lo)) {
      lo = e;
      where = p;
    }
  }
  return {lo, where};
}

/// Right-hand side evaluation on a raw potential. Throws AdmissibilityError.
inline std::vector<double> evaluate_rhs(const TorusBackground& bg, std::span<const double> phi, FlowMode mode,
                                        double eps_pos, HermitianField* metric_out = nullptr) {
  auto metric = metric_from_hessian(bg, complex_hessian(bg, phi));
  auto [lo, where] = min_eigenvalue(metric);
  if (!(lo >= eps_pos)) throw AdmissibilityError(where, lo, eps_pos);
  std::vector<double> rhs(phi.size());
  const auto& f = bg.f();
  const double ldg0 = bg.log_det_g0();
  for (std::size_t p = 0; p < rhs.size(); ++p) {
    double v = std::log(detail::det(metric, p)) - ldg0 - f[p];
    if (mode == FlowMode::normalized) v -= phi[p];
    rhs[p] = v;
  }
  if (metric_out) *metric_out = std::move(metric);
  return rhs;
}

/// Snapshot of the quantities tracked by the a priori estimates.
struct DiagnosticsRecord {
  double t = 0.0;
  double sup_phi = 0.0;
  double sup_phidot = 0.0;
  double min_eig = 0.0;
  double max_eig = 0.0;
  double inf_R = 0.0;
  double sup_R = 0.0;
  double sup_trace = 0.0;
  double volume = 0.0;
  double energy = 0.0;
};

/// Potential at a time with the cached flow velocity and metric.
class FlowState {
 public:
  FlowState(const TorusBackground& bg, std::vector<double> phi, FlowMode mode, double t = 0.0, double eps_pos = 1e-8)
      : t_(t), mode_(mode), phi_(std::move(phi)) {
    if (phi_.size() != bg.grid().points()) throw std::invalid_argument("potential does not match the grid");
    phidot_ = evaluate_rhs(bg, phi_, mode_, eps_pos, &metric_);
  }

  static FlowState zero(const TorusBackground& bg, FlowMode mode) {
    return FlowState(bg, std::vector<double>(bg.grid().points(), 0.0), mode);
  }

  double t() const { return t_; }
  FlowMode mode() const { return mode_; }
  const std::vector<double>& phi() const { return phi_; }
  const std::vector<double>& phidot() const { return phidot_; }
  const HermitianField& metric() const { return metric_; }

 private:
  double t_;
  FlowMode mode_;
  std::vector<double> phi_;
  std::vector<double> phidot_;
  HermitianField metric_;
};

/// log(ω^n/Ω) (− φ when normalized): the flow velocity of the state.
inline std::vector<double> ma_rhs(const TorusBackground& bg, const FlowState& state, double eps_pos = 1e-8) {
  return evaluate_rhs(bg, state.phi(), state.mode(), eps_pos);
}

/// Explicit diffusive limit dt = 0.25·h²·λ_min(g̃)/n.
inline double cfl_bound(const TorusBackground& bg, const FlowState& state) {
  double h = bg.grid().spacing();
  return 0.25 * h * h * min_eigenvalue(state.metric()).first / bg.n();
}

/// Step rejected after all retries.
class StepFailure : public DomainError {
 public:
  StepFailure(const std::string& what, double t, double last_dt, double min_eig)
      : DomainError(what), t_(t), last_dt_(last_dt), min_eig_(min_eig) {}
  double time() const { return t_; }
  double last_dt() const { return last_dt_; }
  double min_eigenvalue() const { return min_eig_; }

 private:
  double t_, last_dt_, min_eig_;
};

struct StepResult {
  FlowState state;
  double dt_taken;
  int halvings;
};

/// One classical RK4 step. On admissibility loss the step is retried with dt
/// halved, up to 8 times.
inline StepResult step_detailed(const TorusBackground& bg, const FlowState& state, double dt, double eps_pos = 1e-8) {
  if (!(dt > 0.0)) throw std::invalid_argument("time step must be positive");
  const double limit = cfl_bound(bg, state);
  if (dt > limit * (1.0 + 1e-12))
    throw std::invalid_argument("time step " + std::to_string(dt) + " exceeds the CFL bound " + std::to_string(limit));

  const auto& phi = state.phi();
  const auto& k1 = state.phidot();
  const std::size_t P = phi.size();
  std::vector<double> tmp(P);
  std::string last_error;
  for (int halvings = 0; halvings <= 8; ++halvings, dt *= 0.5) {
    try {
      for (std::size_t p = 0; p < P; ++p) tmp[p] = phi[p] + 0.5 * dt * k1[p];
      auto k2 = evaluate_rhs(bg, tmp, state.mode(), eps_pos);
      for (std::size_t p = 0; p < P; ++p) tmp[p] = phi[p] + 0.5 * dt * k2[p];
      auto k3 = evaluate_rhs(bg, tmp, state.mode(), eps_pos);
      for (std::size_t p = 0; p < P; ++p) tmp[p] = phi[p] + dt * k3[p];
      auto k4 = evaluate_rhs(bg, tmp, state.mode(), eps_pos);
      std::vector<double> next(P);
      for (std::size_t p = 0; p < P; ++p) next[p] = phi[p] + dt / 6.0 * (k1[p] + 2.0 * k2[p] + 2.0 * k3[p] + k4[p]);
      return {FlowState(bg, std::move(next), state.mode(), state.t() + dt, eps_pos), dt, halvings};
    } catch (const AdmissibilityError& e) {
      last_error = e.what();
    }
  }
  throw StepFailure("step failed after 8 halvings at t = " + std::to_string(state.t()) + ": " + last_error, state.t(),
                    dt * 2.0, min_eigenvalue(state.metric()).first);
}

inline FlowState step(const TorusBackground& bg, const FlowState& state, double dt, double eps_pos = 1e-8) {
  return step_detailed(bg, state, dt, eps_pos).state;
}

struct RicciResult {
  HermitianField ricci;
  std::vector<double> scalar;
};

/// R_{ij̄} = −∂_i∂_j̄ log det g̃ and R = tr(g̃^{-1} Ric).
inline RicciResult ricci_and_scalar(const TorusBackground& bg, const FlowState& state) {
  const auto& g = state.metric();
  std::vector<double> logdet(g.size());
  for (std::size_t p = 0; p < g.size(); ++p) logdet[p] = std::log(detail::det(g, p));
  RicciResult out{complex_hessian(bg, logdet), std::vector<double>(g.size())};
  auto& ric = out.ricci;
  for (auto& v : ric.h11) v = -v;
  for (auto& v : ric.h22) v = -v;
  for (auto& v : ric.re12) v = -v;
  for (auto& v : ric.im12) v = -v;
  for (std::size_t p = 0; p < g.size(); ++p) {
    if (g.n == 1) {
      out.scalar[p] = ric.h11[p] / g.h11[p];
    } else {
      out.scalar[p] = detail::point(g, p).trace_inv(ric.h11[p], ric.h22[p], {ric.re12[p], ric.im12[p]});
    }
  }
  return out;
}

inline DiagnosticsRecord diagnostics(const TorusBackground& bg, const FlowState& state) {
  DiagnosticsRecord d;
  d.t = state.t();
  const auto& phi = state.phi();
  const auto& g = state.metric();
  const std::size_t P = phi.size();
  double mean = 0.0;
  for (double v : phi) mean += v;
  mean /= static_cast<double>(P);
  d.min_eig = std::numeric_limits<double>::infinity();
  d.max_eig = -std::numeric_limits<double>::infinity();
  d.sup_trace = -std::numeric_limits<double>::infinity();
  const auto& gi = bg.g0_inverse();
  double energy = 0.0, vol = 0.0;
  for (std::size_t p = 0; p < P; ++p) {
    d.sup_phi = std::max(d.sup_phi, std::abs(phi[p]));
    d.sup_phidot = std::max(d.sup_phidot, std::abs(state.phidot()[p]));
    d.min_eig = std::min(d.min_eig, detail::min_eig(g, p));
    d.max_eig = std::max(d.max_eig, detail::max_eig(g, p));
    double tr;
    if (g.n == 1) {
      tr = std::real(gi(0, 0)) * g.h11[p];
    } else {
      // tr(g0^{-1} g̃) with g0^{-1} Hermitian
      std::complex<double> off(g.re12[p], g.im12[p]);
      tr = std::real(gi(0, 0)) * g.h11[p] + std::real(gi(1, 1)) * g.h22[p] + 2.0 * std::real(gi(1, 0) * off);
    }
    d.sup_trace = std::max(d.sup_trace, tr);
    vol += detail::det(g, p);
    energy += (phi[p] - mean) * (phi[p] - mean);
  }
  d.volume = vol / static_cast<double>(P);
  d.energy = std::sqrt(energy / static_cast<double>(P));
  auto ric = ricci_and_scalar(bg, state);
  auto [lo, hi] = std::minmax_element(ric.scalar.begin(), ric.scalar.end());
  d.inf_R = *lo;
  d.sup_R = *hi;
  return d;
}

/// Fraction of the non-mean spectral energy of φ carried by modes with some
/// |k_d| > N/3. Returns 0 when the non-mean energy is below `floor`.
inline double spectral_tail_fraction(const TorusBackground& bg, std::span<const double> phi, double floor = 1e-24) {
  const auto& grid = bg.grid();
  auto spec = grid.forward(phi);
  const int cut = grid.resolution() / 3;
  double total = 0.0, tail = 0.0;
  for (std::size_t m = 1; m < grid.modes(); ++m) {
    double e = grid.mode_weight(m) * std::norm(spec[m]);
    total += e;
    auto k = grid.raw_wavenumbers(m);
    if (std::any_of(k.begin(), k.end(), [&](int v) { return std::abs(v) > cut; })) tail += e;
  }
  const double norm = static_cast<double>(grid.points()) * static_cast<double>(grid.points());
  if (total / norm < floor) return 0.0;
  return tail / total;
}

struct RunConfig {
  FlowMode mode = FlowMode::unnormalized;
  std::optional<double> dt;  // nullopt: CFL-limited adaptive step
  double t_end = 1.0;
  int record_every = 10;
  double eps_pos = 1e-8;
  double convergence_tol = 1e-10;  // normalized mode early stop on sup|φ̇|
  double tail_limit = 1e-6;
};

struct DiagnosticsSeries {
  FlowMode mode = FlowMode::unnormalized;
  bool twisted = false;  // Ω ≠ det g0
  std::vector<DiagnosticsRecord> records;
};

class SpectralTailError : public DomainError {
 public:
  using DomainError::DomainError;
};

struct RunResult {
  FlowState final_state;
  DiagnosticsSeries series;
  bool converged = false;
  long steps = 0;
};

inline RunResult run(const TorusBackground& bg, FlowState initial, const RunConfig& cfg) {
  if (!(cfg.t_end >= initial.t())) throw std::invalid_argument("t_end precedes the initial time");
  if (cfg.record_every < 1) throw std::invalid_argument("record_every must be positive");
  if (cfg.dt && !(*cfg.dt > 0.0)) throw std::invalid_argument("dt must be positive");
  if (initial.mode() != cfg.mode) throw std::invalid_argument("initial state mode differs from the run mode");

  RunResult out{std::move(initial), {cfg.mode, bg.twisted(), {}}, false, 0};
  auto record = [&](const FlowState& s) {
    if (spectral_tail_fraction(bg, s.phi()) > cfg.tail_limit)
      throw SpectralTailError("spectral tail energy exceeds " + std::to_string(cfg.tail_limit) + " of total at t = " +
                              std::to_string(s.t()) + "; increase the resolution");
    out.series.records.push_back(diagnostics(bg, s));
  };
  record(out.final_state);

  auto sup_abs = [](const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
  };

  const double time_eps = 1e-12 * std::max(1.0, cfg.t_end);
  while (out.final_state.t() < cfg.t_end - time_eps) {
    if (cfg.mode == FlowMode::normalized && sup_abs(out.final_state.phidot()) < cfg.convergence_tol) {
      out.converged = true;
      break;
    }
    double dt = cfl_bound(bg, out.final_state);
    if (cfg.dt) dt = std::min(dt, *cfg.dt);
    dt = std::min(dt, cfg.t_end - out.final_state.t());
    out.final_state = step(bg, out.final_state, dt, cfg.eps_pos);
    ++out.steps;
    if (out.steps % cfg.record_every == 0) record(out.final_state);
  }
  if (cfg.mode == FlowMode::normalized && sup_abs(out.final_state.phidot()) < cfg.convergence_tol) out.converged = true;
  if (out.series.records.back().t < out.final_state.t()) record(out.final_state);
  return out;
}

}  // namespace krflab::maflow
