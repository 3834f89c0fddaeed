#pragma once

// Reference computations that share no code with the FFT solver: dense
// periodic differentiation matrices, a Newton/CG solve of the stationary
// normalized equation and the linearized spectrum around it.

#include "krflab/maflow.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

namespace krflab::oracles {

using maflow::FourierTerm;
using maflow::HermitianMatrix;
using Dense = Eigen::MatrixXd;

constexpr double pi = std::numbers::pi;

/// Periodic spectral derivative matrices on N points of [0,1), built from the
/// trigonometric interpolant with the Nyquist mode dropped.
inline Dense first_derivative_matrix(int N) {
  Dense D = Dense::Zero(N, N);
  for (int j = 0; j < N; ++j)
    for (int l = 0; l < N; ++l) {
      double s = 0.0;
      for (int k = 1; k < N / 2; ++k) s += 2.0 * (2 * pi * k) * -std::sin(2 * pi * k * (j - l) / N);
      D(j, l) = s / N;
    }
  return D;
}

inline Dense second_derivative_matrix(int N) {
  Dense D = Dense::Zero(N, N);
  for (int j = 0; j < N; ++j)
    for (int l = 0; l < N; ++l) {
      double s = 0.0;
      for (int k = 1; k < N / 2; ++k) s += 2.0 * -(2 * pi * k) * (2 * pi * k) * std::cos(2 * pi * k * (j - l) / N);
      D(j, l) = s / N;
    }
  return D;
}

/// Applies a 1-D operator along one real axis of a row-major field.
inline std::vector<double> apply_axis(const std::vector<double>& f, int N, int rank, int axis, const Dense& M) {
  std::size_t stride = 1;
  for (int d = rank - 1; d > axis; --d) stride *= N;
  const std::size_t block = stride * N;
  std::vector<double> out(f.size(), 0.0);
  Eigen::VectorXd line(N);
  for (std::size_t base = 0; base < f.size(); base += block)
    for (std::size_t off = 0; off < stride; ++off) {
      for (int i = 0; i < N; ++i) line[i] = f[base + off + i * stride];
      Eigen::VectorXd r = M * line;
      for (int i = 0; i < N; ++i) out[base + off + i * stride] = r[i];
    }
  return out;
}

/// Dense-matrix differentiation on the grid [0,1)^{2n}.
class DenseCalculus {
 public:
  DenseCalculus(int n, int N) : n_(n), N_(N), D1_(first_derivative_matrix(N)), D2_(second_derivative_matrix(N)) {
    points_ = 1;
    for (int d = 0; d < 2 * n; ++d) points_ *= N;
  }
  int n() const { return n_; }
  int N() const { return N_; }
  std::size_t points() const { return points_; }

  std::vector<double> coordinates(std::size_t p) const {
    std::vector<double> x(2 * n_);
    for (int d = 2 * n_ - 1; d >= 0; --d) {
      x[d] = static_cast<double>(p % N_) / N_;
      p /= N_;
    }
    return x;
  }

  std::vector<double> d2(const std::vector<double>& f, int axis) const { return apply_axis(f, N_, 2 * n_, axis, D2_); }
  std::vector<double> d11(const std::vector<double>& f, int a, int b) const {
    return apply_axis(apply_axis(f, N_, 2 * n_, a, D1_), N_, 2 * n_, b, D1_);
  }

  /// ∂²/∂z_i∂z̄_j = ¼[∂x_i∂x_j + ∂y_i∂y_j + i(∂x_i∂y_j − ∂y_i∂x_j)], per point.
  std::vector<HermitianMatrix> complex_hessian(const std::vector<double>& phi) const {
    std::vector<HermitianMatrix> H(points_, HermitianMatrix::Zero(n_, n_));
    for (int i = 0; i < n_; ++i) {
      auto xx = d2(phi, 2 * i), yy = d2(phi, 2 * i + 1);
      for (std::size_t p = 0; p < points_; ++p) H[p](i, i) = 0.25 * (xx[p] + yy[p]);
    }
    if (n_ == 2) {
      auto xx = d11(phi, 0, 2), yy = d11(phi, 1, 3), xy = d11(phi, 0, 3), yx = d11(phi, 1, 2);
      for (std::size_t p = 0; p < points_; ++p) {
        std::complex<double> h(0.25 * (xx[p] + yy[p]), 0.25 * (xy[p] - yx[p]));
        H[p](0, 1) = h;
        H[p](1, 0) = std::conj(h);
      }
    }
    return H;
  }

  /// Δ_real/4 (the trace of the complex Hessian against the identity).
  std::vector<double> quarter_laplacian(const std::vector<double>& f) const {
    std::vector<double> out(points_, 0.0);
    for (int d = 0; d < 2 * n_; ++d) {
      auto dd = d2(f, d);
      for (std::size_t p = 0; p < points_; ++p) out[p] += 0.25 * dd[p];
    }
    return out;
  }

  std::vector<double> sample(const std::vector<FourierTerm>& terms) const {
    std::vector<double> f(points_, 0.0);
    for (std::size_t p = 0; p < points_; ++p) {
      auto x = coordinates(p);
      for (const auto& t : terms) {
        double ph = 0.0;
        for (int d = 0; d < 2 * n_; ++d) ph += t.k[d] * x[d];
        f[p] += t.cos_coef * std::cos(2 * pi * ph) + t.sin_coef * std::sin(2 * pi * ph);
      }
    }
    return f;
  }

 private:
  int n_, N_;
  std::size_t points_;
  Dense D1_, D2_;
};

/// log det(g0 + H(φ)) − log det g0 − f (− φ when normalized), through dense matrices.
inline std::vector<double> flow_velocity(const DenseCalculus& calc, const HermitianMatrix& g0, const std::vector<double>& f,
                                         const std::vector<double>& phi, bool normalized) {
  auto H = calc.complex_hessian(phi);
  const double ldg0 = std::log(g0.determinant().real());
  std::vector<double> out(phi.size());
  for (std::size_t p = 0; p < phi.size(); ++p) {
    HermitianMatrix g = g0 + H[p];
    out[p] = std::log(g.determinant().real()) - ldg0 - f[p] - (normalized ? phi[p] : 0.0);
  }
  return out;
}

/// Lowest decay rate of a nonzero Fourier mode for φ̇ = tr(g0^{-1} H(φ)):
/// on e^{2πi k·x}, ∂_{z_i}∂_{z̄_j} acts as −π²(kx_i − i ky_i)(kx_j + i ky_j).
inline double heat_rate(const HermitianMatrix& g0, int N) {
  const int n = static_cast<int>(g0.rows());
  HermitianMatrix gi = g0.inverse();
  double best = std::numeric_limits<double>::infinity();
  const int kmax = N / 2 - 1;
  std::vector<int> k(2 * n, -kmax);
  for (;;) {
    bool nonzero = false;
    for (int v : k) nonzero |= v != 0;
    if (nonzero) {
      std::complex<double> tr = 0.0;
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          tr += gi(j, i) * std::complex<double>(k[2 * i], -k[2 * i + 1]) * std::complex<double>(k[2 * j], k[2 * j + 1]);
      best = std::min(best, pi * pi * tr.real());
    }
    int d = 0;
    while (d < 2 * n && ++k[d] > kmax) k[d++] = -kmax;
    if (d == 2 * n) break;
  }
  return best;
}

struct EllipticSolution {
  std::vector<double> phi;
  double residual = 0.0;  // sup norm
  int newton_iterations = 0;
};

/// Conjugate gradients for (−¼Δ + w)δ = b with w > 0 pointwise.
inline std::vector<double> solve_shifted(const DenseCalculus& calc, const std::vector<double>& w, const std::vector<double>& b,
                                         double tol) {
  const std::size_t P = b.size();
  auto apply = [&](const std::vector<double>& v) {
    auto l = calc.quarter_laplacian(v);
    for (std::size_t p = 0; p < P; ++p) l[p] = -l[p] + w[p] * v[p];
    return l;
  };
  auto dot = [&](const std::vector<double>& a, const std::vector<double>& c) {
    double s = 0.0;
    for (std::size_t p = 0; p < P; ++p) s += a[p] * c[p];
    return s;
  };
  std::vector<double> x(P, 0.0), r = b, d = b;
  double rr = dot(r, r);
  const double stop = tol * tol * std::max(dot(b, b), 1e-300);
  for (int it = 0; it < 5000 && rr > stop; ++it) {
    auto Ad = apply(d);
    double alpha = rr / dot(d, Ad);
    for (std::size_t p = 0; p < P; ++p) {
      x[p] += alpha * d[p];
      r[p] -= alpha * Ad[p];
    }
    double rr_new = dot(r, r);
    for (std::size_t p = 0; p < P; ++p) d[p] = r[p] + rr_new / rr * d[p];
    rr = rr_new;
  }
  return x;
}

/// Newton iteration for log((g0 + ¼Δφ)/g0) = φ + f on a one-dimensional torus
/// with scalar g0. Jacobian solves use (−¼Δ + w)δ = w·F, w = g0 + ¼Δφ.
inline EllipticSolution solve_stationary(const DenseCalculus& calc, double g0, const std::vector<double>& f,
                                         double tol = 1e-13) {
  if (calc.n() != 1) throw std::invalid_argument("stationary oracle is one-dimensional");
  HermitianMatrix G(1, 1);
  G(0, 0) = g0;
  EllipticSolution sol{std::vector<double>(calc.points(), 0.0), 0.0, 0};
  for (int it = 0; it < 50; ++it) {
    auto F = flow_velocity(calc, G, f, sol.phi, true);
    double sup = 0.0;
    for (double v : F) sup = std::max(sup, std::abs(v));
    sol.residual = sup;
    if (sup < tol) break;
    auto lap = calc.quarter_laplacian(sol.phi);
    std::vector<double> w(F.size()), rhs(F.size());
    for (std::size_t p = 0; p < F.size(); ++p) {
      w[p] = g0 + lap[p];
      rhs[p] = w[p] * F[p];
    }
    auto delta = solve_shifted(calc, w, rhs, 1e-14);
    for (std::size_t p = 0; p < F.size(); ++p) sol.phi[p] += delta[p];
    sol.newton_iterations = it + 1;
  }
  return sol;
}

struct LinearizedSpectrum {
  std::vector<double> rates;        // ascending decay rates 1 + μ_k
  std::vector<double> projections;  // |⟨v_k, φ0 − φ∞⟩_w|
  double slowest_excited = 0.0;
};

/// Decay rates of the normalized flow linearized at φ∞:
///   δ̇ = (¼Δδ)/w − δ,   w = g0 + ¼Δφ∞,
/// i.e. −¼Δ v = μ w v with rate 1 + μ; returns the slowest rate whose mode
/// carries a non-negligible share of the initial perturbation.
inline LinearizedSpectrum linearized_spectrum(const DenseCalculus& calc, double g0, const std::vector<double>& phi_inf,
                                              const std::vector<double>& phi0, double rel_threshold = 1e-6) {
  const std::size_t P = calc.points();
  Dense A(P, P);
  for (std::size_t c = 0; c < P; ++c) {
    std::vector<double> e(P, 0.0);
    e[c] = 1.0;
    auto col = calc.quarter_laplacian(e);
    for (std::size_t r = 0; r < P; ++r) A(r, c) = -col[r];
  }
  A = 0.5 * (A + A.transpose());
  auto lap = calc.quarter_laplacian(phi_inf);
  Dense B = Dense::Zero(P, P);
  for (std::size_t p = 0; p < P; ++p) B(p, p) = g0 + lap[p];
  Eigen::GeneralizedSelfAdjointEigenSolver<Dense> ge(A, B);
  LinearizedSpectrum out;
  Eigen::VectorXd pert(P);
  for (std::size_t p = 0; p < P; ++p) pert[p] = phi0[p] - phi_inf[p];
  Eigen::VectorXd c = ge.eigenvectors().transpose() * (B * pert);
  const double cmax = c.cwiseAbs().maxCoeff();
  out.slowest_excited = std::numeric_limits<double>::infinity();
  for (Eigen::Index k = 0; k < c.size(); ++k) {
    double rate = 1.0 + ge.eigenvalues()[k];
    out.rates.push_back(rate);
    out.projections.push_back(std::abs(c[k]));
    if (std::abs(c[k]) > rel_threshold * cmax) out.slowest_excited = std::min(out.slowest_excited, rate);
  }
  return out;
}

}  // namespace krflab::oracles
