#pragma once

// Random Hermitian matrices for property checks.

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <optional>
#include <random>

namespace krflab::sampling {

using Matrix = Eigen::Matrix<std::complex<double>, Eigen::Dynamic, Eigen::Dynamic>;

/// Haar-distributed unitary from the QR factorization of a complex Gaussian matrix.
inline Matrix random_unitary(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> nd;
  Matrix z(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) z(i, j) = {nd(rng), nd(rng)};
  Eigen::HouseholderQR<Matrix> qr(z);
  Matrix q = qr.householderQ();
  Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < n; ++j) {
    auto d = r(j, j);
    if (std::abs(d) > 0) q.col(j) *= d / std::abs(d);
  }
  return q;
}

/// U diag(exp(δ)) U* with δ_i ~ N(0, σ²).
inline Matrix random_pd(std::mt19937_64& rng, int n, double sigma) {
  std::normal_distribution<double> nd(0.0, sigma);
  Matrix u = random_unitary(rng, n);
  Matrix d = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) d(i, i) = std::exp(nd(rng));
  Matrix a = u * d * u.adjoint();
  return 0.5 * (a + a.adjoint());
}

struct GapSample {
  Matrix A;
  double eps;
};

/// A PD matrix near the identity together with an ε ∈ (0, 1) for which
/// tr A ≤ n + ε and det A ≥ 1 − ε. Half the draws put ε on the boundary.
inline std::optional<GapSample> sample_gap_case(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> scale(-4.0, -0.3), ud(0.0, 1.0);
  Matrix a = random_pd(rng, n, std::pow(10.0, scale(rng)));
  double tr = a.trace().real();
  double det = a.determinant().real();
  double eps = std::max(tr - n, 1.0 - det);
  if (!(eps > 0.0)) return std::nullopt;
  if (ud(rng) < 0.5) eps *= 1.0 + ud(rng);
  if (eps >= 1.0) return std::nullopt;
  return GapSample{a, eps};
}

}  // namespace krflab::sampling
