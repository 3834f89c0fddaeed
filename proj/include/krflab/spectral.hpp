#pragma once

// Pseudo-spectral differentiation on the unit periodic grid [0,1)^{2n} with
// complex coordinates z_i = x_i + i y_i. Real dimensions are ordered
// (x_1, y_1, ..., x_n, y_n), row-major.

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <memory>
#include <mutex>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

namespace krflab::spectral {

using Spectrum = std::vector<std::complex<double>>;

namespace detail {
// Plan creation is not thread-safe in FFTW; execution is.
inline std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct PlanDeleter {
  void operator()(fftw_plan_s* p) const {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(p);
  }
};
using PlanHandle = std::unique_ptr<fftw_plan_s, PlanDeleter>;
}  // namespace detail

class PeriodicGrid {
 public:
  PeriodicGrid(int complex_dim, int N) : n_(complex_dim), N_(N) {
    if (complex_dim < 1 || complex_dim > 2) throw std::invalid_argument("complex dimension must be 1 or 2");
    if (N < 4 || (N & (N - 1)) != 0) throw std::invalid_argument("grid resolution must be a power of two >= 4");
    const int rank = 2 * n_;
    points_ = 1;
    for (int d = 0; d < rank; ++d) points_ *= static_cast<std::size_t>(N_);
    modes_ = points_ / static_cast<std::size_t>(N_) * static_cast<std::size_t>(N_ / 2 + 1);

    std::vector<int> dims(rank, N_);
    std::vector<double> in(points_);
    Spectrum out(modes_);
    std::lock_guard lock(detail::planner_mutex());
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    forward_.reset(fftw_plan_dft_r2c(rank, dims.data(), in.data(), reinterpret_cast<fftw_complex*>(out.data()), flags));
    inverse_.reset(
        fftw_plan_dft_c2r(rank, dims.data(), reinterpret_cast<fftw_complex*>(out.data()), in.data(), flags | FFTW_DESTROY_INPUT));
    if (!forward_ || !inverse_) throw std::runtime_error("FFTW planning failed");
  }

  int complex_dim() const { return n_; }
  int real_dim() const { return 2 * n_; }
  int resolution() const { return N_; }
  std::size_t points() const { return points_; }
  std::size_t modes() const { return modes_; }
  double spacing() const { return 1.0 / N_; }

  /// Real coordinates of a flat point index.
  std::vector<double> coordinates(std::size_t p) const {
    std::vector<double> x(real_dim());
    for (int d = real_dim() - 1; d >= 0; --d) {
      x[d] = static_cast<double>(p % N_) / N_;
      p /= N_;
    }
    return x;
  }

  /// Signed integer wavenumbers of a flat mode index in the r2c layout, with
  /// the Nyquist frequency mapped to zero (it carries no derivative).
  std::vector<int> wavenumbers(std::size_t m) const {
    std::vector<int> k(real_dim());
    const int half = N_ / 2 + 1;
    int last = static_cast<int>(m % half);
    m /= half;
    k[real_dim() - 1] = last == N_ / 2 ? 0 : last;
    for (int d = real_dim() - 2; d >= 0; --d) {
      int i = static_cast<int>(m % N_);
      m /= N_;
      k[d] = i == N_ / 2 ? 0 : (i < N_ / 2 ? i : i - N_);
    }
    return k;
  }

  /// Raw signed wavenumbers (Nyquist kept as -N/2) for spectrum bookkeeping.
  std::vector<int> raw_wavenumbers(std::size_t m) const {
    std::vector<int> k(real_dim());
    const int half = N_ / 2 + 1;
    k[real_dim() - 1] = static_cast<int>(m % half);
    m /= half;
    for (int d = real_dim() - 2; d >= 0; --d) {
      int i = static_cast<int>(m % N_);
      m /= N_;
      k[d] = i < N_ / 2 ? i : i - N_;
    }
    return k;
  }

  /// Multiplicity of a half-spectrum mode in the full spectrum (1 or 2).
  double mode_weight(std::size_t m) const {
    int last = static_cast<int>(m % (N_ / 2 + 1));
    return (last == 0 || last == N_ / 2) ? 1.0 : 2.0;
  }

  Spectrum forward(std::span<const double> f) const {
    check_field(f);
    Spectrum out(modes_);
    fftw_execute_dft_r2c(forward_.get(), const_cast<double*>(f.data()), reinterpret_cast<fftw_complex*>(out.data()));
    return out;
  }

  /// Inverse transform, normalized so that inverse(forward(f)) == f.
  void inverse(Spectrum spec, std::span<double> out) const {
    check_field(out);
    if (spec.size() != modes_) throw std::invalid_argument("spectrum size mismatch");
    fftw_execute_dft_c2r(inverse_.get(), reinterpret_cast<fftw_complex*>(spec.data()), out.data());
    const double scale = 1.0 / static_cast<double>(points_);
    for (auto& v : out) v *= scale;
  }

  /// Applies a real, even Fourier multiplier to a transformed field.
  void apply(const Spectrum& spec, const std::vector<double>& symbol, std::span<double> out) const {
    Spectrum tmp(modes_);
    for (std::size_t m = 0; m < modes_; ++m) tmp[m] = spec[m] * symbol[m];
    inverse(std::move(tmp), out);
  }

  /// Tabulates a multiplier given as a function of the wavenumber vector.
  template <class F>
  std::vector<double> tabulate(F&& symbol) const {
    std::vector<double> out(modes_);
    for (std::size_t m = 0; m < modes_; ++m) out[m] = symbol(wavenumbers(m));
    return out;
  }

 private:
  void check_field(std::span<const double> f) const {
    if (f.size() != points_) throw std::invalid_argument("field size does not match grid");
  }

  int n_;
  int N_;
  std::size_t points_ = 0;
  std::size_t modes_ = 0;
  detail::PlanHandle forward_;
  detail::PlanHandle inverse_;
};

/// Multipliers of the complex Hessian ∂²/∂z_i∂z̄_j, split into the real and
/// imaginary parts of each entry. For i == j only the real part is nonzero.
///   ∂_{z_i}∂_{z̄_j} = ¼[∂x_i∂x_j + ∂y_i∂y_j + i(∂x_i∂y_j − ∂y_i∂x_j)].
struct HessianSymbols {
  explicit HessianSymbols(const PeriodicGrid& grid) {
    constexpr double pi2 = std::numbers::pi * std::numbers::pi;
    const int n = grid.complex_dim();
    diag.resize(n);
    for (int i = 0; i < n; ++i)
      diag[i] = grid.tabulate([&](const std::vector<int>& k) {
        double kx = k[2 * i], ky = k[2 * i + 1];
        return -pi2 * (kx * kx + ky * ky);
      });
    if (n == 2) {
      off_re = grid.tabulate([&](const std::vector<int>& k) { return -pi2 * (double(k[0]) * k[2] + double(k[1]) * k[3]); });
      off_im = grid.tabulate([&](const std::vector<int>& k) { return -pi2 * (double(k[0]) * k[3] - double(k[1]) * k[2]); });
    }
  }
  std::vector<std::vector<double>> diag;
  std::vector<double> off_re;
  std::vector<double> off_im;
};

}  // namespace krflab::spectral
