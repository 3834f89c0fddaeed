#include "krflab/maflow.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

using namespace krflab::maflow;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {
constexpr double pi = std::numbers::pi;

HermitianMatrix scalar_metric(double g) {
  HermitianMatrix m(1, 1);
  m(0, 0) = g;
  return m;
}

HermitianMatrix metric2(double a, double d, std::complex<double> c) {
  HermitianMatrix m(2, 2);
  m << a, c, std::conj(c), d;
  return m;
}

std::vector<double> field(const TorusBackground& bg, const std::vector<FourierTerm>& terms) {
  return synthesize(bg.grid(), terms);
}

double grid_mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

// Random smooth potential with small amplitude.
std::vector<FourierTerm> random_terms(std::mt19937_64& rng, int real_dim, int kmax, int count, double amp) {
  std::uniform_int_distribution<int> kd(-kmax, kmax);
  std::uniform_real_distribution<double> ud(-amp, amp);
  std::vector<FourierTerm> out;
  for (int i = 0; i < count; ++i) {
    FourierTerm t;
    for (int d = 0; d < real_dim; ++d) t.k.push_back(kd(rng));
    t.cos_coef = ud(rng);
    t.sin_coef = ud(rng);
    out.push_back(t);
  }
  return out;
}
}  // namespace

TEST_CASE("background validation", "[maflow]") {
  CHECK_THROWS_AS(TorusBackground(1, 16, scalar_metric(-1.0)), std::invalid_argument);
  CHECK_THROWS_AS(TorusBackground(2, 8, scalar_metric(1.0)), std::invalid_argument);
  CHECK_THROWS_AS(TorusBackground(2, 8, metric2(1.0, 1.0, 2.0)), std::invalid_argument);
  CHECK_THROWS_AS(TorusBackground(1, 16, scalar_metric(1.0), {{{1}, 1.0, 0.0}}), std::invalid_argument);
  TorusBackground bg(2, 8, metric2(2.0, 1.0, {0.3, -0.2}));
  CHECK_THAT(bg.log_det_g0(), WithinAbs(std::log(2.0 - 0.13), 1e-14));
}

TEST_CASE("flow velocity matches the closed form for a single mode", "[maflow]") {
  // φ = A cos(2πx): H = −π² A cos(2πx)
  const double g0 = 0.5, A = 0.02;
  TorusBackground bg(1, 32, scalar_metric(g0));
  auto phi = field(bg, {{{1, 0}, A, 0.0}});
  FlowState s(bg, phi, FlowMode::unnormalized);
  for (std::size_t p = 0; p < phi.size(); ++p) {
    double x = bg.grid().coordinates(p)[0];
    double expect = std::log(g0 - pi * pi * A * std::cos(2 * pi * x)) - std::log(g0);
    CHECK_THAT(s.phidot()[p], WithinAbs(expect, 1e-12));
  }
  FlowState sn(bg, phi, FlowMode::normalized);
  for (std::size_t p = 0; p < phi.size(); ++p) CHECK_THAT(sn.phidot()[p], WithinAbs(s.phidot()[p] - phi[p], 1e-14));
}

TEST_CASE("flow velocity in two dimensions against pointwise determinants", "[maflow]") {
  // φ = A cos(2π x1) cos(2π y2) = ½A[cos 2π(x1 + y2) + cos 2π(x1 − y2)]
  const double A = 0.01;
  const auto G = metric2(1.0, 2.0, {0.1, 0.2});
  TorusBackground bg(2, 8, G);
  auto phi = field(bg, {{{1, 0, 0, 1}, A / 2, 0.0}, {{1, 0, 0, -1}, A / 2, 0.0}});
  FlowState s(bg, phi, FlowMode::unnormalized);
  for (std::size_t p = 0; p < phi.size(); ++p) {
    auto x = bg.grid().coordinates(p);
    double cx = std::cos(2 * pi * x[0]), sx = std::sin(2 * pi * x[0]);
    double cy = std::cos(2 * pi * x[3]), sy = std::sin(2 * pi * x[3]);
    // ∂x1² = −4π²φ, ∂y2² = −4π²φ, ∂x1∂y2 = 4π² A sx sy
    double h11 = 0.25 * (-4 * pi * pi * A * cx * cy);
    double h22 = 0.25 * (-4 * pi * pi * A * cx * cy);
    std::complex<double> h12(0.0, 0.25 * 4 * pi * pi * A * sx * sy);
    HermitianMatrix M = G + metric2(h11, h22, h12);
    double expect = std::log(std::real(M.determinant())) - std::log(std::real(G.determinant()));
    CHECK_THAT(s.phidot()[p], WithinAbs(expect, 1e-12));
  }
}

TEST_CASE("constant potentials evolve explicitly", "[maflow]") {
  // normalized: φ̇ = −φ so φ(t) = c e^{−t}
  TorusBackground bg(1, 16, scalar_metric(1.0));
  FlowState s(bg, std::vector<double>(bg.grid().points(), 0.7), FlowMode::normalized);
  RunConfig cfg;
  cfg.mode = FlowMode::normalized;
  cfg.dt = 0.01;
  cfg.t_end = 1.0;
  auto r = run(bg, s, cfg);
  CHECK_THAT(r.final_state.t(), WithinAbs(1.0, 1e-12));
  for (double v : r.final_state.phi()) CHECK_THAT(v, WithinRel(0.7 * std::exp(-1.0), 1e-9));

  // unnormalized with constant f: φ(t) = −f t
  TorusBackground bgf(1, 16, scalar_metric(1.0), {{{0, 0}, 0.25, 0.0}});
  auto r2 = run(bgf, FlowState::zero(bgf, FlowMode::unnormalized), {FlowMode::unnormalized, 0.01, 2.0, 10});
  for (double v : r2.final_state.phi()) CHECK_THAT(v, WithinAbs(-0.5, 1e-12));
}

TEST_CASE("small perturbations decay at the linearized rate", "[maflow]") {
  // linearization φ̇ = tr(g0^{-1} H(φ)): for cos(2π x) with scalar g0 the rate is π²/g0
  for (double g0 : {1.0, 2.0}) {
    const double A = 1e-5;
    TorusBackground bg(1, 16, scalar_metric(g0));
    FlowState s(bg, field(bg, {{{1, 0}, A, 0.0}}), FlowMode::unnormalized);
    const double t_end = 0.2;
    auto r = run(bg, s, {FlowMode::unnormalized, 1e-3, t_end, 50});
    double expect = A * std::exp(-pi * pi / g0 * t_end);
    double amp = 0.0;
    for (double v : r.final_state.phi()) amp = std::max(amp, std::abs(v - grid_mean(r.final_state.phi())));
    CHECK_THAT(amp, WithinRel(expect, 1e-3));
  }
}

TEST_CASE("RK4 is fourth order in time", "[maflow]") {
  // coarse grid and large g0 keep the CFL bound above the probed steps
  TorusBackground bg(1, 8, scalar_metric(4.0));
  auto phi0 = field(bg, {{{1, 1}, 0.08, 0.04}, {{0, 2}, 0.0, 0.02}});
  auto solve = [&](double dt) {
    RunConfig cfg{FlowMode::unnormalized, dt, 0.08, 1000};
    cfg.tail_limit = 1.0;
    return run(bg, FlowState(bg, phi0, FlowMode::unnormalized), cfg).final_state.phi();
  };
  auto ref = solve(2.5e-4), coarse = solve(4e-3), fine = solve(2e-3);
  double e1 = 0, e2 = 0;
  for (std::size_t p = 0; p < ref.size(); ++p) {
    e1 = std::max(e1, std::abs(coarse[p] - ref[p]));
    e2 = std::max(e2, std::abs(fine[p] - ref[p]));
  }
  REQUIRE(e2 > 0.0);
  CHECK(std::log2(e1 / e2) > 3.6);
}

TEST_CASE("total volume is conserved along the flow", "[maflow][property]") {
  std::mt19937_64 rng(17);
  for (int n : {1, 2}) {
    const int N = n == 1 ? 32 : 8;
    for (int trial = 0; trial < 3; ++trial) {
      auto G = n == 1 ? scalar_metric(1.0 + trial * 0.5) : metric2(1.0, 1.5, {0.2 * trial, 0.1});
      TorusBackground bg(n, N, G, random_terms(rng, 2 * n, 2, 2, 0.05));
      FlowState s(bg, field(bg, random_terms(rng, 2 * n, 2, 3, 0.004)), FlowMode::unnormalized);
      RunConfig cfg{FlowMode::unnormalized, std::nullopt, 0.05, 5};
      cfg.tail_limit = 1.0;  // coarse grids: conservation holds at any resolution
      auto r = run(bg, s, cfg);
      const double v0 = r.series.records.front().volume;
      CHECK_THAT(v0, WithinRel(std::real(G.determinant()), 1e-12));
      for (const auto& rec : r.series.records) CHECK_THAT(rec.volume, WithinRel(v0, 1e-12));
    }
  }
}

TEST_CASE("step guards", "[maflow]") {
  TorusBackground bg(1, 16, scalar_metric(1.0));
  auto s = FlowState::zero(bg, FlowMode::unnormalized);
  const double limit = cfl_bound(bg, s);
  CHECK_THAT(limit, WithinRel(0.25 / 256.0, 1e-14));
  CHECK_THROWS_AS(step(bg, s, 2 * limit), std::invalid_argument);
  CHECK_THROWS_AS(step(bg, s, 0.0), std::invalid_argument);
  CHECK_NOTHROW(step(bg, s, limit));

  // g0 + H fails to be positive at x = 0 when π² A > g0
  auto bad = field(bg, {{{1, 0}, 0.2, 0.0}});
  try {
    FlowState fs(bg, bad, FlowMode::unnormalized);
    FAIL("expected admissibility failure");
  } catch (const AdmissibilityError& e) {
    CHECK(e.point() == 0);
    CHECK(e.min_eigenvalue() < 0.0);
  }
  CHECK_THROWS_AS(run(bg, s, {FlowMode::normalized, 1e-3, 1.0, 1}), std::invalid_argument);
  CHECK_THROWS_AS(run(bg, s, {FlowMode::unnormalized, -1e-3, 1.0, 1}), std::invalid_argument);
}

TEST_CASE("scalar curvature of a one-dimensional conformal metric", "[maflow]") {
  // g̃ = u(x) = g0 − π² A cos(2πx); R = −¼ (log u)'' / u
  const double g0 = 1.0, A = 0.03;
  TorusBackground bg(1, 64, scalar_metric(g0));
  FlowState s(bg, field(bg, {{{1, 0}, A, 0.0}}), FlowMode::unnormalized);
  auto ric = ricci_and_scalar(bg, s);
  double weighted = 0.0;
  for (std::size_t p = 0; p < s.phi().size(); ++p) {
    double x = bg.grid().coordinates(p)[0];
    double c = std::cos(2 * pi * x), sn = std::sin(2 * pi * x);
    double u = g0 - pi * pi * A * c;
    double up = 2 * pi * pi * pi * A * sn;
    double upp = 4 * pi * pi * pi * pi * A * c;
    double expect = -0.25 * (upp / u - (up / u) * (up / u)) / u;
    CHECK_THAT(ric.scalar[p], WithinAbs(expect, 1e-9));
    weighted += ric.scalar[p] * u;
  }
  // Gauss-Bonnet on the torus
  CHECK_THAT(weighted / s.phi().size(), WithinAbs(0.0, 1e-12));
}

TEST_CASE("diagnostics of the flat state", "[maflow]") {
  TorusBackground bg(2, 8, metric2(2.0, 1.0, {0.5, 0.0}));
  auto d = diagnostics(bg, FlowState::zero(bg, FlowMode::unnormalized));
  CHECK(d.sup_phi == 0.0);
  CHECK(d.sup_phidot == 0.0);
  CHECK_THAT(d.min_eig, WithinAbs(1.5 - std::sqrt(0.5), 1e-14));
  CHECK_THAT(d.max_eig, WithinAbs(1.5 + std::sqrt(0.5), 1e-14));
  CHECK_THAT(d.sup_trace, WithinAbs(2.0, 1e-13));
  CHECK_THAT(d.volume, WithinAbs(1.75, 1e-14));
  CHECK_THAT(d.inf_R, WithinAbs(0.0, 1e-14));
}

TEST_CASE("spectral tail monitor", "[maflow]") {
  TorusBackground bg(1, 32, scalar_metric(1.0));
  CHECK(spectral_tail_fraction(bg, field(bg, {{{1, 2}, 0.1, 0.0}})) < 1e-20);
  CHECK(spectral_tail_fraction(bg, field(bg, {{{13, 0}, 0.1, 0.0}})) > 0.99);
  CHECK(spectral_tail_fraction(bg, std::vector<double>(bg.grid().points(), 3.0)) == 0.0);
  FlowState s(bg, field(bg, {{{1, 0}, 1e-4, 0.0}, {{12, 0}, 1e-4, 0.0}}), FlowMode::unnormalized);
  CHECK_THROWS_AS(run(bg, s, {FlowMode::unnormalized, std::nullopt, 1e-3, 1}), SpectralTailError);
}

TEST_CASE("normalized flow stops once converged", "[maflow]") {
  TorusBackground bg(1, 16, scalar_metric(1.0));
  FlowState s(bg, field(bg, {{{1, 0}, 1e-3, 0.0}, {{0, 0}, 1e-3, 0.0}}), FlowMode::normalized);
  RunConfig cfg;
  cfg.mode = FlowMode::normalized;
  cfg.t_end = 100.0;
  cfg.record_every = 200;
  auto r = run(bg, s, cfg);
  CHECK(r.converged);
  CHECK(r.final_state.t() < 100.0);
  CHECK(r.series.records.back().sup_phidot < 1e-10);
}
