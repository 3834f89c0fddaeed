#include "krflab/estimates.hpp"
#include "krflab/sampling.hpp"

#include <catch_amalgamated.hpp>

#include <random>

using namespace krflab;
using namespace krflab::estimates;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {
HermitianMatrix diag(std::initializer_list<double> d) {
  HermitianMatrix m = HermitianMatrix::Zero(d.size(), d.size());
  int i = 0;
  for (double v : d) m(i, i) = v, ++i;
  return m;
}

DiagnosticsSeries flat_series(FlowMode mode, int count) {
  DiagnosticsSeries s{mode, false, {}};
  for (int i = 0; i < count; ++i) {
    maflow::DiagnosticsRecord r;
    r.t = 0.1 * i;
    r.min_eig = r.max_eig = r.sup_trace = r.volume = 1.0;
    s.records.push_back(r);
  }
  return s;
}
}  // namespace

TEST_CASE("gap constant", "[estimates]") {
  CHECK(gap_constant(1) == 1.0);
  CHECK(gap_constant(2) == 6.0);
  CHECK(gap_constant(3) == 16.0);
}

TEST_CASE("matrix gap lemma: hand cases", "[estimates]") {
  for (int n : {1, 2, 3}) {
    auto g = matrix_gap_check(HermitianMatrix::Identity(n, n), 0.3);
    CHECK(g.lhs == 0.0);
    CHECK(g.pass);
  }
  const double eps = 0.2;
  auto g = matrix_gap_check(diag({1 - eps}), eps);
  CHECK_THAT(g.lhs, WithinAbs(eps * eps, 1e-15));
  CHECK(g.bound >= eps * eps);
  CHECK(g.pass);

  // diag(1+δ, 1/(1+δ)): det 1, trace 2 + δ²/(1+δ)
  const double d = 0.01;
  auto A = diag({1 + d, 1 / (1 + d)});
  auto h = matrix_gap_check(A, d * d / (1 + d));
  CHECK_THAT(h.lhs, WithinRel(d * d + std::pow(1 / (1 + d) - 1, 2), 1e-10));
  CHECK(h.pass);

  CHECK_THROWS_AS(matrix_gap_check(diag({2.0, 1.0}), 0.5), DomainError);
  CHECK_THROWS_AS(matrix_gap_check(diag({0.4}), 0.5), DomainError);
  CHECK_THROWS_AS(matrix_gap_check(diag({1.0}), 1.0), DomainError);
}

TEST_CASE("matrix gap lemma: sampled matrices", "[estimates][property]") {
  std::mt19937_64 rng(42);
  for (int n : {1, 2, 3}) {
    int checked = 0;
    double worst_ratio = 0.0;
    while (checked < 20000) {
      auto s = sampling::sample_gap_case(rng, n);
      if (!s) continue;
      ++checked;
      auto g = matrix_gap_check(s->A, s->eps);
      // Frobenius norm directly from the matrix entries
      double direct = (s->A - HermitianMatrix::Identity(n, n)).squaredNorm();
      REQUIRE_THAT(g.lhs, WithinAbs(direct, 1e-12 * (1 + direct)));
      REQUIRE(g.chain_ok);
      REQUIRE(g.pass);
      worst_ratio = std::max(worst_ratio, g.lhs / s->eps);
    }
    INFO("n = " << n << " worst lhs/eps = " << worst_ratio);
    CHECK(worst_ratio <= gap_constant(n));
  }
}

TEST_CASE("trace inequalities", "[estimates]") {
  auto t = trace_inequalities_check(diag({2.0, 0.5}), diag({1.0, 1.0}));
  CHECK_THAT(t.trace_lhs, WithinAbs(2.5, 1e-14));
  CHECK_THAT(t.trace_rhs, WithinAbs(2.5, 1e-14));
  CHECK(t.pass);
  CHECK_THAT(t.min_eig_bound, WithinAbs(1.0 / 2.5, 1e-14));

  for (int n : {1, 2, 3}) {
    auto B = diag({1.0, 2.0, 3.0}).topLeftCorner(n, n).eval();
    auto same = trace_inequalities_check(B, B);
    CHECK(same.pass);
    CHECK_THAT(same.trace_lhs, WithinAbs(n, 1e-12));
  }
  CHECK_THROWS_AS(trace_inequalities_check(diag({1.0, -1.0}), diag({1.0, 1.0})), DomainError);

  std::mt19937_64 rng(9);
  for (int n : {1, 2, 3})
    for (int i = 0; i < 10000; ++i) {
      auto A = sampling::random_pd(rng, n, 1.0), B = sampling::random_pd(rng, n, 1.0);
      auto c = trace_inequalities_check(A, B);
      REQUIRE(c.pass);
      // eigenvalues of B^{-1}A through a dense solve
      HermitianMatrix M = B.ldlt().solve(A);
      CHECK_THAT(c.trace_lhs, WithinRel(M.trace().real(), 1e-9));
    }
}

TEST_CASE("exponential fit recovers rate and prefactor", "[estimates]") {
  std::vector<double> t, y;
  for (int i = 0; i < 20; ++i) {
    t.push_back(0.5 * i);
    y.push_back(3.0 * std::exp(-1.7 * t.back()));
  }
  auto [mu, c] = fit_exponential(t, y);
  CHECK_THAT(mu, WithinRel(1.7, 1e-12));
  CHECK_THAT(c, WithinRel(3.0, 1e-12));
  CHECK_THROWS(fit_exponential({1.0}, {1.0}));
}

TEST_CASE("estimate report verdicts", "[estimates]") {
  auto stationary = estimate_report(flat_series(FlowMode::unnormalized, 10));
  CHECK(stationary.all_pass());

  auto dip = flat_series(FlowMode::unnormalized, 10);
  dip.records[6].inf_R = -1e-3;
  auto rep = estimate_report(dip);
  CHECK_FALSE(rep.at("inf_R_floor").pass);
  CHECK_FALSE(rep.all_pass());

  auto blowup = flat_series(FlowMode::unnormalized, 12);
  for (auto& r : blowup.records) r.sup_phi = std::exp(r.t * 10);
  CHECK_FALSE(estimate_report(blowup).at("sup_phi_bounded").pass);

  auto degenerate = flat_series(FlowMode::unnormalized, 4);
  degenerate.records[2].min_eig = 1e-10;
  CHECK_FALSE(estimate_report(degenerate).at("metric_equivalence").pass);

  auto twisted = dip;
  twisted.twisted = true;
  auto tr = estimate_report(twisted);
  CHECK_FALSE(tr.at("inf_R_floor").applicable);
  CHECK(tr.at("inf_R_floor").pass);

  auto decay = flat_series(FlowMode::normalized, 40);
  for (auto& r : decay.records) r.sup_phidot = 0.3 * std::exp(-1.2 * r.t);
  auto dr = estimate_report(decay);
  CHECK(dr.at("phidot_decay").pass);
  REQUIRE(dr.mu);
  CHECK_THAT(*dr.mu, WithinRel(1.2, 1e-10));

  auto growing = flat_series(FlowMode::normalized, 40);
  for (auto& r : growing.records) r.sup_phidot = 0.3 * std::exp(0.2 * r.t);
  CHECK_FALSE(estimate_report(growing).at("phidot_decay").pass);
}

TEST_CASE("estimate report on real flows", "[estimates][maflow]") {
  using namespace maflow;
  HermitianMatrix g0 = HermitianMatrix::Identity(1, 1);
  TorusBackground bg(1, 16, g0);
  auto phi0 = synthesize(bg.grid(), {{{1, 0}, 0.01, 0.0}, {{0, 1}, 0.0, 0.005}, {{0, 0}, 0.02, 0.0}});

  auto un = run(bg, FlowState(bg, phi0, FlowMode::unnormalized), {FlowMode::unnormalized, std::nullopt, 0.3, 50});
  auto ru = estimate_report(un.series);
  INFO(ru.at("inf_R_floor").detail);
  CHECK(ru.all_pass());

  RunConfig cfg{FlowMode::normalized, std::nullopt, 4.0, 100};
  auto nm = run(bg, FlowState(bg, phi0, FlowMode::normalized), cfg);
  auto rn = estimate_report(nm.series);
  CHECK(rn.all_pass());
  REQUIRE(rn.mu);
  // the constant mode decays at rate exactly 1 under φ̇ = log(...) − φ
  CHECK_THAT(*rn.mu, WithinRel(1.0, 0.05));
}
