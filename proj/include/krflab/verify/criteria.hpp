#pragma once

// The acceptance suite. Each criterion returns one row of the verification
// table; `run_all` is shared by the acceptance test binary and `krflab verify`.

#include "krflab/ansatz.hpp"
#include "krflab/cohomology.hpp"
#include "krflab/estimates.hpp"
#include "krflab/ghmetric.hpp"
#include "krflab/maflow.hpp"
#include "krflab/models.hpp"
#include "krflab/sampling.hpp"
#include "krflab/verify/oracles.hpp"

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

namespace krflab::verify {

struct CriterionResult {
  int id = 0;
  std::string name;
  std::string expected;
  std::string got;
  std::string tolerance;
  bool pass = false;
  double seconds = 0.0;
  double budget_seconds = 0.0;
};

struct VerifyOptions {
  std::uint64_t seed = 1;
  int grid = 64;       // resolution of the one-dimensional flow runs
  int grid_2d = 16;    // resolution of the two-dimensional flow runs
  std::vector<cohomology::ManifoldModel> models;  // overrides built-ins by name
};

namespace detail {

inline std::string num(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4g", x);
  return buf;
}

inline cohomology::ManifoldModel model(const VerifyOptions& opt, const std::string& name) {
  for (const auto& m : opt.models)
    if (m.name == name) return m;
  return cohomology::builtin_model(name);
}

inline Rational random_positive(std::mt19937_64& rng, int num_max = 60, int den_max = 19) {
  std::uniform_int_distribution<int> num(1, num_max), den(1, den_max);
  return Rational(num(rng), den(rng));
}

template <class F>
CriterionResult timed(int id, std::string name, double budget, F&& body) {
  CriterionResult r;
  r.id = id;
  r.name = std::move(name);
  r.budget_seconds = budget;
  auto t0 = std::chrono::steady_clock::now();
  try {
    body(r);
  } catch (const std::exception& e) {
    r.pass = false;
    r.got = std::string("error: ") + e.what();
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (r.seconds > budget) {
    r.pass = false;
    r.got += " (runtime " + num(r.seconds) + " s over budget " + num(budget) + " s)";
  }
  return r;
}

inline maflow::HermitianMatrix scalar(double g) {
  maflow::HermitianMatrix m(1, 1);
  m(0, 0) = g;
  return m;
}

}  // namespace detail

/// Exact maximal existence times, Kähler regions, limiting volumes and null loci.
inline CriterionResult cohomology_exactness(const VerifyOptions& opt) {
  return detail::timed(1, "cohomology exactness", 1.0, [&](CriterionResult& r) {
    using namespace cohomology;
    r.expected = "T = l/2 (CP1), inf (tori, g>=2), min/2 (P1xP1), min((m1+m2)/2, -m2) (Bl_p), vol (m1+3m2)^2, Null = {E}";
    r.tolerance = "exact";
    std::mt19937_64 rng(opt.seed);
    int checks = 0, failures = 0;
    std::string first_failure;
    auto expect = [&](bool ok, const std::string& what) {
      ++checks;
      if (!ok && failures++ == 0) first_failure = what;
    };

    const auto cp1 = detail::model(opt, "riemann-surface:0");
    for (int i = 0; i < 20; ++i) {
      Rational l = detail::random_positive(rng);
      auto T = max_existence_time(cp1, ClassVector{l});
      expect(!T.infinite && T.exact() && T.value() == l / 2, "CP1 T at " + to_string(l));
    }
    for (const char* name : {"torus:1", "torus:2", "riemann-surface:2", "riemann-surface:3"}) {
      auto m = detail::model(opt, name);
      auto a = ClassVector(std::vector<Rational>(m.dim(), Rational(1)));
      bool ok = is_kahler(m, a) && max_existence_time(m, a).infinite;
      expect(ok, std::string(name) + " T infinite");
    }
    const auto pp = detail::model(opt, "p1xp1");
    for (int i = 0; i < 20; ++i) {
      Rational l1 = detail::random_positive(rng), l2 = detail::random_positive(rng);
      auto T = max_existence_time(pp, ClassVector{l1, l2});
      const Rational want = (l1 < l2 ? l1 : l2) / 2;
      expect(T.exact() && T.value() == want, "P1xP1 T");
    }
    const auto bl = detail::model(opt, "blowup-p2");
    std::uniform_int_distribution<int> num(-40, 40), den(1, 13);
    int kahler_seen = 0, noncollapsed_seen = 0;
    for (int i = 0; i < 400; ++i) {
      ClassVector a{Rational(num(rng), den(rng)), Rational(num(rng), den(rng))};
      bool region = 0 < -a[1] && -a[1] < a[0];
      expect(is_kahler(bl, a) == region, "Bl_p Kähler region at " + a.str());
      if (!region) continue;
      ++kahler_seen;
      auto T = max_existence_time(bl, a);
      const Rational first = (a[0] + a[1]) / 2, second = -a[1];
      const Rational want = first < second ? first : second;
      expect(T.exact() && T.value() == want, "Bl_p T at " + a.str());
      if (a[0] > -3 * a[1]) {
        ++noncollapsed_seen;
        expect(is_noncollapsed(bl, a), "Bl_p noncollapsed branch at " + a.str());
        expect(volume(bl, limiting_class(bl, a)) == (a[0] + 3 * a[1]) * (a[0] + 3 * a[1]), "Bl_p limit volume at " + a.str());
      } else {
        expect(!is_noncollapsed(bl, a), "Bl_p collapsed branch at " + a.str());
      }
    }
    expect(kahler_seen > 20 && noncollapsed_seen > 5, "Bl_p sample coverage");
    {
      ClassVector a0{4, -1};
      bool ok = is_kahler(bl, a0);
      if (ok) {
        auto lim = limiting_class(bl, a0);
        auto nl = null_locus(bl, lim);
        ok = lim == ClassVector{1, 0} && !nl.whole_space && nl.labels == std::vector<std::string>{"E"};
      }
      expect(ok, "Null(a) = {E} from (4,-1)");
    }
    r.pass = failures == 0;
    r.got = std::to_string(checks - failures) + "/" + std::to_string(checks) + " exact matches" +
            (failures ? "; first failure: " + first_failure : "");
  });
}

/// Fixed point of φ ≡ 0 and conservation of the grid volume.
inline CriterionResult flow_stationarity(const VerifyOptions& opt) {
  return detail::timed(2, "flow stationarity and volume conservation", 30.0, [&](CriterionResult& r) {
    using namespace maflow;
    r.expected = "max|phi| = 0 over 1000 steps; |V(t)/V(0) - 1| <= 1e-6 t";
    r.tolerance = "1e-12 (stationarity), 1e-6 per unit time (volume)";
    const int N = opt.grid;
    TorusBackground flat(1, N, detail::scalar(1.0));
    auto s = FlowState::zero(flat, FlowMode::unnormalized);
    const double dt = cfl_bound(flat, s);
    double drift = 0.0;
    for (int k = 0; k < 1000; ++k) {
      s = step(flat, s, dt);
      for (double v : s.phi()) drift = std::max(drift, std::abs(v));
    }

    double worst_rate = 0.0;
    struct Case {
      FlowMode mode;
      std::vector<FourierTerm> f;
    };
    const std::vector<FourierTerm> phi_terms{{{1, 0}, 0.02, 0.0}, {{1, -1}, 0.0, 0.01}, {{0, 2}, 0.004, 0.003}};
    for (const auto& c : {Case{FlowMode::unnormalized, {}}, Case{FlowMode::normalized, {{{0, 1}, 0.03, 0.0}}}}) {
      TorusBackground bg(1, N, detail::scalar(1.0), c.f);
      FlowState s0(bg, synthesize(bg.grid(), phi_terms), c.mode);
      RunConfig cfg{c.mode, std::nullopt, 0.5, 200};
      auto res = run(bg, s0, cfg);
      const double v0 = res.series.records.front().volume;
      for (const auto& rec : res.series.records)
        if (rec.t > 0) worst_rate = std::max(worst_rate, std::abs(rec.volume / v0 - 1.0) / rec.t);
    }
    r.pass = drift < 1e-12 && worst_rate <= 1e-6;
    r.got = "max|phi| = " + detail::num(drift) + "; volume drift " + detail::num(worst_rate) + " per unit time (N = " +
            std::to_string(N) + ")";
  });
}

/// Normalized twisted flow converges to the elliptic solution at the linearized rate.
inline CriterionResult normalized_convergence(const VerifyOptions& opt) {
  return detail::timed(3, "normalized flow convergence", 120.0, [&](CriterionResult& r) {
    using namespace maflow;
    r.expected = "converged; residual < 1e-8; |mu - rate| <= 0.1 rate";
    r.tolerance = "1e-8 residual, 10% rate";
    const int N = opt.grid;
    const double g0 = 2.0;
    const std::vector<FourierTerm> f{{{1, 0}, 0.04, 0.0}, {{0, 1}, 0.0, 0.03}, {{1, 1}, 0.01, 0.0}};
    TorusBackground bg(1, N, detail::scalar(g0), f);
    auto phi0 = std::vector<double>(bg.grid().points(), 0.0);
    RunConfig cfg{FlowMode::normalized, std::nullopt, 40.0, 200};
    auto res = run(bg, FlowState(bg, phi0, FlowMode::normalized), cfg);

    oracles::DenseCalculus calc(1, N);
    auto fd = calc.sample(f);
    auto resid = oracles::flow_velocity(calc, detail::scalar(g0), fd, res.final_state.phi(), true);
    double residual = 0.0;
    for (double v : resid) residual = std::max(residual, std::abs(v));
    auto newton = oracles::solve_stationary(calc, g0, fd);
    double gap = 0.0;
    for (std::size_t p = 0; p < newton.phi.size(); ++p) gap = std::max(gap, std::abs(newton.phi[p] - res.final_state.phi()[p]));

    oracles::DenseCalculus coarse(1, 16);
    auto phi_inf = oracles::solve_stationary(coarse, g0, coarse.sample(f)).phi;
    auto spec = oracles::linearized_spectrum(coarse, g0, phi_inf, std::vector<double>(coarse.points(), 0.0));
    auto report = estimates::estimate_report(res.series);
    double mu = report.mu.value_or(0.0);
    double rate = spec.slowest_excited;
    r.pass = res.converged && residual < 1e-8 && std::abs(mu - rate) <= 0.1 * rate;
    r.got = std::string(res.converged ? "converged" : "not converged") + " at t = " + detail::num(res.final_state.t()) +
            "; residual " + detail::num(residual) + "; |phi - newton| " + detail::num(gap) + "; mu = " + detail::num(mu) +
            " vs oracle " + detail::num(rate);
  });
}

/// inf R(t) ≥ inf R(0) − 1e-4 along unnormalized runs with Ω = det g0.
inline CriterionResult scalar_curvature_floor(const VerifyOptions& opt) {
  return detail::timed(4, "scalar curvature floor", 300.0, [&](CriterionResult& r) {
    using namespace maflow;
    r.expected = "inf R(t) >= inf R(0) - 1e-4 on 6 runs";
    r.tolerance = "1e-4";
    struct Case {
      int n;
      HermitianMatrix g0;
      std::vector<FourierTerm> phi;
      double t_end;
    };
    HermitianMatrix h2(2, 2);
    h2 << 1.5, std::complex<double>(0.2, 0.1), std::complex<double>(0.2, -0.1), 1.0;
    const std::vector<Case> cases{
        {1, detail::scalar(1.0), {{{1, 0}, 0.03, 0.0}}, 0.3},
        {1, detail::scalar(2.0), {{{1, 1}, 0.02, 0.01}, {{0, 2}, 0.0, 0.005}}, 0.3},
        {1, detail::scalar(0.7), {{{2, -1}, 0.004, 0.0}, {{1, 0}, 0.0, 0.01}, {{0, 1}, 0.008, 0.0}}, 0.2},
        {2, HermitianMatrix::Identity(2, 2), {{{1, 0, 0, 1}, 0.01, 0.0}}, 0.1},
        {2, h2, {{{1, 0, 0, 0}, 0.01, 0.0}, {{0, 0, 1, -1}, 0.0, 0.005}}, 0.1},
        {2, HermitianMatrix::Identity(2, 2), {{{1, 1, 0, 0}, 0.004, 0.0}, {{0, 1, 1, 0}, 0.0, 0.006}, {{0, 0, 0, 1}, 0.005, 0.0}}, 0.1},
    };
    double worst = std::numeric_limits<double>::infinity();
    int passed = 0;
    for (const auto& c : cases) {
      TorusBackground bg(c.n, c.n == 1 ? opt.grid : opt.grid_2d, c.g0);
      FlowState s(bg, synthesize(bg.grid(), c.phi), FlowMode::unnormalized);
      auto res = run(bg, s, {FlowMode::unnormalized, std::nullopt, c.t_end, c.n == 1 ? 25 : 5});
      const double r0 = res.series.records.front().inf_R;
      double margin = std::numeric_limits<double>::infinity();
      for (const auto& rec : res.series.records) margin = std::min(margin, rec.inf_R - (r0 - 1e-4));
      worst = std::min(worst, margin);
      if (margin >= 0.0 && estimates::estimate_report(res.series).at("inf_R_floor").pass) ++passed;
    }
    r.pass = passed == static_cast<int>(cases.size());
    r.got = std::to_string(passed) + "/" + std::to_string(cases.size()) + " runs above the floor; smallest margin " +
            detail::num(worst);
  });
}

/// ‖A − Id‖² ≤ C(n)ε and the Maclaurin chain over sampled matrices.
inline CriterionResult matrix_lemma(const VerifyOptions& opt) {
  return detail::timed(5, "matrix gap lemma", 60.0, [&](CriterionResult& r) {
    r.expected = "0 violations in 1e5 samples per n = 1, 2, 3 with C(n) = 1, 6, 16";
    r.tolerance = "exact count";
    std::mt19937_64 rng(opt.seed + 5);
    long violations = 0, chain = 0;
    std::string ratios;
    for (int n : {1, 2, 3}) {
      int done = 0;
      double worst = 0.0;
      while (done < 100000) {
        auto s = sampling::sample_gap_case(rng, n);
        if (!s) continue;
        ++done;
        auto g = estimates::matrix_gap_check(s->A, s->eps);
        if (!g.chain_ok) ++chain;
        if (!g.pass) ++violations;
        worst = std::max(worst, g.lhs / s->eps);
      }
      ratios += (ratios.empty() ? "" : ", ") + std::string("n=") + std::to_string(n) + ": " + detail::num(worst);
    }
    r.pass = violations == 0 && chain == 0;
    r.got = std::to_string(violations) + " bound violations, " + std::to_string(chain) +
            " chain violations; max lhs/eps " + ratios;
  });
}

/// Closed forms of the normalized E x C product.
inline CriterionResult product_collapsing(const VerifyOptions&) {
  return detail::timed(6, "product collapsing", 5.0, [&](CriterionResult& r) {
    r.expected = "a = lE e^-t, b = 2 + (lC-2)e^-t; |b-2| <= |lC-2|e^(-t/8); e^t a = lE";
    r.tolerance = "1e-10";
    const std::vector<std::pair<Rational, Rational>> scales{
        {1, 1}, {3, 5}, {1, 2}, {Rational(1, 2), Rational(7, 3)}, {Rational(9, 4), Rational(1, 10)}, {5, 40}};
    double closed = 0.0, fiber = 0.0, excess = -1.0;
    for (const auto& [le, lc] : scales) {
      ansatz::AnsatzModel m{ansatz::Kind::ProductEC, {le, lc}, FlowMode::normalized};
      auto tr = ansatz::integrate(m, 10.0, 1e-3, 10);
      const double LE = to_double(le), LC = to_double(lc);
      for (const auto& s : tr.samples) {
        closed = std::max(closed, std::abs(s.y[0] - LE * std::exp(-s.t)));
        closed = std::max(closed, std::abs(s.y[1] - (2.0 + (LC - 2.0) * std::exp(-s.t))));
      }
      for (const auto& row : ansatz::collapse_profile(tr)) {
        fiber = std::max(fiber, std::abs(row.fiber_rescaled - LE) / LE);
        excess = std::max(excess, row.residual - row.rate_bound);
        if (!row.schwarz_ok) excess = std::max(excess, 1.0);
      }
    }
    r.pass = closed <= 1e-10 && fiber <= 1e-10 && excess <= 0.0;
    r.got = "closed-form error " + detail::num(closed) + "; e^t a drift " + detail::num(fiber) +
            "; max(|b-2| - bound) " + detail::num(excess);
  });
}

/// Ansatz extinction times equal cohomology T exactly.
inline CriterionResult cross_module_T(const VerifyOptions& opt) {
  return detail::timed(7, "ansatz and cohomology extinction times", 5.0, [&](CriterionResult& r) {
    r.expected = "ansatz T == cohomology T for 20 random scales each (RoundP1, ProductP1P1)";
    r.tolerance = "exact";
    std::mt19937_64 rng(opt.seed + 7);
    const auto cp1 = detail::model(opt, "riemann-surface:0");
    const auto pp = detail::model(opt, "p1xp1");
    int agree = 0, total = 0;
    std::string first;
    for (auto kind : {ansatz::Kind::RoundP1, ansatz::Kind::ProductP1P1})
      for (int i = 0; i < 20; ++i) {
        std::vector<Rational> s{detail::random_positive(rng)};
        if (kind == ansatz::Kind::ProductP1P1) s.push_back(detail::random_positive(rng));
        ansatz::AnsatzModel m{kind, s, FlowMode::unnormalized};
        auto aT = ansatz::exact_extinction_time(m);
        const auto& cm = kind == ansatz::Kind::RoundP1 ? cp1 : pp;
        auto cT = cohomology::max_existence_time(cm, cohomology::ClassVector(s));
        auto tr = ansatz::integrate(m, to_double(*aT) + 0.01, 1e-3, 1 << 30);
        bool ok = aT && !cT.infinite && cT.exact() && cT.value() == *aT && tr.extinction &&
                  std::abs(*tr.extinction - to_double(*aT)) <= 1e-10;
        ++total;
        if (ok) {
          ++agree;
        } else if (first.empty()) {
          first = std::string(ansatz::kind_name(kind)) + " " + cohomology::ClassVector(s).str() + ": ansatz " +
                  (aT ? to_string(*aT) : "inf") + " vs cohomology " + (cT.infinite ? "inf" : to_string(cT.value()));
        }
      }
    r.pass = agree == total;
    r.got = std::to_string(agree) + "/" + std::to_string(total) + " equal" + (first.empty() ? "" : "; first mismatch " + first);
  });
}

/// Warped torus collapsing to its base circle.
inline CriterionResult gh_collapsing(const VerifyOptions&) {
  return detail::timed(8, "Gromov-Hausdorff collapsing", 60.0, [&](CriterionResult& r) {
    r.expected = "eps_t nonincreasing, eps_10 <= eps_0/10, gh(X,X) = 0 on catalogue";
    r.tolerance = "1e-9 monotonicity";
    std::vector<double> ts;
    for (int k = 0; k <= 40; ++k) ts.push_back(0.25 * k);
    auto s = gh::collapse_series(ts, 8, 8);
    double worst_increase = 0.0;
    for (std::size_t k = 1; k < ts.size(); ++k) worst_increase = std::max(worst_increase, s.epsilon[k] - s.epsilon[k - 1]);
    int zero = 0, total = 0;
    for (const auto& [name, X] : gh::small_space_catalogue()) {
      ++total;
      auto b = gh::gh_upper_bound(X, X);
      if (b.exact && b.epsilon == 0.0) ++zero;
    }
    const double e0 = s.epsilon.front(), e10 = s.epsilon.back();
    r.pass = worst_increase <= 1e-9 && e10 <= e0 / 10 && zero == total;
    r.got = "eps_0 = " + detail::num(e0) + ", eps_10 = " + detail::num(e10) + ", max increase " +
            detail::num(worst_increase) + "; " + std::to_string(zero) + "/" + std::to_string(total) + " self-distances 0";
  });
}

inline std::vector<std::function<CriterionResult(const VerifyOptions&)>> all_criteria() {
  return {cohomology_exactness, flow_stationarity, normalized_convergence, scalar_curvature_floor,
          matrix_lemma,         product_collapsing, cross_module_T, gh_collapsing};
}

inline std::vector<CriterionResult> run_all(const VerifyOptions& opt = {}) {
  std::vector<CriterionResult> out;
  for (const auto& c : all_criteria()) out.push_back(c(opt));
  return out;
}

}  // namespace krflab::verify
