#pragma once

// A priori estimate checks on flow diagnostics, plus the two pointwise matrix
// inequalities behind them.

#include "krflab/errors.hpp"
#include "krflab/maflow.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace krflab::estimates {

using maflow::DiagnosticsSeries;
using maflow::FlowMode;
using maflow::HermitianMatrix;

struct Verdict {
  std::string name;
  bool applicable = true;
  bool pass = true;
  std::string detail;
};

struct EstimateReport {
  std::vector<Verdict> verdicts;
  // normalized mode: sup|φ̇(t)| ≈ C_fit·e^{−μ t} over the late records
  std::optional<double> mu;
  std::optional<double> c_fit;

  bool all_pass() const {
    return std::all_of(verdicts.begin(), verdicts.end(), [](const Verdict& v) { return v.pass; });
  }
  const Verdict& at(const std::string& name) const {
    for (const auto& v : verdicts)
      if (v.name == name) return v;
    throw std::out_of_range("no verdict named " + name);
  }
};

struct EstimateOptions {
  double tol_R = 1e-4;
  double eps_pos = 1e-8;
  double growth_factor = 1.5;  // allowed late/early ratio of sup|φ| before flagging a trend
  double fit_floor = 1e-12;    // records with sup|φ̇| below this are round-off
};

/// Least-squares fit of log y = log C − μ t. Returns {μ, C}.
inline std::pair<double, double> fit_exponential(const std::vector<double>& t, const std::vector<double>& y) {
  if (t.size() != y.size() || t.size() < 2) throw std::invalid_argument("exponential fit needs at least two samples");
  const double m = static_cast<double>(t.size());
  double st = 0, sy = 0, stt = 0, sty = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    double ly = std::log(y[i]);
    st += t[i];
    sy += ly;
    stt += t[i] * t[i];
    sty += t[i] * ly;
  }
  double denom = m * stt - st * st;
  if (denom <= 0.0) throw std::invalid_argument("exponential fit needs distinct times");
  double slope = (m * sty - st * sy) / denom;
  double intercept = (sy - slope * st) / m;
  return {-slope, std::exp(intercept)};
}

inline EstimateReport estimate_report(const DiagnosticsSeries& series, const EstimateOptions& opt = {}) {
  const auto& r = series.records;
  if (r.empty()) throw std::invalid_argument("empty diagnostics series");
  EstimateReport rep;
  auto fmt = [](double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", x);
    return std::string(buf);
  };

  {
    // (i) no blow-up trend: the last quarter may not exceed the earlier running max by growth_factor
    Verdict v{"sup_phi_bounded", true, true, ""};
    const std::size_t split = r.size() - r.size() / 4;
    double early = 0.0, late = 0.0, overall = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) {
      (i < split ? early : late) = std::max(i < split ? early : late, r[i].sup_phi);
      overall = std::max(overall, r[i].sup_phi);
    }
    v.pass = std::isfinite(overall) && late <= opt.growth_factor * early + 1e-12;
    v.detail = "max sup|phi| = " + fmt(overall) + " (late " + fmt(late) + ", early " + fmt(early) + ")";
    rep.verdicts.push_back(v);
  }
  {
    // (ii) minimum principle for R, valid for the plain flow ∂ω/∂t = −Ric(ω)
    Verdict v{"inf_R_floor", true, true, ""};
    v.applicable = series.mode == FlowMode::unnormalized && !series.twisted;
    double floor = r.front().inf_R - opt.tol_R;
    double worst = r.front().inf_R;
    double worst_t = r.front().t;
    for (const auto& rec : r) {
      if (rec.inf_R < worst) {
        worst = rec.inf_R;
        worst_t = rec.t;
      }
    }
    if (v.applicable) {
      v.pass = worst >= floor;
      v.detail = "min inf R = " + fmt(worst) + " at t = " + fmt(worst_t) + ", floor " + fmt(floor);
    } else {
      v.detail = "not applicable: Omega twist or normalized mode changes the R evolution (min inf R = " + fmt(worst) + ")";
    }
    rep.verdicts.push_back(v);
  }
  {
    // (iii) metric equivalence C^{-1} ω0 ≤ ω(t) ≤ C ω0
    Verdict v{"metric_equivalence", true, true, ""};
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (const auto& rec : r) {
      lo = std::min(lo, rec.min_eig);
      hi = std::max(hi, rec.max_eig);
    }
    v.pass = lo >= opt.eps_pos && std::isfinite(hi);
    v.detail = "eigenvalues of g(t) in [" + fmt(lo) + ", " + fmt(hi) + "]";
    rep.verdicts.push_back(v);
  }
  {
    // (iv) exponential decay of φ̇ in normalized mode, and sup|φ̇|·e^t/(1+t) bounded
    Verdict v{"phidot_decay", true, true, ""};
    v.applicable = series.mode == FlowMode::normalized;
    if (v.applicable) {
      std::vector<double> ts, ys;
      for (const auto& rec : r)
        if (rec.sup_phidot > opt.fit_floor) {
          ts.push_back(rec.t);
          ys.push_back(rec.sup_phidot);
        }
      // stationary runs: nothing above the floor means φ̇ vanished identically
      if (ts.size() < 3) {
        v.pass = true;
        v.detail = "sup|phidot| below " + fmt(opt.fit_floor) + " throughout";
      } else {
        // late half of the usable records
        const double t_mid = 0.5 * (ts.front() + ts.back());
        std::vector<double> lt, ly;
        for (std::size_t i = 0; i < ts.size(); ++i)
          if (ts[i] >= t_mid) {
            lt.push_back(ts[i]);
            ly.push_back(ys[i]);
          }
        if (lt.size() < 2) {
          lt = ts;
          ly = ys;
        }
        auto [mu, c] = fit_exponential(lt, ly);
        rep.mu = mu;
        rep.c_fit = c;
        double early_ratio = 0.0, late_ratio = 0.0;
        for (std::size_t i = 0; i < ts.size(); ++i) {
          double q = ys[i] * std::exp(ts[i]) / (1.0 + ts[i]);
          (ts[i] < t_mid ? early_ratio : late_ratio) = std::max(ts[i] < t_mid ? early_ratio : late_ratio, q);
        }
        bool bounded = early_ratio == 0.0 || late_ratio <= opt.growth_factor * early_ratio;
        v.pass = mu > 0.0 && bounded;
        v.detail = "fitted mu = " + fmt(mu) + ", C = " + fmt(c) + "; sup|phidot| e^t/(1+t) late max " + fmt(late_ratio) +
                   " vs early " + fmt(early_ratio);
      }
    } else {
      v.detail = "not applicable in unnormalized mode";
    }
    rep.verdicts.push_back(v);
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Matrix gap lemma.
//
// For A Hermitian positive with tr A ≤ n + ε and det A ≥ 1 − ε, write S_k for
// the normalized elementary symmetric means of the eigenvalues. Then
//   ‖A − Id‖² = n²S₁² − 2nS₁ − n(n−1)S₂ + n.
// Maclaurin gives S₁ ≥ √S₂ ≥ S_n^{1/n} ≥ (1−ε)^{1/n} ≥ 1 − ε, so S₂ ≥ (1−ε)²
// and S₁ ∈ [1−ε, 1+ε/n]. The bound is convex in S₁, so its maximum sits at an
// endpoint:
//   S₁ = 1 + ε/n :  2(n²−1)ε + (1 − n² + n)ε²
//   S₁ = 1 − ε   :  nε²
// For n ≥ 2 both are ≤ 2(n²−1)ε (since n² − n − 1 > 0 and ε < 1); for n = 1
// the first is ε² ≤ ε. Hence C(n) = max(2(n²−1), 1).

inline double gap_constant(int n) { return std::max(2.0 * (n * n - 1), 1.0); }

struct GapCheck {
  double lhs = 0.0;    // ‖A − Id‖² (Frobenius)
  double bound = 0.0;  // C(n)·ε
  std::vector<double> means;  // S₁^{1}, S₂^{1/2}, ..., S_n^{1/n}
  bool chain_ok = true;
  bool pass = true;
};

/// Normalized elementary symmetric means S_k = e_k / C(n,k), k = 0..n.
inline std::vector<double> symmetric_means(const std::vector<double>& lambda) {
  const std::size_t n = lambda.size();
  std::vector<double> e(n + 1, 0.0);
  e[0] = 1.0;
  for (double l : lambda)
    for (std::size_t k = n; k >= 1; --k) e[k] += l * e[k - 1];
  double binom = 1.0;
  for (std::size_t k = 1; k <= n; ++k) {
    binom = binom * static_cast<double>(n - k + 1) / static_cast<double>(k);
    e[k] /= binom;
  }
  return e;
}

inline GapCheck matrix_gap_check(const HermitianMatrix& A, double eps) {
  const int n = static_cast<int>(A.rows());
  if (A.rows() != A.cols() || n < 1) throw std::invalid_argument("matrix must be square");
  if (!(eps > 0.0 && eps < 1.0)) throw DomainError("gap lemma needs 0 < eps < 1");
  Eigen::SelfAdjointEigenSolver<HermitianMatrix> es(A, Eigen::EigenvaluesOnly);
  std::vector<double> lambda(es.eigenvalues().data(), es.eigenvalues().data() + n);
  if (lambda.front() <= 0.0) throw DomainError("matrix is not positive definite");
  double tr = 0.0, det = 1.0;
  for (double l : lambda) {
    tr += l;
    det *= l;
  }
  const double slack = 1e-12;
  if (tr > n + eps + slack * n) throw DomainError("trace precondition tr A <= n + eps fails");
  if (det < 1.0 - eps - slack) throw DomainError("determinant precondition det A >= 1 - eps fails");

  auto S = symmetric_means(lambda);
  GapCheck out;
  out.lhs = n * n * S[1] * S[1] - 2.0 * n * S[1] + n;
  if (n >= 2) out.lhs -= n * (n - 1.0) * S[2];
  out.lhs = std::max(out.lhs, 0.0);
  out.bound = gap_constant(n) * eps;
  for (int k = 1; k <= n; ++k) out.means.push_back(std::pow(S[k], 1.0 / k));
  // 1 + ε/n ≥ S₁ ≥ √S₂ ≥ ... ≥ S_n^{1/n} ≥ 1 − ε
  std::vector<double> chain{1.0 + eps / n};
  chain.insert(chain.end(), out.means.begin(), out.means.end());
  chain.push_back(1.0 - eps);
  for (std::size_t i = 0; i + 1 < chain.size(); ++i)
    if (chain[i] < chain[i + 1] - slack * (1.0 + std::abs(chain[i]))) out.chain_ok = false;
  out.pass = out.chain_ok && out.lhs <= out.bound * (1.0 + slack);
  return out;
}

// ---------------------------------------------------------------------------
// With λ the eigenvalues of B^{-1}A:
//   tr_B A = Σλ ≤ (Σ 1/λ)^{n−1}/(n−1)! · Πλ
//   λ_min ≥ Πλ · (n−1)^{n−1} / (Σλ)^{n−1}

struct TraceCheck {
  std::vector<double> lambda;
  double trace_lhs = 0.0, trace_rhs = 0.0;
  double min_eig = 0.0, min_eig_bound = 0.0;
  bool pass = true;
};

inline TraceCheck trace_inequalities_check(const HermitianMatrix& A, const HermitianMatrix& B) {
  const int n = static_cast<int>(A.rows());
  if (A.rows() != A.cols() || B.rows() != A.rows() || B.cols() != A.cols())
    throw std::invalid_argument("matrices must be square and of equal size");
  Eigen::SelfAdjointEigenSolver<HermitianMatrix> ea(A, Eigen::EigenvaluesOnly), eb(B, Eigen::EigenvaluesOnly);
  if (ea.eigenvalues().minCoeff() <= 0.0 || eb.eigenvalues().minCoeff() <= 0.0)
    throw DomainError("trace inequalities need positive definite matrices");
  Eigen::GeneralizedSelfAdjointEigenSolver<HermitianMatrix> ge(A, B, Eigen::EigenvaluesOnly);
  TraceCheck out;
  out.lambda.assign(ge.eigenvalues().data(), ge.eigenvalues().data() + n);
  double sum = 0.0, inv_sum = 0.0, prod = 1.0;
  for (double l : out.lambda) {
    sum += l;
    inv_sum += 1.0 / l;
    prod *= l;
  }
  out.trace_lhs = sum;
  out.trace_rhs = std::pow(inv_sum, n - 1) / std::tgamma(static_cast<double>(n)) * prod;
  out.min_eig = out.lambda.front();
  out.min_eig_bound = prod * std::pow(static_cast<double>(n - 1), n - 1) / std::pow(sum, n - 1);
  const double rel = 1e-12;
  out.pass = out.trace_lhs <= out.trace_rhs * (1.0 + rel) && out.min_eig >= out.min_eig_bound * (1.0 - rel);
  return out;
}

}  // namespace krflab::estimates
