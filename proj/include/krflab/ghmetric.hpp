#pragma once

// Gromov-Hausdorff machinery on finite metric spaces, in the two-map form:
// dist_GH(X, Y) ≤ ε when there are F: X → Y and G: Y → X with
//
//   |d_X(x1,x2) − d_Y(F x1, F x2)| ≤ ε     |d_Y(y1,y2) − d_X(G y1, G y2)| ≤ ε
//   d_X(x, G F x) ≤ ε                      d_Y(y, F G y) ≤ ε
//
// plus a collapsing warped torus g_t = dx² + e^{−t}dy² sampled on a grid.

#include "krflab/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

namespace krflab::gh {

class FiniteMetricSpace {
 public:
  FiniteMetricSpace() = default;
  FiniteMetricSpace(std::vector<std::string> labels, std::vector<double> D) : labels_(std::move(labels)), D_(std::move(D)) {
    validate();
  }
  /// Unlabelled space; points are named by index.
  static FiniteMetricSpace from_rows(const std::vector<std::vector<double>>& rows) {
    std::vector<std::string> labels;
    std::vector<double> D;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      labels.push_back(std::to_string(i));
      if (rows[i].size() != rows.size()) throw std::invalid_argument("distance matrix must be square");
      D.insert(D.end(), rows[i].begin(), rows[i].end());
    }
    return {std::move(labels), std::move(D)};
  }

  std::size_t size() const { return labels_.size(); }
  double d(std::size_t i, std::size_t j) const { return D_[i * size() + j]; }
  const std::vector<std::string>& labels() const { return labels_; }
  const std::vector<double>& matrix() const { return D_; }
  double diameter() const { return D_.empty() ? 0.0 : *std::max_element(D_.begin(), D_.end()); }

  /// Relabels point i as perm[i].
  FiniteMetricSpace permuted(const std::vector<std::size_t>& perm) const {
    const std::size_t n = size();
    std::vector<std::string> l(n);
    std::vector<double> D(n * n);
    for (std::size_t i = 0; i < n; ++i) {
      l[perm[i]] = labels_[i];
      for (std::size_t j = 0; j < n; ++j) D[perm[i] * n + perm[j]] = d(i, j);
    }
    return {std::move(l), std::move(D)};
  }

 private:
  void validate() const {
    const std::size_t n = labels_.size();
    if (n == 0) throw std::invalid_argument("metric space must have at least one point");
    if (D_.size() != n * n) throw std::invalid_argument("distance matrix must be N x N with N = number of labels");
    for (std::size_t i = 0; i < n; ++i) {
      if (d(i, i) != 0.0) throw std::invalid_argument("distance matrix must have zero diagonal");
      for (std::size_t j = 0; j < n; ++j) {
        if (!(d(i, j) >= 0.0) || !std::isfinite(d(i, j))) throw std::invalid_argument("distances must be finite and >= 0");
        if (d(i, j) != d(j, i)) throw std::invalid_argument("distance matrix must be symmetric");
      }
    }
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        for (std::size_t k = 0; k < n; ++k)
          if (d(i, k) > d(i, j) + d(j, k) + 1e-12)
            throw std::invalid_argument("triangle inequality fails at (" + labels_[i] + ", " + labels_[j] + ", " +
                                        labels_[k] + ")");
  }

  std::vector<std::string> labels_;
  std::vector<double> D_;
};

struct CorrespondencePair {
  std::vector<std::size_t> F;  // X → Y
  std::vector<std::size_t> G;  // Y → X
};

struct Defects {
  double distortion_F = 0.0;  // |d_X − d_Y∘F|
  double distortion_G = 0.0;  // |d_Y − d_X∘G|
  double return_X = 0.0;      // d_X(x, GFx)
  double return_Y = 0.0;      // d_Y(y, FGy)
  double epsilon() const { return std::max({distortion_F, distortion_G, return_X, return_Y}); }
};

inline void check_maps(const FiniteMetricSpace& X, const FiniteMetricSpace& Y, const CorrespondencePair& m) {
  if (m.F.size() != X.size() || m.G.size() != Y.size()) throw std::invalid_argument("maps do not match the space sizes");
  for (auto y : m.F)
    if (y >= Y.size()) throw std::invalid_argument("F maps outside Y");
  for (auto x : m.G)
    if (x >= X.size()) throw std::invalid_argument("G maps outside X");
}

inline Defects gh_defects(const FiniteMetricSpace& X, const FiniteMetricSpace& Y, const CorrespondencePair& m) {
  check_maps(X, Y, m);
  Defects out;
  for (std::size_t a = 0; a < X.size(); ++a) {
    for (std::size_t b = a + 1; b < X.size(); ++b)
      out.distortion_F = std::max(out.distortion_F, std::abs(X.d(a, b) - Y.d(m.F[a], m.F[b])));
    out.return_X = std::max(out.return_X, X.d(a, m.G[m.F[a]]));
  }
  for (std::size_t a = 0; a < Y.size(); ++a) {
    for (std::size_t b = a + 1; b < Y.size(); ++b)
      out.distortion_G = std::max(out.distortion_G, std::abs(Y.d(a, b) - X.d(m.G[a], m.G[b])));
    out.return_Y = std::max(out.return_Y, Y.d(a, m.F[m.G[a]]));
  }
  return out;
}

/// Smallest ε for which the given maps witness dist_GH ≤ ε.
inline double gh_epsilon(const FiniteMetricSpace& X, const FiniteMetricSpace& Y, const CorrespondencePair& m) {
  return gh_defects(X, Y, m).epsilon();
}

struct GhBound {
  double epsilon = 0.0;
  CorrespondencePair maps;
  bool exact = true;  // false: heuristic search, upper bound only
};

namespace detail {

constexpr double kTol = 1e-12;

// Backtracking search for F, then G, with every defect ≤ tau.
class ThresholdSearch {
 public:
  ThresholdSearch(const FiniteMetricSpace& X, const FiniteMetricSpace& Y, double tau) : X_(X), Y_(Y), tau_(tau + kTol) {}

  bool solve(CorrespondencePair& out) {
    F_.assign(X_.size(), 0);
    G_.assign(Y_.size(), 0);
    if (!assign_F(0)) return false;
    out = {F_, G_};
    return true;
  }

 private:
  bool assign_F(std::size_t a) {
    if (a == X_.size()) return assign_G(0);
    for (std::size_t y = 0; y < Y_.size(); ++y) {
      bool ok = true;
      for (std::size_t b = 0; b < a && ok; ++b) ok = std::abs(X_.d(a, b) - Y_.d(y, F_[b])) <= tau_;
      if (!ok) continue;
      F_[a] = y;
      if (assign_F(a + 1)) return true;
    }
    return false;
  }

  bool assign_G(std::size_t a) {
    if (a == Y_.size()) {
      for (std::size_t x = 0; x < X_.size(); ++x)
        if (X_.d(x, G_[F_[x]]) > tau_) return false;
      return true;
    }
    for (std::size_t x = 0; x < X_.size(); ++x) {
      if (Y_.d(a, F_[x]) > tau_) continue;
      bool ok = true;
      for (std::size_t b = 0; b < a && ok; ++b) ok = std::abs(Y_.d(a, b) - X_.d(x, G_[b])) <= tau_;
      if (!ok) continue;
      // return_X constraints involving points already settled
      for (std::size_t p = 0; p < X_.size() && ok; ++p)
        if (F_[p] == a) ok = X_.d(p, x) <= tau_;
      if (!ok) continue;
      G_[a] = x;
      if (assign_G(a + 1)) return true;
    }
    return false;
  }

  const FiniteMetricSpace& X_;
  const FiniteMetricSpace& Y_;
  double tau_;
  std::vector<std::size_t> F_, G_;
};

inline std::vector<double> candidate_values(const FiniteMetricSpace& X, const FiniteMetricSpace& Y) {
  std::vector<double> c{0.0};
  for (double a : X.matrix()) c.push_back(a);
  for (double b : Y.matrix()) c.push_back(b);
  for (double a : X.matrix())
    for (double b : Y.matrix()) c.push_back(std::abs(a - b));
  std::sort(c.begin(), c.end());
  c.erase(std::unique(c.begin(), c.end()), c.end());
  return c;
}

struct Score {
  double max = 0.0;
  double sum = 0.0;
  bool operator<(const Score& o) const { return max < o.max - kTol || (max <= o.max + kTol && sum < o.sum - kTol); }
};

inline Score score(const FiniteMetricSpace& X, const FiniteMetricSpace& Y, const CorrespondencePair& m) {
  Score s;
  auto add = [&](double v) {
    s.max = std::max(s.max, v);
    s.sum += v * v;
  };
  for (std::size_t a = 0; a < X.size(); ++a) {
    for (std::size_t b = a + 1; b < X.size(); ++b) add(std::abs(X.d(a, b) - Y.d(m.F[a], m.F[b])));
    add(X.d(a, m.G[m.F[a]]));
  }
  for (std::size_t a = 0; a < Y.size(); ++a) {
    for (std::size_t b = a + 1; b < Y.size(); ++b) add(std::abs(Y.d(a, b) - X.d(m.G[a], m.G[b])));
    add(Y.d(a, m.F[m.G[a]]));
  }
  return s;
}

}  // namespace detail

struct SearchOptions {
  std::size_t exhaustive_limit = 36;  // N_X·N_Y at or below this is searched exactly
  int restarts = 64;
  std::uint64_t seed = 0;
};

/// Minimizes gh_epsilon over all map pairs: exactly by threshold search when
/// N_X·N_Y is small, else by seeded local search (upper bound only).
inline GhBound gh_upper_bound(const FiniteMetricSpace& X, const FiniteMetricSpace& Y, const SearchOptions& opt = {}) {
  if (X.size() * Y.size() <= opt.exhaustive_limit) {
    auto cand = detail::candidate_values(X, Y);
    // the largest candidate is always feasible: it bounds every defect
    std::size_t lo = 0, hi = cand.size() - 1;
    CorrespondencePair best;
    detail::ThresholdSearch(X, Y, cand[hi]).solve(best);
    while (lo < hi) {
      std::size_t mid = (lo + hi) / 2;
      CorrespondencePair m;
      if (detail::ThresholdSearch(X, Y, cand[mid]).solve(m)) {
        hi = mid;
        best = m;
      } else {
        lo = mid + 1;
      }
    }
    return {gh_epsilon(X, Y, best), best, true};
  }

  std::mt19937_64 rng(opt.seed);
  GhBound out{std::numeric_limits<double>::infinity(), {}, false};
  detail::Score best_score{std::numeric_limits<double>::infinity(), 0.0};
  for (int r = 0; r < opt.restarts; ++r) {
    // anchor x0 → y_r, then match distance profiles to the anchors
    std::size_t x0 = std::uniform_int_distribution<std::size_t>(0, X.size() - 1)(rng);
    std::size_t y0 = std::uniform_int_distribution<std::size_t>(0, Y.size() - 1)(rng);
    CorrespondencePair m{std::vector<std::size_t>(X.size()), std::vector<std::size_t>(Y.size())};
    for (std::size_t x = 0; x < X.size(); ++x) {
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t y = 0; y < Y.size(); ++y) {
        double v = std::abs(X.d(x0, x) - Y.d(y0, y));
        if (v < best) best = v, m.F[x] = y;
      }
    }
    for (std::size_t y = 0; y < Y.size(); ++y) {
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t x = 0; x < X.size(); ++x) {
        double v = std::abs(Y.d(y0, y) - X.d(x0, x));
        if (v < best) best = v, m.G[y] = x;
      }
    }
    auto s = detail::score(X, Y, m);
    for (bool improved = true; improved;) {
      improved = false;
      for (std::size_t x = 0; x < X.size(); ++x)
        for (std::size_t y = 0; y < Y.size(); ++y) {
          if (m.F[x] == y) continue;
          auto keep = m.F[x];
          m.F[x] = y;
          auto t = detail::score(X, Y, m);
          if (t < s) {
            s = t;
            improved = true;
          } else {
            m.F[x] = keep;
          }
        }
      for (std::size_t y = 0; y < Y.size(); ++y)
        for (std::size_t x = 0; x < X.size(); ++x) {
          if (m.G[y] == x) continue;
          auto keep = m.G[y];
          m.G[y] = x;
          auto t = detail::score(X, Y, m);
          if (t < s) {
            s = t;
            improved = true;
          } else {
            m.G[y] = keep;
          }
        }
    }
    if (s < best_score) {
      best_score = s;
      out.maps = m;
    }
  }
  out.epsilon = gh_epsilon(X, Y, out.maps);
  return out;
}

/// Grid samples (i/N_b, j/N_f) of the torus with metric dx² + e^{−t}dy².
/// Point (i, j) has index i·N_f + j.
inline FiniteMetricSpace sample_warped_torus(double t, int N_b, int N_f) {
  if (N_b < 1 || N_f < 1) throw std::invalid_argument("sample counts must be positive");
  if (!(t >= 0.0)) throw std::invalid_argument("t must be nonnegative");
  const double w = std::exp(-t);
  const std::size_t n = static_cast<std::size_t>(N_b) * N_f;
  std::vector<std::string> labels;
  std::vector<double> D(n * n);
  for (int i = 0; i < N_b; ++i)
    for (int j = 0; j < N_f; ++j) labels.push_back("(" + std::to_string(i) + "," + std::to_string(j) + ")");
  for (std::size_t p = 0; p < n; ++p)
    for (std::size_t q = 0; q < n; ++q) {
      double dx = static_cast<double>(static_cast<int>(q / N_f) - static_cast<int>(p / N_f)) / N_b;
      double dy = static_cast<double>(static_cast<int>(q % N_f) - static_cast<int>(p % N_f)) / N_f;
      double best = std::numeric_limits<double>::infinity();
      for (int k = -1; k <= 1; ++k)
        for (int l = -1; l <= 1; ++l) best = std::min(best, std::sqrt((dx + k) * (dx + k) + w * (dy + l) * (dy + l)));
      D[p * n + q] = best;
    }
  // exact symmetry for the validation
  for (std::size_t p = 0; p < n; ++p)
    for (std::size_t q = p + 1; q < n; ++q) D[q * n + p] = D[p * n + q];
  return {std::move(labels), std::move(D)};
}

/// N equally spaced points on a circle of length 1.
inline FiniteMetricSpace sample_circle(int N) { return sample_warped_torus(0.0, N, 1); }

struct CollapseSeries {
  int N_b = 0, N_f = 0;
  std::vector<double> t;
  std::vector<double> epsilon;
  double c1 = 0.0;  // max (ε_t − floor)·e^{t/2}
  double c2 = 0.0;  // N_b·floor
  double floor = 0.0;  // ε with the fiber collapsed to zero length
};

/// ε_t for the projection F(i, j) = i and the section G(i) = (i, 0).
inline CollapseSeries collapse_series(const std::vector<double>& ts, int N_b, int N_f) {
  if (!std::is_sorted(ts.begin(), ts.end())) throw std::invalid_argument("t values must be increasing");
  CollapseSeries out{N_b, N_f, ts, {}, 0.0, 0.0, 0.0};
  const auto base = sample_circle(N_b);
  CorrespondencePair m;
  for (int i = 0; i < N_b; ++i) {
    for (int j = 0; j < N_f; ++j) m.F.push_back(static_cast<std::size_t>(i));
    m.G.push_back(static_cast<std::size_t>(i) * N_f);
  }
  for (double t : ts) out.epsilon.push_back(gh_epsilon(sample_warped_torus(t, N_b, N_f), base, m));
  // t → ∞: the torus distance degenerates to the base distance; ε is its defect
  {
    double worst = 0.0;
    for (int p = 0; p < N_b * N_f; ++p)
      for (int q = 0; q < N_b * N_f; ++q) {
        double dx = std::abs(p / N_f - q / N_f) / static_cast<double>(N_b);
        worst = std::max(worst, std::abs(std::min(dx, 1.0 - dx) - base.d(p / N_f, q / N_f)));
      }
    out.floor = worst;
  }
  out.c2 = N_b * out.floor;
  for (std::size_t k = 0; k < ts.size(); ++k)
    out.c1 = std::max(out.c1, (out.epsilon[k] - out.floor) * std::exp(ts[k] / 2.0));
  return out;
}

/// Small spaces (N ≤ 6) used as sanity fixtures.
inline std::vector<std::pair<std::string, FiniteMetricSpace>> small_space_catalogue() {
  std::vector<std::pair<std::string, FiniteMetricSpace>> out;
  out.emplace_back("point", FiniteMetricSpace::from_rows({{0.0}}));
  out.emplace_back("two-point", FiniteMetricSpace::from_rows({{0, 1}, {1, 0}}));
  out.emplace_back("equilateral-triangle", FiniteMetricSpace::from_rows({{0, 1, 1}, {1, 0, 1}, {1, 1, 0}}));
  out.emplace_back("path-3", FiniteMetricSpace::from_rows({{0, 1, 2}, {1, 0, 1}, {2, 1, 0}}));
  out.emplace_back("cycle-4", FiniteMetricSpace::from_rows({{0, 1, 2, 1}, {1, 0, 1, 2}, {2, 1, 0, 1}, {1, 2, 1, 0}}));
  out.emplace_back("star-4", FiniteMetricSpace::from_rows({{0, 1, 1, 1}, {1, 0, 2, 2}, {1, 2, 0, 2}, {1, 2, 2, 0}}));
  out.emplace_back("circle-5", sample_circle(5));
  out.emplace_back("circle-6", sample_circle(6));
  out.emplace_back("warped-torus-2x3", sample_warped_torus(0.0, 2, 3));
  out.emplace_back("warped-torus-3x2-t1", sample_warped_torus(1.0, 3, 2));
  std::vector<std::vector<double>> discrete(6, std::vector<double>(6, 1.0));
  for (int i = 0; i < 6; ++i) discrete[i][i] = 0.0;
  out.emplace_back("discrete-6", FiniteMetricSpace::from_rows(discrete));
  out.emplace_back("ultrametric-5", FiniteMetricSpace::from_rows({{0, 1, 3, 3, 3},
                                                        {1, 0, 3, 3, 3},
                                                        {3, 3, 0, 2, 2},
                                                        {3, 3, 2, 0, 0.5},
                                                        {3, 3, 2, 0.5, 0}}));
  return out;
}

inline nlohmann::json to_json(const FiniteMetricSpace& X) {
  return {{"schema", 1}, {"labels", X.labels()}, {"D", X.matrix()}};
}

inline FiniteMetricSpace space_from_json(const nlohmann::json& j) {
  if (j.value("schema", 1) != 1) throw std::invalid_argument("unsupported metric space schema");
  auto D = j.at("D");
  std::vector<double> flat;
  if (!D.empty() && D.front().is_array()) {
    for (const auto& row : D)
      for (const auto& v : row) flat.push_back(v.get<double>());
  } else {
    flat = D.get<std::vector<double>>();
  }
  std::vector<std::string> labels;
  if (j.contains("labels")) {
    labels = j.at("labels").get<std::vector<std::string>>();
  } else {
    auto n = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(flat.size()))));
    for (std::size_t i = 0; i < n; ++i) labels.push_back(std::to_string(i));
  }
  return {std::move(labels), std::move(flat)};
}

}  // namespace krflab::gh
