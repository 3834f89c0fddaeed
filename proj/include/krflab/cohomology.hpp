#pragma once

// Exact (1,1)-cohomology engine: class evolution under the Kähler-Ricci flow,
// Kähler/nef cone membership from a finite cone presentation, maximal
// existence time, limiting classes, null loci and the long-time regime.
//
// All numbers are exact rationals. Intersection numbers are stored in units of
// (2π)^n and class coordinates are chosen so that 2πc1(X) is rational; see the
// per-model notes in models.hpp for the dictionary to geometric variables.

#include "krflab/errors.hpp"
#include "krflab/polynomial.hpp"
#include "krflab/rational.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace krflab::cohomology {

/// Rational coordinates of a (1,1)-class in a model's basis.
class ClassVector {
 public:
  ClassVector() = default;
  explicit ClassVector(std::vector<Rational> coords) : coords_(std::move(coords)) {}
  ClassVector(std::initializer_list<Rational> coords) : coords_(coords) {}

  static ClassVector zero(std::size_t dim) { return ClassVector(std::vector<Rational>(dim, Rational(0))); }

  std::size_t size() const { return coords_.size(); }
  const Rational& operator[](std::size_t i) const { return coords_[i]; }
  Rational& operator[](std::size_t i) { return coords_[i]; }
  const std::vector<Rational>& coords() const { return coords_; }
  bool is_zero() const {
    return std::all_of(coords_.begin(), coords_.end(), [](const Rational& x) { return x == 0; });
  }

  friend bool operator==(const ClassVector&, const ClassVector&) = default;

  friend ClassVector operator+(const ClassVector& a, const ClassVector& b) {
    check_same(a, b);
    ClassVector r = a;
    for (std::size_t i = 0; i < r.size(); ++i) r.coords_[i] += b.coords_[i];
    return r;
  }
  friend ClassVector operator-(const ClassVector& a, const ClassVector& b) {
    check_same(a, b);
    ClassVector r = a;
    for (std::size_t i = 0; i < r.size(); ++i) r.coords_[i] -= b.coords_[i];
    return r;
  }
  friend ClassVector operator-(const ClassVector& a) { return Rational(-1) * a; }
  friend ClassVector operator*(const Rational& s, const ClassVector& a) {
    ClassVector r = a;
    for (auto& x : r.coords_) x *= s;
    return r;
  }

  std::string str() const {
    std::string out = "(";
    for (std::size_t i = 0; i < coords_.size(); ++i) out += (i ? ", " : "") + to_string(coords_[i]);
    return out + ")";
  }

 private:
  static void check_same(const ClassVector& a, const ClassVector& b) {
    if (a.size() != b.size())
      throw std::invalid_argument("class dimension mismatch: " + std::to_string(a.size()) + " vs " +
                                  std::to_string(b.size()));
  }
  std::vector<Rational> coords_;
};

/// Fully symmetric multilinear form of a given degree on a dim-dimensional
/// space, stored densely (dim^degree entries).
class SymmetricForm {
 public:
  SymmetricForm() = default;
  SymmetricForm(int degree, std::size_t dim) : degree_(degree), dim_(dim), entries_(ipow(dim, degree), Rational(0)) {
    if (degree < 1) throw std::invalid_argument("form degree must be positive");
  }

  /// Linear functional from a coefficient list.
  static SymmetricForm linear(std::vector<Rational> coeffs) {
    SymmetricForm f(1, coeffs.size());
    f.entries_ = std::move(coeffs);
    return f;
  }

  int degree() const { return degree_; }
  std::size_t dim() const { return dim_; }

  /// Sets the entry at an index tuple and all of its permutations.
  void set(std::vector<std::size_t> idx, const Rational& value) {
    check_index(idx);
    std::sort(idx.begin(), idx.end());
    do {
      entries_[flat(idx)] = value;
    } while (std::next_permutation(idx.begin(), idx.end()));
  }

  const Rational& at(std::span<const std::size_t> idx) const {
    check_index(idx);
    return entries_[flat(idx)];
  }

  bool is_symmetric() const {
    std::vector<std::size_t> idx(degree_, 0);
    for (std::size_t k = 0; k < entries_.size(); ++k) {
      unflat(k, idx);
      auto sorted = idx;
      std::sort(sorted.begin(), sorted.end());
      if (entries_[k] != entries_[flat(sorted)]) return false;
    }
    return true;
  }

  /// Multilinear evaluation F(v_1, ..., v_d).
  Rational evaluate(std::span<const ClassVector* const> args) const {
    if (static_cast<int>(args.size()) != degree_)
      throw std::invalid_argument("form of degree " + std::to_string(degree_) + " evaluated on " +
                                  std::to_string(args.size()) + " arguments");
    for (auto* v : args)
      if (v->size() != dim_) throw std::invalid_argument("class dimension mismatch in form evaluation");
    Rational total = 0;
    std::vector<std::size_t> idx(degree_, 0);
    for (std::size_t k = 0; k < entries_.size(); ++k) {
      if (entries_[k] == 0) continue;
      unflat(k, idx);
      Rational term = entries_[k];
      for (int j = 0; j < degree_ && term != 0; ++j) term *= (*args[j])[idx[j]];
      total += term;
    }
    return total;
  }

  /// F(a, ..., a).
  Rational power(const ClassVector& a) const {
    std::vector<const ClassVector*> args(degree_, &a);
    return evaluate(args);
  }

  /// Nonzero entries with sorted index tuples, one per orbit.
  std::vector<std::pair<std::vector<std::size_t>, Rational>> canonical_entries() const {
    std::vector<std::pair<std::vector<std::size_t>, Rational>> out;
    std::vector<std::size_t> idx(degree_, 0);
    for (std::size_t k = 0; k < entries_.size(); ++k) {
      unflat(k, idx);
      if (!std::is_sorted(idx.begin(), idx.end()) || entries_[k] == 0) continue;
      out.emplace_back(idx, entries_[k]);
    }
    return out;
  }

  const std::vector<Rational>& raw() const { return entries_; }

 private:
  static std::size_t ipow(std::size_t b, int e) {
    std::size_t r = 1;
    for (int i = 0; i < e; ++i) r *= b;
    return r;
  }
  void check_index(std::span<const std::size_t> idx) const {
    if (static_cast<int>(idx.size()) != degree_) throw std::invalid_argument("index arity does not match form degree");
    for (auto i : idx)
      if (i >= dim_) throw std::invalid_argument("form index out of range");
  }
  std::size_t flat(std::span<const std::size_t> idx) const {
    std::size_t k = 0;
    for (auto i : idx) k = k * dim_ + i;
    return k;
  }
  void unflat(std::size_t k, std::vector<std::size_t>& idx) const {
    for (int j = degree_ - 1; j >= 0; --j) {
      idx[j] = k % dim_;
      k /= dim_;
    }
  }

  int degree_ = 1;
  std::size_t dim_ = 0;
  std::vector<Rational> entries_;
};

/// One cone inequality: the class is Kähler iff every form(a,...,a) > 0.
struct ConeConstraint {
  std::string label;
  SymmetricForm form;
};

struct ConeSpec {
  std::vector<ConeConstraint> constraints;
};

/// A catalogued subvariety V with ∫_V a^k given by a degree-k form.
struct SubvarietyEntry {
  std::string label;
  int dim = 1;
  SymmetricForm restriction;
};

/// Finite presentation of H^{1,1}(X, R) for one manifold.
struct ManifoldModel {
  std::string name;
  int n = 1;
  std::vector<std::string> basis;
  SymmetricForm tensor;  // degree n
  ClassVector c1twopi;   // 2π c1(X)
  ConeSpec cone;
  std::vector<SubvarietyEntry> catalogue;
  std::optional<int> kodaira;  // nullopt = minus infinity
  std::string notes;           // coordinate dictionary to the geometric variables

  std::size_t dim() const { return basis.size(); }
};

/// Structural checks for user-supplied models. Throws std::invalid_argument.
inline void validate(const ManifoldModel& m) {
  auto fail = [&](const std::string& why) { throw std::invalid_argument("model '" + m.name + "': " + why); };
  if (m.n < 1) fail("complex dimension must be positive");
  if (m.basis.empty()) fail("empty basis");
  if (m.tensor.degree() != m.n || m.tensor.dim() != m.dim()) fail("intersection tensor must have degree n on the basis");
  if (!m.tensor.is_symmetric()) fail("intersection tensor is not symmetric");
  if (m.c1twopi.size() != m.dim()) fail("c1twopi has wrong length");
  if (m.cone.constraints.empty()) fail("cone spec has no constraints");
  for (const auto& c : m.cone.constraints) {
    if (c.form.dim() != m.dim()) fail("constraint '" + c.label + "' has wrong dimension");
    if (c.form.degree() != 1 && c.form.degree() != m.n) fail("constraint '" + c.label + "' must have degree 1 or n");
    if (!c.form.is_symmetric()) fail("constraint '" + c.label + "' is not symmetric");
  }
  for (const auto& v : m.catalogue) {
    if (v.dim < 1 || v.dim > m.n) fail("subvariety '" + v.label + "' has invalid dimension");
    if (v.restriction.degree() != v.dim || v.restriction.dim() != m.dim())
      fail("subvariety '" + v.label + "' restriction form must have degree dim V");
  }
  if (m.kodaira && (*m.kodaira < 0 || *m.kodaira > m.n)) fail("Kodaira dimension out of range");
}

namespace detail {
inline void check_dim(const ManifoldModel& m, const ClassVector& a) {
  if (a.size() != m.dim())
    throw std::invalid_argument("class has " + std::to_string(a.size()) + " coordinates but model '" + m.name +
                                "' has basis dimension " + std::to_string(m.dim()));
}

inline Rational binomial(int n, int k) {
  Rational r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

// F(base - t*dir, ...) as a polynomial in t.
inline Polynomial restrict_to_line(const SymmetricForm& form, const ClassVector& base, const ClassVector& dir) {
  const int d = form.degree();
  std::vector<Rational> coeffs(d + 1);
  std::vector<const ClassVector*> args(d);
  for (int k = 0; k <= d; ++k) {
    for (int j = 0; j < d; ++j) args[j] = j < k ? &dir : &base;
    Rational mixed = form.evaluate(args);
    coeffs[k] = binomial(d, k) * mixed * (k % 2 ? -1 : 1);
  }
  return Polynomial(std::move(coeffs));
}
}  // namespace detail

/// [ω(t)] = [ω0] − t·2πc1(X).
inline ClassVector evolve_class(const ManifoldModel& m, const ClassVector& a0, const Rational& t) {
  detail::check_dim(m, a0);
  return a0 - t * m.c1twopi;
}

/// Labels of the cone constraints that are not strictly positive on a.
inline std::vector<std::string> violated_constraints(const ManifoldModel& m, const ClassVector& a) {
  detail::check_dim(m, a);
  std::vector<std::string> out;
  for (const auto& c : m.cone.constraints)
    if (c.form.power(a) <= 0) out.push_back(c.label);
  return out;
}

inline bool is_kahler(const ManifoldModel& m, const ClassVector& a) {
  detail::check_dim(m, a);
  return std::all_of(m.cone.constraints.begin(), m.cone.constraints.end(),
                     [&](const ConeConstraint& c) { return c.form.power(a) > 0; });
}

inline bool is_nef(const ManifoldModel& m, const ClassVector& a) {
  detail::check_dim(m, a);
  return std::all_of(m.cone.constraints.begin(), m.cone.constraints.end(),
                     [&](const ConeConstraint& c) { return c.form.power(a) >= 0; });
}

/// ∫_X a^n in units of (2π)^n.
inline Rational volume(const ManifoldModel& m, const ClassVector& a) {
  detail::check_dim(m, a);
  return m.tensor.power(a);
}

/// Maximal existence time. `time` is exact when time.lo == time.hi.
struct ExistenceTime {
  bool infinite = false;
  RootBracket time;                   // meaningful when !infinite
  std::vector<std::string> binding;   // constraints attaining the minimum

  bool exact() const { return infinite || time.exact(); }
  /// Exact value, or the midpoint of the isolating interval.
  Rational value() const { return time.mid(); }
};

inline ExistenceTime max_existence_time(const ManifoldModel& m, const ClassVector& a0) {
  detail::check_dim(m, a0);
  if (!is_kahler(m, a0)) {
    std::string why;
    for (const auto& l : violated_constraints(m, a0)) why += (why.empty() ? "" : ", ") + l;
    throw DomainError("initial class " + a0.str() + " is not Kähler on " + m.name + " (violated: " + why + ")");
  }

  ExistenceTime result;
  result.infinite = true;
  for (const auto& c : m.cone.constraints) {
    auto root = first_positive_root(detail::restrict_to_line(c.form, a0, m.c1twopi));
    if (!root) continue;
    if (result.infinite || root->hi < result.time.lo) {
      result.infinite = false;
      result.time = *root;
      result.binding = {c.label};
    } else if (root->lo <= result.time.hi) {
      // overlapping or equal failure times
      if (root->exact() && result.time.exact() && root->lo == result.time.lo) {
        result.binding.push_back(c.label);
      } else {
        result.time.lo = std::min(result.time.lo, root->lo);
        result.time.hi = std::min(result.time.hi, root->hi);
        result.binding.push_back(c.label);
      }
    }
  }
  return result;
}

/// [α] = [ω0] − T·2πc1(X). Uses the midpoint when T is only isolated.
inline ClassVector limiting_class(const ManifoldModel& m, const ClassVector& a0) {
  auto T = max_existence_time(m, a0);
  if (T.infinite) throw DomainError("maximal existence time is infinite on " + m.name + "; no limiting class");
  return evolve_class(m, a0, T.value());
}

inline bool is_noncollapsed(const ManifoldModel& m, const ClassVector& a0) {
  return volume(m, limiting_class(m, a0)) > 0;
}

/// Catalogue-relative null locus of a nef class.
struct NullLocus {
  bool whole_space = false;
  std::vector<std::string> labels;
  bool relative_to_catalogue = true;
};

inline NullLocus null_locus(const ManifoldModel& m, const ClassVector& a) {
  if (!is_nef(m, a)) throw DomainError("null locus requires a nef class; " + a.str() + " is not nef on " + m.name);
  NullLocus out;
  out.whole_space = volume(m, a) == 0;
  for (const auto& v : m.catalogue)
    if (v.restriction.power(a) == 0) out.labels.push_back(v.label);
  return out;
}

/// Initial class a + s·2πc1 whose flow becomes singular at T = s with
/// limiting class a. The geometric scale in [α] + λc1 is λ = 2πs.
inline ClassVector singularity_seed(const ManifoldModel& m, const ClassVector& a, const Rational& s) {
  detail::check_dim(m, a);
  if (s <= 0) throw std::invalid_argument("seed scale must be positive");
  if (!is_nef(m, a)) throw DomainError("target class " + a.str() + " is not nef");
  if (is_kahler(m, a)) throw DomainError("target class " + a.str() + " is already Kähler");
  ClassVector seed = a + s * m.c1twopi;
  if (!is_kahler(m, seed))
    throw DomainError("a + s·2πc1 = " + seed.str() + " is not Kähler for s = " + to_string(s));
  auto T = max_existence_time(m, seed);
  if (T.infinite || !T.exact() || T.value() != s || evolve_class(m, seed, s) != a)
    throw std::logic_error("singularity seed postcondition failed on " + m.name);
  return seed;
}

enum class Regime { CalabiYau, AmpleCanonical, NefBigCanonical, IntermediateKodaira };

inline const char* regime_name(Regime r) {
  switch (r) {
    case Regime::CalabiYau: return "CalabiYau";
    case Regime::AmpleCanonical: return "AmpleCanonical";
    case Regime::NefBigCanonical: return "NefBigCanonical";
    case Regime::IntermediateKodaira: return "IntermediateKodaira";
  }
  return "?";
}

struct RegimeInfo {
  Regime regime;
  std::optional<int> kodaira;
  int fiber_dimension = 0;  // n − κ for the intermediate case
};

/// Long-time trichotomy for models with K_X nef.
inline RegimeInfo long_time_regime(const ManifoldModel& m) {
  ClassVector canonical = -m.c1twopi;
  if (!is_nef(m, canonical)) throw DomainError("K_X is not nef on " + m.name + ": the flow has a finite-time singularity");
  if (m.c1twopi.is_zero()) return {Regime::CalabiYau, m.kodaira, m.n};
  if (is_kahler(m, canonical)) return {Regime::AmpleCanonical, m.kodaira, 0};
  if (volume(m, canonical) > 0) return {Regime::NefBigCanonical, m.kodaira, 0};
  if (!m.kodaira) throw std::logic_error("model '" + m.name + "' with K_X nef must store a finite Kodaira dimension");
  return {Regime::IntermediateKodaira, m.kodaira, m.n - *m.kodaira};
}

}  // namespace krflab::cohomology
