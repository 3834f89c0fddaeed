#include "krflab/model_io.hpp"
#include "krflab/models.hpp"

#include <catch_amalgamated.hpp>

#include <random>

using namespace krflab;
using namespace krflab::cohomology;

namespace {

Rational random_rational(std::mt19937_64& rng, int max_num = 40, int max_den = 12) {
  std::uniform_int_distribution<int> num(-max_num, max_num), den(1, max_den);
  return Rational(num(rng), den(rng));
}

Rational random_positive(std::mt19937_64& rng, int max_num = 40, int max_den = 12) {
  std::uniform_int_distribution<int> num(1, max_num), den(1, max_den);
  return Rational(num(rng), den(rng));
}

ClassVector random_class(std::mt19937_64& rng, std::size_t dim) {
  std::vector<Rational> c;
  for (std::size_t i = 0; i < dim; ++i) c.push_back(random_rational(rng));
  return ClassVector(c);
}

// Random Kähler class by rejection.
ClassVector random_kahler(std::mt19937_64& rng, const ManifoldModel& m) {
  for (;;) {
    auto a = random_class(rng, m.dim());
    if (is_kahler(m, a)) return a;
  }
}

Rational min_of(const Rational& a, const Rational& b) { return a < b ? a : b; }

}  // namespace

TEST_CASE("built-in models are structurally valid", "[cohomology]") {
  for (const auto& m : builtin_catalogue()) {
    INFO(m.name);
    CHECK_NOTHROW(validate(m));
  }
  CHECK(builtin_catalogue().size() == 6);
  CHECK_NOTHROW(validate(torus(3)));
  CHECK(builtin_model("riemann-surface:1").name == "torus:1");
  CHECK_THROWS_AS(builtin_model("k3"), std::invalid_argument);
}

TEST_CASE("evolve_class", "[cohomology]") {
  const auto cp1 = riemann_surface_genus0();
  const Rational lambda(7, 3), t(1, 5);
  CHECK(evolve_class(cp1, ClassVector{lambda}, t) == ClassVector{lambda - 2 * t});

  const auto bl = blowup_p2();
  ClassVector a0{5, Rational(-3, 2)};
  CHECK(evolve_class(bl, a0, 0) == a0);

  // independent componentwise arithmetic: (mu1 - 3t, mu2 + t)
  std::mt19937_64 rng(1);
  for (int i = 0; i < 100; ++i) {
    Rational mu1 = random_rational(rng), mu2 = random_rational(rng), s = random_rational(rng);
    Rational e1 = mu1, e2 = mu2;
    e1 -= s * 3;
    e2 += s;
    CHECK(evolve_class(bl, ClassVector{mu1, mu2}, s) == ClassVector{e1, e2});
  }

  CHECK_THROWS_AS(evolve_class(bl, ClassVector{1}, t), std::invalid_argument);
}

TEST_CASE("Kähler and nef membership", "[cohomology]") {
  const auto bl = blowup_p2();
  CHECK(is_kahler(bl, ClassVector{4, -1}));
  CHECK(is_kahler(bl, ClassVector{Rational(3, 2), Rational(-1, 7)}));
  CHECK_FALSE(is_kahler(bl, ClassVector{1, -1}));
  CHECK(is_nef(bl, ClassVector{1, -1}));
  CHECK_FALSE(is_kahler(bl, ClassVector{1, 1}));

  for (const auto& m : builtin_catalogue()) {
    auto zero = ClassVector::zero(m.dim());
    CHECK_FALSE(is_kahler(m, zero));
    CHECK(is_nef(m, zero));
  }

  const auto pp = product_p1p1();
  CHECK_FALSE(is_kahler(pp, ClassVector{1, 0}));
  CHECK(is_nef(pp, ClassVector{1, 0}));
  CHECK(violated_constraints(pp, ClassVector{1, -1}) == std::vector<std::string>{"lambda2>0"});
}

TEST_CASE("Nakai-Moishezon agreement on the blow-up", "[cohomology][property]") {
  const auto bl = blowup_p2();
  std::mt19937_64 rng(2024);
  for (int i = 0; i < 10000; ++i) {
    Rational l1 = random_rational(rng, 30, 9), l2 = random_rational(rng, 30, 9);
    bool closed_form = 0 < -l2 && -l2 < l1;
    REQUIRE(is_kahler(bl, ClassVector{l1, l2}) == closed_form);
  }
}

TEST_CASE("cone homogeneity and convexity", "[cohomology][property]") {
  std::mt19937_64 rng(99);
  auto models = builtin_catalogue();
  models.push_back(torus(3));
  for (const auto& m : models) {
    for (int i = 0; i < 300; ++i) {
      auto a = random_class(rng, m.dim());
      Rational s = random_positive(rng);
      CHECK(is_kahler(m, a) == is_kahler(m, s * a));
      CHECK(is_nef(m, a) == is_nef(m, s * a));
    }
    for (int i = 0; i < 100; ++i) {
      auto a = random_kahler(rng, m), b = random_kahler(rng, m);
      CHECK(is_kahler(m, a + b));
    }
  }
}

TEST_CASE("volume", "[cohomology]") {
  std::mt19937_64 rng(5);
  const auto bl = blowup_p2();
  const auto pp = product_p1p1();
  for (int i = 0; i < 100; ++i) {
    Rational m1 = random_rational(rng), m2 = random_rational(rng);
    CHECK(volume(bl, ClassVector{m1, m2}) == m1 * m1 - m2 * m2);
    // (m1 a + m2 b)^2 = m1^2 a^2 + 2 m1 m2 ab + m2^2 b^2 with a^2 = b^2 = 0, ab = 1
    CHECK(volume(pp, ClassVector{m1, m2}) == 2 * m1 * m2);
  }
  CHECK(volume(torus(3), ClassVector::zero(3)) == 0);
  CHECK(volume(torus(3), ClassVector{1, 2, 3}) == 36);  // 3! * 1 * 2 * 3
}

TEST_CASE("maximal existence time reproduces the worked examples", "[cohomology]") {
  std::mt19937_64 rng(11);
  const auto cp1 = riemann_surface_genus0();
  for (int i = 0; i < 50; ++i) {
    Rational lambda = random_positive(rng);
    auto T = max_existence_time(cp1, ClassVector{lambda});
    REQUIRE_FALSE(T.infinite);
    CHECK(T.exact());
    CHECK(T.value() == lambda / 2);
  }

  for (const auto& m : {torus(1), torus(2), riemann_surface_hyperbolic(2), riemann_surface_hyperbolic(5), product_ec()}) {
    auto a0 = random_kahler(rng, m);
    CHECK(max_existence_time(m, a0).infinite);
  }

  const auto pp = product_p1p1();
  for (int i = 0; i < 50; ++i) {
    Rational l1 = random_positive(rng), l2 = random_positive(rng);
    auto T = max_existence_time(pp, ClassVector{l1, l2});
    CHECK(T.exact());
    CHECK(T.value() == min_of(l1, l2) / 2);
  }

  const auto bl = blowup_p2();
  for (int i = 0; i < 200; ++i) {
    auto a0 = random_kahler(rng, bl);
    auto T = max_existence_time(bl, a0);
    CHECK(T.exact());
    CHECK(T.value() == min_of(-a0[1], (a0[0] + a0[1]) / 2));
  }
  // [ω0] = 4a - b: T = 1/(2π) in unscaled time, i.e. the scaled class (4,-1) has T = 1
  auto T = max_existence_time(bl, ClassVector{4, -1});
  CHECK(T.value() == 1);
  CHECK(T.binding == std::vector<std::string>{"int_E>0"});

  CHECK_THROWS_AS(max_existence_time(pp, ClassVector{1, -1}), DomainError);
}

TEST_CASE("monotone failure along the class line", "[cohomology][property]") {
  std::mt19937_64 rng(12);
  for (const auto& m : {riemann_surface_genus0(), product_p1p1(), blowup_p2()}) {
    for (int i = 0; i < 100; ++i) {
      auto a0 = random_kahler(rng, m);
      auto T = max_existence_time(m, a0);
      REQUIRE(T.exact());
      Rational u = random_positive(rng, 9, 10);
      if (u >= 1) u = Rational(1, 2);
      CHECK(is_kahler(m, evolve_class(m, a0, u * T.value())));
      CHECK_FALSE(is_kahler(m, evolve_class(m, a0, T.value())));
      CHECK_FALSE(is_kahler(m, evolve_class(m, a0, T.value() * (1 + u))));
    }
  }
}

TEST_CASE("infinite time iff -c1 is nef on every built-in", "[cohomology][property]") {
  std::mt19937_64 rng(13);
  auto models = builtin_catalogue();
  models.push_back(torus(2));
  models.push_back(riemann_surface_hyperbolic(4));
  for (const auto& m : models) {
    for (int i = 0; i < 20; ++i) {
      auto a0 = random_kahler(rng, m);
      CHECK(max_existence_time(m, a0).infinite == is_nef(m, -m.c1twopi));
    }
  }
}

TEST_CASE("limiting classes and collapse", "[cohomology]") {
  const auto cp1 = riemann_surface_genus0();
  CHECK(limiting_class(cp1, ClassVector{3}) == ClassVector{0});
  CHECK_FALSE(is_noncollapsed(cp1, ClassVector{3}));

  const auto bl = blowup_p2();
  // noncollapsed branch mu1 > -3 mu2: limit volume (mu1 + 3 mu2)^2
  std::mt19937_64 rng(21);
  int noncollapsed = 0, collapsed = 0;
  for (int i = 0; i < 300; ++i) {
    auto a0 = random_kahler(rng, bl);
    auto lim = limiting_class(bl, a0);
    bool branch = a0[0] > -3 * a0[1];
    CHECK(is_noncollapsed(bl, a0) == branch);
    CHECK((volume(bl, lim) == 0) == !is_noncollapsed(bl, a0));
    if (branch) {
      ++noncollapsed;
      CHECK(volume(bl, lim) == (a0[0] + 3 * a0[1]) * (a0[0] + 3 * a0[1]));
    } else {
      ++collapsed;
    }
  }
  CHECK(noncollapsed > 0);
  CHECK(collapsed > 0);

  CHECK(limiting_class(bl, ClassVector{4, -1}) == ClassVector{1, 0});
  CHECK_THROWS_AS(limiting_class(torus(1), ClassVector{1}), DomainError);
}

TEST_CASE("null locus", "[cohomology]") {
  const auto bl = blowup_p2();
  auto nl = null_locus(bl, limiting_class(bl, ClassVector{4, -1}));
  CHECK_FALSE(nl.whole_space);
  CHECK(nl.labels == std::vector<std::string>{"E"});
  CHECK(nl.relative_to_catalogue);

  std::mt19937_64 rng(3);
  for (const auto& m : builtin_catalogue()) {
    auto a = random_kahler(rng, m);
    auto k = null_locus(m, a);
    CHECK_FALSE(k.whole_space);
    CHECK(k.labels.empty());
  }

  const auto pp = product_p1p1();
  auto z = null_locus(pp, ClassVector{5, 0});
  CHECK(z.whole_space);
  CHECK(z.labels == std::vector<std::string>{"{pt}xP1"});

  CHECK_THROWS_AS(null_locus(bl, ClassVector{1, 1}), DomainError);
}

TEST_CASE("singularity seeds", "[cohomology]") {
  const auto bl = blowup_p2();
  for (Rational s : {Rational(1, 3), Rational(1), Rational(7, 2)}) {
    auto seed = singularity_seed(bl, ClassVector{1, 0}, s);
    CHECK(seed == ClassVector{1 + 3 * s, -s});
    CHECK(max_existence_time(bl, seed).value() == s);
    CHECK(limiting_class(bl, seed) == ClassVector{1, 0});
  }

  const auto cp1 = riemann_surface_genus0();
  auto seed = singularity_seed(cp1, ClassVector{0}, Rational(5, 4));
  CHECK(seed == ClassVector{Rational(5, 2)});
  CHECK(max_existence_time(cp1, seed).value() == Rational(5, 4));

  CHECK_THROWS_AS(singularity_seed(torus(1), ClassVector{0}, 1), DomainError);
  CHECK_THROWS_AS(singularity_seed(bl, ClassVector{4, -1}, 1), DomainError);  // already Kähler
  CHECK_THROWS_AS(singularity_seed(bl, ClassVector{1, 1}, 1), DomainError);   // not nef
}

TEST_CASE("long-time regime", "[cohomology]") {
  CHECK(long_time_regime(torus(1)).regime == Regime::CalabiYau);
  CHECK(long_time_regime(torus(3)).regime == Regime::CalabiYau);
  CHECK(long_time_regime(riemann_surface_hyperbolic(2)).regime == Regime::AmpleCanonical);
  auto ec = long_time_regime(product_ec());
  CHECK(ec.regime == Regime::IntermediateKodaira);
  CHECK(ec.kodaira == 1);
  CHECK(ec.fiber_dimension == 1);
  CHECK_THROWS_AS(long_time_regime(blowup_p2()), DomainError);
  CHECK_THROWS_AS(long_time_regime(riemann_surface_genus0()), DomainError);

  // nef and big but not ample: two-dimensional toy with K = (1, 0) on the blow-up form
  ManifoldModel m = blowup_p2();
  m.name = "toy-nefbig";
  m.c1twopi = ClassVector{-1, 0};
  CHECK(long_time_regime(m).regime == Regime::NefBigCanonical);
}

TEST_CASE("model JSON round trip", "[cohomology][io]") {
  auto models = builtin_catalogue();
  models.push_back(torus(3));
  auto j = catalogue_to_json(models);
  auto back = catalogue_from_json(json::parse(j.dump()));
  REQUIRE(back.size() == models.size());
  std::mt19937_64 rng(8);
  for (std::size_t i = 0; i < models.size(); ++i) {
    CHECK(back[i].name == models[i].name);
    CHECK(back[i].tensor.raw() == models[i].tensor.raw());
    CHECK(back[i].c1twopi == models[i].c1twopi);
    CHECK(back[i].kodaira == models[i].kodaira);
    for (int k = 0; k < 20; ++k) {
      auto a = random_class(rng, models[i].dim());
      CHECK(is_kahler(back[i], a) == is_kahler(models[i], a));
    }
  }

  auto bad = to_json(blowup_p2());
  bad["tensor"][0]["idx"] = json::array({0, 5});
  CHECK_THROWS(model_from_json(bad));
  auto bad_kod = to_json(blowup_p2());
  bad_kod["kodaira"] = "minus";
  CHECK_THROWS_AS(model_from_json(bad_kod), std::invalid_argument);
}
