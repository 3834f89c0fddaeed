#include "krflab/polynomial.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

using krflab::Polynomial;
using krflab::Rational;
using krflab::first_positive_root;
using krflab::parse_rational;

TEST_CASE("rational literals parse exactly", "[rational]") {
  CHECK(parse_rational("3") == Rational(3));
  CHECK(parse_rational("-7/14") == Rational(-1, 2));
  CHECK(parse_rational(" 1 / 3 ") == Rational(1, 3));
  CHECK(parse_rational("0.25") == Rational(1, 4));
  CHECK(parse_rational("-1.5") == Rational(-3, 2));
  CHECK(krflab::to_string(Rational(6, 4)) == "3/2");
  CHECK(krflab::to_string(Rational(-4)) == "-4");
  CHECK_THROWS_AS(parse_rational("1/0"), std::invalid_argument);
  CHECK_THROWS_AS(parse_rational("abc"), std::invalid_argument);
  CHECK_THROWS_AS(parse_rational(""), std::invalid_argument);

  auto list = krflab::parse_rational_list("4,-1/2, 3");
  REQUIRE(list.size() == 3);
  CHECK(list[1] == Rational(-1, 2));
}

TEST_CASE("exact square roots of rationals", "[rational]") {
  Rational r;
  CHECK(krflab::exact_sqrt(Rational(9, 16), r));
  CHECK(r == Rational(3, 4));
  CHECK_FALSE(krflab::exact_sqrt(Rational(2), r));
  CHECK_FALSE(krflab::exact_sqrt(Rational(-4), r));
}

TEST_CASE("first positive root: exact low-degree cases", "[polynomial]") {
  // 3 - 2t
  auto r = first_positive_root(Polynomial({3, -2}));
  REQUIRE(r);
  CHECK(r->exact());
  CHECK(r->lo == Rational(3, 2));

  // 1 + t has no positive root
  CHECK_FALSE(first_positive_root(Polynomial({1, 1})));
  // constant
  CHECK_FALSE(first_positive_root(Polynomial({5})));

  // (2 - t)(5 - t) = 10 - 7t + t^2
  r = first_positive_root(Polynomial({10, -7, 1}));
  REQUIRE(r);
  CHECK(r->exact());
  CHECK(r->lo == 2);

  // (1 + t)^2 stays positive for t > 0
  CHECK_FALSE(first_positive_root(Polynomial({1, 2, 1})));
}

TEST_CASE("first positive root: isolated irrational and higher-degree roots", "[polynomial]") {
  // 2 - t^2: root sqrt(2), discriminant not a square
  auto r = first_positive_root(Polynomial({2, 0, -1}));
  REQUIRE(r);
  CHECK_FALSE(r->exact());
  CHECK(r->hi - r->lo <= Rational(1, 1000000000000LL));
  CHECK(krflab::to_double(r->lo) <= std::sqrt(2.0));
  CHECK(krflab::to_double(r->hi) >= std::sqrt(2.0) - 1e-15);

  // (1 - t)(2 - t)(3 - t)
  r = first_positive_root(Polynomial({6, -11, 6, -1}));
  REQUIRE(r);
  CHECK(krflab::to_double(r->lo) <= 1.0);
  CHECK(krflab::to_double(r->hi) >= 1.0);

  // (1 - t)^2 (t + 5): repeated root still detected
  r = first_positive_root(Polynomial({5, -9, 3, 1}));
  REQUIRE(r);
  CHECK(std::abs(krflab::to_double(r->mid()) - 1.0) < 1e-11);

  // t^3 + t + 1 has no positive root
  CHECK_FALSE(first_positive_root(Polynomial({1, 1, 0, 1})));
}

TEST_CASE("first positive root brackets agree with sign changes on random cubics", "[polynomial][property]") {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> coef(-9, 9);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<Rational> c{Rational(std::abs(coef(rng)) + 1), coef(rng), coef(rng), coef(rng)};
    if (c[3] == 0) c[3] = 1;
    Polynomial p(c);
    auto r = first_positive_root(p);
    // brute-force oracle: scan for the first sign change or zero on a fine grid
    double first = -1.0;
    auto eval = [&](double t) {
      double acc = 0;
      for (int k = 3; k >= 0; --k) acc = acc * t + krflab::to_double(c[k]);
      return acc;
    };
    double prev = eval(0.0);
    for (int k = 1; k <= 40000; ++k) {
      double t = k * 1e-3;
      double v = eval(t);
      if (v == 0.0 || (v < 0) != (prev < 0)) {
        first = t;
        break;
      }
      prev = v;
    }
    if (first < 0) {
      // no sign change up to t = 40: any root must be a touching (even) root
      if (r) CHECK(krflab::to_double(r->mid()) > 0.0);
      continue;
    }
    REQUIRE(r);
    CHECK(krflab::to_double(r->mid()) <= first + 1e-9);
    CHECK(krflab::to_double(r->mid()) > first - 1e-3 - 1e-9);
  }
}
