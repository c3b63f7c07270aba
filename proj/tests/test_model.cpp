#include <cmath>
#include <random>

#include "brute_force.hpp"
#include "doctest.h"
#include "ifl/error.hpp"
#include "ifl/model.hpp"
#include "ifl/params.hpp"
#include "ifl/rational.hpp"

using namespace ifl;

namespace {

FrameworkParams tiny() {
  // p_d = 1, c = 4, t_d = 4, n_d = 1 -> c_d = 2, c_r = 0.
  return FrameworkParams{1.0, 4, 4, 3, 1, 1};
}

FrameworkParams defaults() { return FrameworkParams{0.7, 20, 20, 180, 5, 10}; }

Rational frac(const BigInt& a, const BigInt& b) {
  Rational q(a, b);
  q.canonicalize();
  return q;
}

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace

TEST_CASE("binom follows the zero convention") {
  CHECK(binom(5, 2) == 10);
  CHECK(binom(3, 5) == 0);
  CHECK(binom(-1, 2) == 0);
  CHECK(binom(4, -1) == 0);
  CHECK(binom(0, 0) == 1);
  CHECK(binom(180, 90).get_str() ==
        "91012248672832285155575331798825309656983959185522800");
}

TEST_CASE("parse_decimal is exact") {
  CHECK(parse_decimal("0.7") == Rational(7, 10));
  CHECK(parse_decimal("-2") == Rational(-2));
  CHECK(parse_decimal("1e-3") == Rational(1, 1000));
  CHECK(parse_decimal("2.50E1") == Rational(25));
  CHECK(decimal_rational(0.05) == Rational(1, 20));
  CHECK_THROWS_AS(parse_decimal("0.7x"), ValidationError);
  CHECK_THROWS_AS(parse_decimal(""), ValidationError);
}

TEST_CASE("derived capacities round half up") {
  CHECK(derived_capacities(defaults()) == Capacities{7, 3});
  CHECK(derived_capacities({1.0, 10, 10, 10, 1, 1}) == Capacities{5, 0});
  CHECK(derived_capacities({0.5, 8, 10, 10, 1, 1}) == Capacities{2, 2});
  // 0.5 * 0.5 * 10 = 2.5 -> 3.
  CHECK(derived_capacities({0.5, 10, 10, 10, 1, 1}) == Capacities{3, 2});
}

TEST_CASE("parameter validation") {
  auto p = defaults();
  p.c = 21;
  CHECK_THROWS_WITH_AS(derived_capacities(p), "c must be even", ValidationError);
  p = defaults();
  p.t_d = 6;  // c_d = 7 > 6
  CHECK_THROWS_AS(derived_capacities(p), ValidationError);
  p = defaults();
  p.n_r = 181;
  CHECK_THROWS_AS(derived_capacities(p), ValidationError);
  p = defaults();
  p.p_d = 1.5;
  CHECK_THROWS_AS(derived_capacities(p), ValidationError);
}

TEST_CASE("expected accuracy examples") {
  CHECK(expected_accuracy({1.0, 6, 3, 3, 1, 1}) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(exact::expected_accuracy({1.0, 6, 3, 3, 1, 1}) == 1);

  CHECK(expected_accuracy(tiny()) == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(exact::expected_accuracy(tiny()) == Rational(3, 4));

  // Frozen from an independent rational evaluation (Python fractions):
  // 1390920071/1646628160 = 0.8447080553997085.
  CHECK(exact::expected_accuracy(defaults()) == Rational(1390920071, 1646628160));
  CHECK(rel(expected_accuracy(defaults()), 0.8447080553997085) < 1e-13);
}

TEST_CASE("q components on the tiny instance match brute force") {
  const auto q = exact::q_components(tiny());
  CHECK(q.q1 == Rational(1, 4));
  REQUIRE(q.q2.size() == 4);
  CHECK(q.q2[0] == Rational(1, 6));
  CHECK(q.q2[1] == Rational(1, 12));
  CHECK(q.q2[2] == 0);
  CHECK(q.q2[3] == 0);
  CHECK(q.q3 == Rational(1, 2));

  const auto bf = testing::brute_force(tiny());
  CHECK(bf.acc == Rational(3, 4));
  CHECK(bf.q1 == q.q1);
  CHECK(bf.q3 == q.q3);
  for (std::size_t k = 0; k < q.q2.size(); ++k) CHECK(bf.q2[k] == q.q2[k]);

  const auto fq = q_components(tiny());
  CHECK(fq.q1 == doctest::Approx(0.25));
  CHECK(fq.q2[0] == doctest::Approx(1.0 / 6));
  CHECK(fq.q3 == doctest::Approx(0.5));
}

TEST_CASE("full dominant capacity covers every datum") {
  const FrameworkParams p{1.0, 8, 4, 3, 2, 1};  // c_d = t_d = 4
  const auto q = exact::q_components(p);
  CHECK(q.q1 == 1);
  for (const auto& v : q.q2) CHECK(v == 0);
  CHECK(q.q3 == 0);
}

TEST_CASE("expected agreement examples") {
  const auto one = AgreementFn::constant(1.0);
  CHECK(exact::expected_agreement(tiny(), one) == Rational(3, 4));
  CHECK(expected_agreement(tiny(), one) == doctest::Approx(0.75));

  const auto half = AgreementFn::constant(0.5);
  for (const auto& p : {tiny(), defaults(), FrameworkParams{0.3, 12, 9, 40, 2, 3}}) {
    CHECK(exact::expected_agreement(p, half) ==
          Rational(1, 2) + Rational(1, 2) * exact::q_components(p).q1);
  }
}

TEST_CASE("zeta evaluation") {
  CHECK(zeta_eval(AgreementFn::constant(0.9), 3, 20) == 0.9);
  CHECK(zeta_eval(AgreementFn::proportional(2), 5, 20) == 0.5);
  CHECK(zeta_eval(AgreementFn::proportional(2), 15, 20) == 1.0);
  const auto step = AgreementFn::step(2, 0.8);
  CHECK(step(1, 20) == 0.8);
  CHECK(step(2, 20) == 0.8);
  CHECK(step(3, 20) == 1.0);
  CHECK(step.exact(1, 20) == Rational(4, 5));
  CHECK(AgreementFn::parse("step:2:0.8").to_string() == "step:2:0.8");
  CHECK(AgreementFn::parse("proportional:2.0").exact(5, 20) == Rational(1, 2));
  CHECK_THROWS_AS(AgreementFn::parse("constant:0.4"), ValidationError);
  CHECK_THROWS_AS(AgreementFn::parse("step:1.5:0.8"), ValidationError);
  CHECK_THROWS_AS(AgreementFn::parse("linear:1"), ValidationError);
  CHECK_THROWS_AS(AgreementFn::proportional(0), ValidationError);
  CHECK_THROWS_AS(AgreementFn::constant(0.9)(-1, 20), ValidationError);
}

TEST_CASE("coverage bound") {
  const auto p = defaults();
  CHECK(exact::coverage_bound(p, {1.0, 1.0}) == 1);
  CHECK(exact::coverage_bound(p, {0.0, 0.0}) == Rational(1, 2));
  const double mid = coverage_bound(p, {0.5, 0.5});
  CHECK(mid > 0.5);
  CHECK(mid < 1.0);
  double prev = 0.0;
  for (int i = 0; i <= 20; ++i) {
    const double beta = i * 0.05;
    const double b = coverage_bound(p, {beta, beta});
    CHECK(b >= prev);
    prev = b;
  }
  // (1 - 0.05) * 20 = 19 exactly even though the double product is inexact.
  CHECK(uncovered_pool(0.05, 20) == 19);
  CHECK(uncovered_pool(0.3, 180) == 126);
  CHECK_THROWS_AS(coverage_bound(p, {1.2, 0.5}), ValidationError);
}

TEST_CASE("property battery: exact, float and brute force agree") {
  std::mt19937_64 gen(12345);
  int checked = 0;
  for (int trial = 0; trial < 400 && checked < 60; ++trial) {
    FrameworkParams p;
    p.t_d = 1 + static_cast<std::int64_t>(gen() % 6);
    p.t_r = 1 + static_cast<std::int64_t>(gen() % 6);
    p.n_d = 1 + static_cast<std::int64_t>(gen() % static_cast<std::uint64_t>(std::min<std::int64_t>(p.t_d, 3)));
    p.n_r = 1 + static_cast<std::int64_t>(gen() % static_cast<std::uint64_t>(std::min<std::int64_t>(p.t_r, 3)));
    p.c = 2 * static_cast<std::int64_t>(gen() % 4);
    p.p_d = static_cast<double>(gen() % 11) / 10.0;
    try {
      derived_capacities(p);
    } catch (const ValidationError&) {
      continue;
    }
    ++checked;
    CAPTURE(p.p_d);
    CAPTURE(p.c);
    CAPTURE(p.t_d);
    CAPTURE(p.t_r);
    const auto bf = testing::brute_force(p);
    const auto q = exact::q_components(p);
    CHECK(exact::expected_accuracy(p) == bf.acc);
    CHECK(q.q1 == bf.q1);
    CHECK(q.q3 == bf.q3);
    for (std::size_t k = 0; k < q.q2.size(); ++k) CHECK(q.q2[k] == bf.q2[k]);

    Rational sum = q.q1 + q.q3;
    for (const auto& v : q.q2) sum += v;
    CHECK(sum == 1);

    const auto acc = exact::expected_accuracy(p);
    CHECK(acc >= Rational(1, 2));
    CHECK(acc <= 1);
    CHECK(std::abs(expected_accuracy(p) - acc.get_d()) <= 1e-12 * acc.get_d());
    for (const auto& zeta : {AgreementFn::constant(0.9), AgreementFn::proportional(1.7),
                             AgreementFn::step(1, 0.8)}) {
      const auto agr = exact::expected_agreement(p, zeta);
      CHECK(agr == exact::expected_agreement_partition(p, zeta));
      CHECK(std::abs(expected_agreement(p, zeta) - agr.get_d()) <= 1e-12 * agr.get_d());
      CHECK(std::abs(expected_agreement_partition(p, zeta) - agr.get_d()) <= 1e-12);
    }
    // Full coverage bound dominates finite-capacity accuracy.
    CHECK(exact::coverage_bound(p, {1.0, 1.0}) >= acc);
  }
  CHECK(checked >= 50);
}

TEST_CASE("degenerate mixtures drop the absent term") {
  FrameworkParams p = defaults();
  p.p_d = 1.0;
  p.t_r = 1;  // rare side irrelevant; c_r = 0
  p.n_r = 1;
  CHECK(exact::expected_accuracy(p) ==
        Rational(2563, 2584));  // 1 - C(10,5) / (2 C(20,5))
  p = defaults();
  p.p_d = 0.0;
  CHECK(derived_capacities(p) == Capacities{0, 10});
  CHECK(exact::expected_accuracy(p) ==
        1 - Rational(1, 2) * frac(binom(170, 10), binom(180, 10)));
}

TEST_CASE("float path matches exact path at defaults and large pools") {
  for (const auto& p : {defaults(), FrameworkParams{0.7, 40, 20, 300, 5, 25},
                        FrameworkParams{0.95, 40, 60, 300, 5, 10}}) {
    const auto zeta = AgreementFn::constant(0.9);
    const auto q = exact::q_components(p);
    const auto fq = q_components(p);
    CHECK(std::abs(fq.q1 - q.q1.get_d()) < 1e-13);
    CHECK(std::abs(fq.q3 - q.q3.get_d()) < 1e-13);
    for (std::size_t k = 0; k < q.q2.size(); ++k) {
      CHECK(std::abs(fq.q2[k] - q.q2[k].get_d()) < 1e-13);
    }
    CHECK(rel(expected_accuracy(p), exact::expected_accuracy(p).get_d()) < 1e-12);
    CHECK(rel(expected_agreement(p, zeta), exact::expected_agreement(p, zeta).get_d()) < 1e-12);
  }
}
