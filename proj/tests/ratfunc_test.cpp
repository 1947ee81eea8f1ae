#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "b295/ratfunc.hpp"
#include "b295/twint.hpp"
#include "oracles.hpp"

#include <random>

using namespace b295;
using oracle::rel_diff;

TEST_CASE("polynomial storage strips high-order zeros") {
  Polynomial p{1.0, 2.0, 0.0, 0.0};
  CHECK(p.degree() == 1);
  CHECK(Polynomial{}.degree() == -1);
  CHECK(Polynomial{0.0, 0.0}.is_zero());
  CHECK(p[5] == 0.0);
}

TEST_CASE("poly_eval") {
  SUBCASE("constant") { CHECK(Polynomial{5.0}(Complex{0.0, 10.0}) == Complex{5.0, 0.0}); }
  SUBCASE("identity monomial") { CHECK(Polynomial{0.0, 1.0}(Complex{0.0, 1.0}) == Complex{0.0, 1.0}); }
  SUBCASE("matches naive summation") {
    const Complex s{1.0, 1.0};
    CHECK(rel_diff(Polynomial{1.0, 2.0, 3.0}(s), oracle::naive_poly({1.0, 2.0, 3.0}, s)) <= 1e-14);

    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int t = 0; t < 200; ++t) {
      std::vector<double> c(6);
      for (double& v : c) v = u(rng);
      const Complex z{u(rng), u(rng)};
      CHECK(rel_diff(Polynomial(c)(z), oracle::naive_poly(c, z)) <= 1e-12);
    }
  }
}

TEST_CASE("ratfunc_eval") {
  SUBCASE("DC gain of a lowpass") {
    CHECK(evaluate(normalize(Polynomial{1.0}, Polynomial{1.0, 1.0}), 0.0) == Complex{1.0, 0.0});
  }
  SUBCASE("zero at the origin") {
    CHECK(std::abs(evaluate(normalize(Polynomial{0.0, 1.0}, Polynomial{1.0, 1.0}), 0.0)) == 0.0);
  }
  SUBCASE("Twin-T against the nodal-equation oracle") {
    const twint::TwinTParams p{15e3, 89.8e3, 15e3, 47e-9, 10e-9, 47e-9};
    const double w = 1.0 / std::sqrt(p.r1 * p.r2 * p.c1 * p.c2);
    const Complex expected = oracle::twin_t(p.r1, p.r2, p.r3, p.c1, p.c2, p.c3, Complex{0.0, w});
    const Complex got = evaluate(twint::coefficients(p), w);
    CHECK(rel_diff(std::abs(got), std::abs(expected)) <= 1e-9);
    CHECK(rel_diff(got, expected) <= 1e-9);
  }
  SUBCASE("pole on the axis") {
    CHECK_THROWS_AS((void)evaluate(normalize(Polynomial{1.0}, Polynomial{1.0, 0.0, 1.0}), 1.0), PoleOnAxisError);
  }
}

TEST_CASE("normalize") {
  const RationalFunction h = normalize(Polynomial{0.0, -4.0}, Polynomial{0.0, 2.0, 2.0});
  // -4s / (2s + 2s^2) = -2 / (1 + s)
  CHECK(h.sign == -1);
  CHECK(h.num == Polynomial{2.0});
  CHECK(h.den == Polynomial{1.0, 1.0});
  CHECK_THROWS_AS((void)normalize(Polynomial{1.0}, Polynomial{}), std::invalid_argument);

  const RationalFunction monic = normalize(Polynomial{1.0}, Polynomial{0.0, 0.0, 4.0});
  CHECK(monic.den == Polynomial{0.0, 0.0, 1.0});
  CHECK(monic.num == Polynomial{0.25});
}

TEST_CASE("real_roots_cubic") {
  SUBCASE("constructed factors") {
    const auto [root, quad] = split_real_root(Polynomial{1.0, 2.0, 2.0, 1.0});
    CHECK(root == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(quad[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(quad[1] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(quad[2] == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("repeated root") {
    const auto [root, quad] = split_real_root(Polynomial{8.0, 12.0, 6.0, 1.0});
    CHECK(root == doctest::Approx(-2.0).epsilon(1e-5));
    CHECK(quad[0] == doctest::Approx(4.0).epsilon(1e-5));
    CHECK(quad[1] == doctest::Approx(4.0).epsilon(1e-5));
    CHECK(quad[2] == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("calibrated 200 Hz band keeps its natural frequency") {
    const twint::TwinTParams p{15e3, 93e3, 13.98e3, 47e-9, 10e-9, 47e-9};
    const auto [root, quad] = split_real_root(twint::coefficients(p).den);
    CHECK(root < 0.0);
    const double fn = std::sqrt(quad[0] / quad[2]) / oracle::two_pi;
    CHECK(std::abs(fn - 200.0) <= 1.0);
  }
  SUBCASE("preconditions") {
    CHECK_THROWS_AS((void)split_real_root(Polynomial{1.0, 1.0, 1.0}), std::invalid_argument);
    CHECK_THROWS_AS((void)split_real_root(Polynomial{1.0, -1.0, 1.0, 1.0}), std::invalid_argument);
    CHECK_THROWS_AS((void)split_real_root(Polynomial{0.0, 1.0, 1.0, 1.0}), std::invalid_argument);
  }
}

TEST_CASE("factoring round-trip on random cubics") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> zeta(0.01, 0.99);
  for (int t = 0; t < 300; ++t) {
    const double a = oracle::log_uniform(rng, 1e-3, 1e5);
    const double wn = oracle::log_uniform(rng, 1e-3, 1e5);
    const double k = oracle::log_uniform(rng, 1e-12, 1e3);
    const double z = zeta(rng);
    const Polynomial quad{k * wn * wn, k * 2.0 * z * wn, k};
    const Polynomial p = Polynomial{a, 1.0} * quad;
    const auto split = split_real_root(p);
    const Polynomial back = Polynomial{-split.root, 1.0} * split.quadratic;
    for (std::size_t i = 0; i <= 3; ++i) CHECK(rel_diff(back[i], p[i]) <= 1e-9);
  }
}

TEST_CASE("deflate and roots") {
  const Polynomial p = Polynomial{3.0, 1.0} * Polynomial{-5.0, 1.0} * Polynomial{2.0, 0.0, 1.0};
  const Polynomial q = deflate(p, 5.0);
  const Polynomial expected = Polynomial{3.0, 1.0} * Polynomial{2.0, 0.0, 1.0};
  for (std::size_t i = 0; i <= 3; ++i) CHECK(q[i] == doctest::Approx(expected[i]).epsilon(1e-12));

  const auto rs = roots(p);
  REQUIRE(rs.size() == 4);
  CHECK(rs[0].real() == doctest::Approx(-3.0).epsilon(1e-12));
  CHECK(std::abs(rs[1] - Complex{0.0, -std::sqrt(2.0)}) < 1e-12);
  CHECK(std::abs(rs[2] - Complex{0.0, std::sqrt(2.0)}) < 1e-12);
  CHECK(rs[3].real() == doctest::Approx(5.0).epsilon(1e-12));

  // SI-scaled coefficients spanning many decades.
  const auto tw = roots(twint::coefficients({15e3, 89.8e3, 15e3, 47e-9, 10e-9, 47e-9}).den);
  REQUIRE(tw.size() == 3);
  CHECK(tw[0].real() == doctest::Approx(-1.0 / (15e3 * 47e-9)).epsilon(1e-10));
}

TEST_CASE("to_bandpass_factors") {
  SUBCASE("constructed") {
    const auto f = to_bandpass_factors(normalize(Polynomial{0.0, 1.0}, Polynomial{1.0, 2.0, 2.0, 1.0}));
    CHECK(f.a == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(f.omega_n == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(f.q == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("published calibration Q values") {
    const auto q1000 = to_bandpass_factors(twint::coefficients({15e3, 199.5e3, 12.75e3, 10e-9, 910e-12, 10e-9})).q;
    const auto q2000 = to_bandpass_factors(twint::coefficients({15e3, 200.5e3, 13.4e3, 4.7e-9, 470e-12, 4.7e-9})).q;
    CHECK(rel_diff(q1000, 5.989) <= 0.01);
    CHECK(rel_diff(q2000, 6.946) <= 0.01);
  }
  SUBCASE("real quadratic") {
    const RationalFunction h = normalize(Polynomial{1.0}, Polynomial{1.0, 1.0} * Polynomial{2.0, 1.0} * Polynomial{3.0, 1.0});
    CHECK_THROWS_AS((void)to_bandpass_factors(h), RealQuadraticError);
  }
}

TEST_CASE("cancel_pole_zero") {
  SUBCASE("exact construction") {
    const RationalFunction h = normalize(Polynomial{3.0, 1.0} * Polynomial{0.0, 1.0},
                                         Polynomial{3.0, 1.0} * Polynomial{4.0, 1.0, 1.0});
    const RationalFunction c = cancel_pole_zero(h, 1e-9);
    CHECK(c.num.degree() == 1);
    CHECK(c.den.degree() == 2);
    // s / (s^2 + s + 4), normalized to constant term 1
    CHECK(c.num[1] == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(c.den[1] == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(c.den[2] == doctest::Approx(0.25).epsilon(1e-12));
  }
  SUBCASE("Twin-T special case reduces to second order") {
    const auto c = cancel_pole_zero(twint::coefficients({15e3, 89.8e3, 15e3, 47e-9, 10e-9, 47e-9}), 1e-9);
    CHECK(c.num.degree() == 1);
    CHECK(c.den.degree() == 2);
    CHECK(c.num[0] == 0.0);
  }
  SUBCASE("calibrated 200 Hz band does not cancel") {
    const RationalFunction h = twint::coefficients({15e3, 93e3, 13.98e3, 47e-9, 10e-9, 47e-9});
    const RationalFunction c = cancel_pole_zero(h, 1e-9);
    CHECK(c.num == h.num);
    CHECK(c.den == h.den);
  }
  SUBCASE("bad tolerance") {
    CHECK_THROWS_AS((void)cancel_pole_zero(normalize(Polynomial{1.0}, Polynomial{1.0, 1.0}), 0.0),
                    std::invalid_argument);
  }
}

TEST_CASE("property: cancellation moves H(jw) by at most 10 tol") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int t = 0; t < 50; ++t) {
    const double tol = oracle::log_uniform(rng, 1e-9, 1e-4);
    const double p = oracle::log_uniform(rng, 1e-1, 1e3);
    const double z = p * (1.0 + tol * (2.0 * unit(rng) - 1.0) * 0.9);
    const double wn = oracle::log_uniform(rng, 1e-1, 1e3);
    const RationalFunction h = normalize(Polynomial{z, 1.0} * Polynomial{0.0, 1.0},
                                         Polynomial{p, 1.0} * Polynomial{wn * wn, 0.3 * wn, 1.0});
    const RationalFunction c = cancel_pole_zero(h, tol);
    CHECK(c.den.degree() == 2);
    for (int k = 0; k < 100; ++k) {
      const double w = oracle::log_uniform(rng, 1e-3 * wn, 1e3 * wn);
      CHECK(rel_diff(evaluate(c, w), evaluate(h, w)) <= 10.0 * tol);
    }
  }
}

TEST_CASE("property: magnitude is even and phase odd in omega") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.1, 3.0);
  for (int t = 0; t < 100; ++t) {
    const RationalFunction h = normalize(Polynomial{u(rng), u(rng), u(rng)}, Polynomial{1.0, u(rng), u(rng), u(rng)},
                                         t % 2 ? -1 : 1);
    const double w = oracle::log_uniform(rng, 1e-2, 1e2);
    const Complex pos = evaluate(h, w);
    const Complex neg = evaluate(h, -w);
    CHECK(std::abs(pos) == doctest::Approx(std::abs(neg)).epsilon(1e-14));
    CHECK(rel_diff(pos, std::conj(neg)) <= 1e-14);
  }
}
