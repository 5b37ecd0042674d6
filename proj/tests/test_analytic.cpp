#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "tbarrier/analytic.hpp"
#include "tbarrier/systems.hpp"

using namespace tbarrier;

TEST_CASE("barrier integral closed forms") {
  // beta chosen so that m = beta / 2 with alpha = 0.5
  CHECK(barrier_integral(BarrierParams(1, 2, 1, 0.5), 0.5) == doctest::Approx(std::log(2.0)).epsilon(1e-14));
  CHECK(barrier_integral(BarrierParams(1, 4, 1, 0.5), 0.5) == doctest::Approx(1.0).epsilon(1e-14));
  for (double beta : {0.5, 2.0, 3.0, 4.0, 100.0}) CHECK(barrier_integral(BarrierParams(1, beta, 1, 0.5), 0.0) == 0.0);
}

TEST_CASE("barrier integral against Simpson") {
  for (double m : {0.25, 0.5, 1.0, 1.5, 2.0, 3.7}) {
    const double tc = 1.7, t = 1.2;
    const BarrierParams p(tc, 2 * m, 1, 0.5);
    const double ref = oracle::simpson([&](double s) { return std::pow(tc - s, -m); }, 0.0, t);
    CHECK(barrier_integral(p, t) == doctest::Approx(ref).epsilon(1e-10));
  }
}

TEST_CASE("barrier integral domain, divergence and overflow") {
  const BarrierParams p(1, 2, 1, 0.5);
  CHECK_THROWS_AS(barrier_integral(p, 1.0), DivergentIntegral);
  CHECK_THROWS_AS(barrier_integral(p, 2.0), DivergentIntegral);
  CHECK_THROWS_AS(barrier_integral(p, -0.1), DomainError);
  const BarrierParams sub(1, 1, 1, 0.5);  // m = 0.5: finite at T_c
  CHECK(barrier_integral(sub, 1.0) == doctest::Approx(2.0));
  CHECK_THROWS_AS(barrier_integral(sub, 1.5), DomainError);

  const BarrierParams huge(1, 400, 1, 0.5);  // m = 200
  CHECK_THROWS_AS(barrier_integral(huge, 1 - 1e-3), NumericOverflow);
  const double log_i = log_barrier_integral(huge, 1 - 1e-3);
  // (1e-3)^{-199}/199 dominates
  CHECK(log_i == doctest::Approx(199 * std::log(1e3) - std::log(199.0)).epsilon(1e-12));
  const BarrierParams big(1, 80, 1, 0.5);  // m = 40, log-space branch but representable
  const double ref = (std::pow(0.5, -39.0) - 1.0) / 39.0;
  CHECK(barrier_integral(big, 0.5) == doctest::Approx(ref).epsilon(1e-13));
  CHECK(std::exp(log_barrier_integral(big, 0.5)) == doctest::Approx(ref).epsilon(1e-12));
}

TEST_CASE("barrier integral is strictly increasing and diverges") {
  for (double m : {1.0, 1.5, 2.0}) {
    const BarrierParams p(1, 2 * m, 1, 0.5);
    double prev = -1;
    for (int k = 0; k <= 12; ++k) {
      const double v = barrier_integral(p, k == 0 ? 0.0 : 1 - std::pow(10.0, -k));
      CHECK(v > prev);
      prev = v;
    }
    CHECK(barrier_integral(p, 1 - 1e-12) > 10);
  }
}

TEST_CASE("settling bound examples") {
  const BarrierParams p(1, 2, 1, 0.5);
  const SettlingBound b = settling_bound(p, 1.0);
  CHECK(b.reaches_zero);
  CHECK(b.tau_bound == doctest::Approx(1 - std::exp(-2.0)).epsilon(1e-15));
  CHECK(b.tau_bound == doctest::Approx(oracle::crossing_time(1, 2, 1, 0.5, 1.0)).epsilon(1e-10));
  CHECK(b.V0 == 1.0);
  CHECK(settling_bound(p, 0.0).tau_bound == 0.0);
  CHECK_THROWS_AS(settling_bound(p, NAN), InputError);
  CHECK_THROWS_AS(settling_bound(p, -1.0), InputError);

  // m = 0.25: threshold z0 <= q(1-alpha) T_c / (1-m) = 2/3
  const BarrierParams sub(1, 0.5, 1, 0.5);
  const SettlingBound far = settling_bound(sub, 1.0);
  CHECK_FALSE(far.reaches_zero);
  CHECK(far.tau_bound == 1.0);
  CHECK(settling_bound(sub, 0.4).reaches_zero);
}

TEST_CASE("settling bound matches the RK4 crossing oracle") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u01(0, 1);
  for (int i = 0; i < 25; ++i) {
    const double tc = 0.5 + 2 * u01(rng), alpha = 0.1 + 0.8 * u01(rng), m = 1 + 2 * u01(rng);
    const double q = 0.2 + 3 * u01(rng), x0 = std::pow(10.0, -2 + 4 * u01(rng));
    const BarrierParams p(tc, m / (1 - alpha), q, alpha);
    const SettlingBound b = settling_bound(p, x0);
    REQUIRE(b.reaches_zero);
    if (b.tau_bound > 0.99 * tc) continue;
    CHECK(b.tau_bound == doctest::Approx(oracle::crossing_time(tc, p.beta(), q, alpha, x0)).epsilon(1e-8));
  }
}

TEST_CASE("exact solution examples") {
  CHECK(exact_solution_scalar(BarrierParams(2, 3, 0, 0.5), 2, 1) == doctest::Approx(0.25).epsilon(1e-15));
  const BarrierParams p(1, 2, 1, 0.5);
  CHECK(exact_solution_scalar(p, 0, 0.3) == 0.0);
  CHECK(exact_solution_scalar(p, 1, 0.9) == 0.0);
  CHECK(exact_solution_scalar(p, -1, 0.9) == 0.0);
  CHECK_THROWS_AS(exact_solution_scalar(p, 1, 1.0), DomainError);
  CHECK(exact_solution_scalar(p, -1, 0.3) == -exact_solution_scalar(p, 1, 0.3));
}

TEST_CASE("exact solution agrees with direct RK4") {
  for (double m : {0.25, 1.0, 1.5, 2.0}) {
    const double alpha = 0.4, beta = m / (1 - alpha);
    const BarrierParams p(1.3, beta, 0.7, alpha);
    const double x0 = 5.0;
    const double t = 0.5 * settling_bound(p, x0).tau_bound;
    const double ref = oracle::barrier_rk4(1.3, beta, 0.7, alpha, x0, t);
    CHECK(exact_solution_scalar(p, x0, t) == doctest::Approx(ref).epsilon(1e-10));
  }
}

TEST_CASE("exact solution at t=0 and monotone decay") {
  std::mt19937_64 rng(32);
  std::uniform_real_distribution<double> u01(0, 1);
  for (int i = 0; i < 200; ++i) {
    const double alpha = 0.05 + 0.9 * u01(rng);
    const BarrierParams p(0.1 + 5 * u01(rng), 5 * u01(rng), 3 * u01(rng), alpha);
    const double x0 = (u01(rng) - 0.5) * std::pow(10.0, 12 * u01(rng) - 6);
    REQUIRE(exact_solution_scalar(p, x0, 0.0) == x0);
    if (x0 <= 0) continue;
    double prev = x0;
    for (int k = 1; k < 1000; ++k) {
      const double v = exact_solution_scalar(p, x0, p.tc() * k / 1000.0);
      REQUIRE(v <= prev);
      REQUIRE(v >= 0.0);
      prev = v;
    }
  }
}

TEST_CASE("first zero of the exact solution is the settling bound") {
  std::mt19937_64 rng(33);
  std::uniform_real_distribution<double> u01(0, 1);
  for (int i = 0; i < 100; ++i) {
    const double tc = 0.5 + 2 * u01(rng), alpha = 0.1 + 0.8 * u01(rng), m = 1 + 3 * u01(rng);
    const BarrierParams p(tc, m / (1 - alpha), 0.2 + 3 * u01(rng), alpha);
    const double x0 = std::pow(10.0, -3 + 6 * u01(rng));
    const SettlingBound b = settling_bound(p, x0);
    REQUIRE(b.reaches_zero);
    const double hi = std::min(b.tau_bound * (1 + 1e-9) + 1e-10 * tc, std::nextafter(tc, 0.0));
    const double first_zero =
        oracle::bisect([&](double t) { return exact_solution_scalar(p, x0, t) > 0 ? 1.0 : -1.0; }, 0.0, hi);
    CHECK(std::fabs(first_zero - b.tau_bound) <= 1e-10 * tc);
  }
}

TEST_CASE("autonomous settling integral") {
  const AutonomousSystem a = make_autonomous_power_law(1, 0.5);
  CHECK(autonomous_settling_integral(a.law, 1) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(autonomous_settling_integral(a.law, 4) == doctest::Approx(4.0).epsilon(1e-14));
  CHECK(autonomous_settling_integral(a.law, 0) == 0.0);
  CHECK(autonomous_settling_quadrature(a.law, 1) == doctest::Approx(2.0).epsilon(1e-8));
  CHECK(autonomous_settling_quadrature(a.law, 4) == doctest::Approx(4.0).epsilon(1e-8));
  CHECK(autonomous_settling_integral(a.law, 1e12) > 1.0);

  for (double alpha : {0.1, 0.5, 0.9}) {
    const AutonomousSystem law = make_autonomous_power_law(2, alpha);
    const double closed = std::pow(3.0, 1 - alpha) / (2 * (1 - alpha));
    CHECK(autonomous_settling_quadrature(law.law, 3.0) == doctest::Approx(closed).epsilon(1e-8));
  }

  // a law without a closed form: Phi(V) = V^0.5 + V
  AutonomousLaw mixed;
  mixed.label = "mixed";
  mixed.phi = [](double V) { return std::sqrt(V) + V; };
  const double ref = oracle::simpson([](double s) { return 1 / (std::exp(-s / 2) + 1); }, std::log(1e-6), 0.0) + 2 * std::log1p(1e-3);
  CHECK(autonomous_settling_integral(mixed, 1.0) == doctest::Approx(ref).epsilon(1e-7));
  CHECK(autonomous_settling_integral(mixed, 1.0) == doctest::Approx(2 * std::log(2.0)).epsilon(1e-8));

  AutonomousLaw linear;
  linear.phi = [](double V) { return V; };
  CHECK_THROWS_AS(autonomous_settling_integral(linear, 1.0), QuadratureError);
}

TEST_CASE("power law solution") {
  CHECK(power_law_solution(1, 0.5, 1, 0.5) == doctest::Approx(0.5625));
  CHECK(power_law_solution(1, 0.5, 1, 2.5) == 0.0);
  CHECK(power_law_solution(1, 0.5, -4, 1) == doctest::Approx(-2.25));
}
