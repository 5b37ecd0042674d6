#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "tbarrier/core.hpp"
#include "tbarrier/systems.hpp"

using namespace tbarrier;

TEST_CASE("validate_params examples") {
  const ParamVerdict a = validate_params(BarrierParams(1, 2, 1, 0.5));
  CHECK(a.admissible());
  CHECK(a.m == 1.0);

  const ParamVerdict b = validate_params(BarrierParams(1, 1, 1, 0.5));
  CHECK(b.status == ParamStatus::Inadmissible);
  CHECK(b.reason == "beta*(1-alpha)=0.5 < 1");

  const ParamVerdict c = validate_params(BarrierParams(1, 4, 0.3, 0.75));
  CHECK(c.admissible());
  CHECK(c.m == 1.0);
}

TEST_CASE("validate_params names the first violated constraint") {
  CHECK(validate_params(BarrierParams(0, 2, 1, 0.5)).reason == "T_c > 0");
  CHECK(validate_params(BarrierParams(1, 2, 0, 0.5)).reason == "q > 0");
  CHECK(validate_params(BarrierParams(1, 2, 1, 1.5)).reason == "alpha in (0,1)");
  CHECK(validate_params(BarrierParams(1, 2, 1, 0.0)).reason == "alpha in (0,1)");
  CHECK(validate_params(BarrierParams(1, -2, 1, 0.5)).reason == "beta > 0");
  CHECK(validate_params(BarrierParams(-1, -2, -1, 2)).reason == "T_c > 0");
}

TEST_CASE("non-finite parameters get their own verdict") {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const double inf = std::numeric_limits<double>::infinity();
  for (const auto& p : {BarrierParams(nan, 2, 1, .5), BarrierParams(1, inf, 1, .5), BarrierParams(1, 2, nan, .5),
                        BarrierParams(1, 2, 1, -inf)}) {
    const ParamVerdict v = validate_params(p);
    CHECK(v.status == ParamStatus::NonFinite);
    CHECK(v.reason.rfind("non-finite parameter", 0) == 0);
  }
}

TEST_CASE("barrier_exponent") {
  CHECK(barrier_exponent(BarrierParams(1, 2, 1, 0.5)) == 1.0);
  CHECK(barrier_exponent(BarrierParams(1, 3, 1, 0.5)) == 1.5);
  CHECK(barrier_exponent(BarrierParams(1, 0.5, 1, 0.5)) == 0.25);
  const double beta = 0.7, alpha = 0.3;
  CHECK(barrier_exponent(BarrierParams(1, beta, 1, alpha)) == beta * (1.0 - alpha));
}

TEST_CASE("admissibility agrees with barrier_exponent on random tuples") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-0.5, 5.0);
  std::uniform_real_distribution<double> ua(-0.2, 1.2);
  for (int i = 0; i < 10000; ++i) {
    const BarrierParams p(u(rng), u(rng), u(rng), ua(rng));
    const bool positive = p.tc() > 0 && p.q() > 0 && p.beta() > 0 && p.alpha() > 0 && p.alpha() < 1;
    REQUIRE(validate_params(p).admissible() == (positive && barrier_exponent(p) >= 1.0));
  }
}

TEST_CASE("admissibility is monotone in beta") {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(0.01, 5.0);
  std::uniform_real_distribution<double> ua(0.01, 0.99);
  int admissible = 0;
  for (int i = 0; i < 5000; ++i) {
    const double tc = u(rng), q = u(rng), alpha = ua(rng), b1 = u(rng) * 4;
    if (!validate_params(BarrierParams(tc, b1, q, alpha)).admissible()) continue;
    ++admissible;
    const double b2 = b1 + u(rng);
    REQUIRE(validate_params(BarrierParams(tc, b2, q, alpha)).admissible());
    REQUIRE(validate_params(BarrierParams(tc, std::nextafter(b1, 100.0), q, alpha)).admissible());
  }
  CHECK(admissible > 100);
}

TEST_CASE("numeric policy defaults and validation") {
  NumericPolicy p;
  CHECK(p.eps_conv == 1e-8);
  CHECK(p.rel_tol == 1e-9);
  CHECK(p.abs_tol == 1e-12);
  CHECK(p.sign_eps == 0.0);
  CHECK(p.residual_tol == 1e-7);
  CHECK(p.terminal_guard(1.0) == doctest::Approx(1e-9).epsilon(1e-15));
  CHECK(p.terminal_guard(1e-6) == 1e-12);
  CHECK_NOTHROW(p.validate(1.0));

  NumericPolicy bad = p;
  bad.rel_tol = 0;
  CHECK_THROWS_AS(bad.validate(1.0), InputError);
  bad = p;
  bad.sign_eps = -1;
  CHECK_THROWS_AS(bad.validate(1.0), InputError);
  bad = p;
  bad.delta_end = 2.0;
  CHECK_THROWS_AS(bad.validate(1.0), InputError);
  bad = p;
  bad.eps_conv = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(bad.validate(1.0), InputError);
}

TEST_CASE("check_spec accepts the reference law and rejects a shifted one") {
  const BarrierParams p(1, 2, 1, 0.5);
  const DynamicsSpec spec = make_time_barrier_scalar(p);
  const SpecCheck ok = check_spec(spec, 1.0);
  CHECK(ok.ok);
  CHECK(ok.points_checked > 16 * 64 * 9);

  DynamicsSpec shifted = spec;
  shifted.rhs = [](std::span<const double>, double, std::span<double> dx) { dx[0] = 1.0; };
  CHECK_FALSE(check_spec(shifted, 1.0).ok);

  DynamicsSpec bad_v = spec;
  bad_v.lyapunov->value = [](std::span<const double> x, double) { return x[0]; };
  CHECK_FALSE(check_spec(bad_v, 1.0).ok);
}

TEST_CASE("sgn and max_norm") {
  CHECK(sgn(3.0) == 1.0);
  CHECK(sgn(-0.1) == -1.0);
  CHECK(sgn(0.0) == 0.0);
  const State x{1.0, -4.0, 2.0};
  CHECK(max_norm(x) == 4.0);
  CHECK(max_norm(State{}) == 0.0);
}
