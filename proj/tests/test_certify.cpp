#include <doctest.h>

#include <cmath>
#include <random>

#include "tbarrier/certify.hpp"
#include "tbarrier/integrate.hpp"
#include "tbarrier/systems.hpp"

using namespace tbarrier;

TEST_CASE("w_transform examples") {
  const BarrierParams p(1, 2, 1, 0.5);
  CHECK(w_transform(1, 0, p) == 1.0);
  CHECK(w_transform(0.25, 0.5, p) == 1.0);
  CHECK(w_transform(0, 0.7, p) == 0.0);
  CHECK_THROWS_AS(w_transform(1, 1.0, p), DomainError);
  CHECK_THROWS_AS(w_transform(1, -0.1, p), DomainError);
  const BarrierParams steep(1, 40, 1, 0.5);
  CHECK(w_transform(1, 0.5, steep) == doctest::Approx(std::pow(2.0, 40)).epsilon(1e-13));
}

TEST_CASE("dissipation bound") {
  const BarrierParams p(1, 2, 1, 0.5);
  CHECK(dissipation_bound(1, 0, p) == -3.0);
  CHECK(dissipation_bound(0.25, 0.5, p) == -1.5);
}

TEST_CASE("reference law passes on random admissible pairs") {
  std::mt19937_64 rng(51);
  std::uniform_real_distribution<double> u01(0, 1);
  for (int i = 0; i < 100; ++i) {
    const double alpha = 0.1 + 0.8 * u01(rng), m = 1 + 2 * u01(rng);
    const BarrierParams p(0.5 + 4.5 * u01(rng), m / (1 - alpha), 0.1 + 4.9 * u01(rng), alpha);
    const double x0 = (u01(rng) < 0.5 ? -1 : 1) * std::pow(10.0, -3 + 6 * u01(rng));
    const Trajectory tr = simulate(make_time_barrier_scalar(p), x0, p);
    const CertificateReport r = check_dissipation(tr, p);
    REQUIRE(r.violations.empty());
    REQUIRE(r.w_monotone);
    REQUIRE(r.passed());
    CHECK(r.checked_samples > 0);
  }
}

TEST_CASE("injected bias is detected and grows with the bias") {
  const BarrierParams p(1, 2, 1, 0.5);
  double prev = 0;
  for (double c : {0.01, 0.1, 1.0}) {
    const DynamicsSpec s = with_bias(make_time_barrier_scalar(p), c);
    const CertificateReport r = check_dissipation(simulate(s, 1.0, p), p);
    CHECK_FALSE(r.violations.empty());
    CHECK_FALSE(r.passed());
    CHECK(r.max_residual >= prev);
    CHECK(r.max_residual > 0);
    prev = r.max_residual;
  }
}

TEST_CASE("finite-difference fallback agrees with analytic Vdot") {
  const BarrierParams p(1, 2, 1, 0.5);
  DynamicsSpec s = make_time_barrier_scalar(p);
  s.lyapunov->rate = nullptr;
  const Trajectory tr = simulate(s, 1.0, p);
  const CertificateReport r = check_dissipation(tr, p);
  CHECK(r.violations.empty());
  CHECK(r.passed());

  DynamicsSpec biased = with_bias(s, 0.1);
  biased.lyapunov->rate = nullptr;
  CHECK_FALSE(check_dissipation(simulate(biased, 1.0, p), p).violations.empty());
}

TEST_CASE("empty motion passes vacuously") {
  const BarrierParams p(1, 2, 1, 0.5);
  const CertificateReport r = check_dissipation(simulate(make_time_barrier_scalar(p), 0.0, p), p);
  CHECK(r.checked_samples == 0);
  CHECK(r.violations.empty());
  CHECK(r.passed());
}

TEST_CASE("inadmissible parameters fail the certificate") {
  const BarrierParams p(1, 1, 1, 0.5);
  const CertificateReport r = check_dissipation(simulate(make_time_barrier_scalar(p), 0.1, p), p);
  CHECK(r.violations.empty());
  CHECK_FALSE(r.admissibility.admissible());
  CHECK_FALSE(r.passed());
}

TEST_CASE("trajectory without V is an input error") {
  const BarrierParams p(1, 2, 1, 0.5);
  DynamicsSpec s = make_time_barrier_scalar(p);
  s.lyapunov.reset();
  CHECK_THROWS_AS(check_dissipation(simulate(s, 1.0, p), p), InputError);
}

TEST_CASE("non-autonomy witness") {
  const BarrierParams p(1, 2, 1, 0.5);
  const NonAutonomyWitness w = find_nonautonomy_witness(p, 0.25, 0, 0.5);
  CHECK(w.vdot1 == doctest::Approx(-1.0).epsilon(1e-15));
  CHECK(w.vdot2 == doctest::Approx(-1.5).epsilon(1e-15));
  CHECK(std::fabs(w.gap - 0.5) <= 1e-12);
  CHECK(w.exists);

  const NonAutonomyWitness flat = find_nonautonomy_witness(BarrierParams(1, 0, 1, 0.5), 0.25, 0, 0.5);
  CHECK(flat.gap == 0.0);
  CHECK_FALSE(flat.exists);
  CHECK(flat.note == "no witness (autonomous limit)");

  CHECK(find_nonautonomy_witness(p, 0.25, 0, 1 - 1e-9).gap > 1e6);

  CHECK_THROWS_AS(find_nonautonomy_witness(p, 0.25, 0.3, 0.3), InputError);
  CHECK_THROWS_AS(find_nonautonomy_witness(p, 0.25, 0, 1.0), InputError);
  CHECK_THROWS_AS(find_nonautonomy_witness(p, 0.25, -0.1, 0.5), InputError);
  CHECK_THROWS_AS(find_nonautonomy_witness(p, 0.0, 0, 0.5), InputError);
}

TEST_CASE("witness gap strictly increases in t2") {
  const BarrierParams p(2, 3, 1, 0.4);
  double prev = 0;
  for (int k = 1; k < 200; ++k) {
    const double t2 = 2 * (1 - std::pow(0.9, k));
    const double gap = find_nonautonomy_witness(p, 0.7, 0, t2).gap;
    REQUIRE(gap > prev);
    prev = gap;
  }
}
