/**
 * @file systems.hpp
 * @brief Reference dynamics: the scalar time-barrier law, its componentwise
 * extension, and the autonomous power-law comparator.
 */
#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>

#include "tbarrier/core.hpp"

namespace tbarrier {

/**
 * @brief Autonomous comparator Vdot <= -phi(V).
 *
 * `settling` holds the closed form of the settling integral when one is
 * known; otherwise the integral is evaluated by quadrature.
 */
struct AutonomousLaw {
  std::function<double(double)> phi;
  std::string label;
  std::map<std::string, double> params;
  std::function<double(double)> settling;
};

struct AutonomousSystem {
  AutonomousLaw law;
  DynamicsSpec spec;
};

/// sign(x) under the policy's regularization (exact when sign_eps == 0).
double regularized_sign(double x, double sign_eps) noexcept;

/**
 * xdot = -beta x / (T_c - t) - q |x|^alpha sgn(x), with V = |x|.
 *
 * Admissibility is not required: q = 0 yields the pure-barrier flow.
 * The evaluator throws DomainError for t >= T_c.
 */
DynamicsSpec make_time_barrier_scalar(const BarrierParams& p, const NumericPolicy& policy = {});

/// The scalar law applied to each of n coordinates, with V = max_i |x_i|.
DynamicsSpec make_time_barrier_componentwise(const BarrierParams& p, std::size_t dim,
                                             const NumericPolicy& policy = {});

/// xdot = -q |x|^alpha sgn(x), phi(V) = q V^alpha. Requires q > 0, alpha in (0,1).
AutonomousSystem make_autonomous_power_law(double q, double alpha,
                                           const NumericPolicy& policy = {});

/**
 * Adds a constant c to every coordinate of the right-hand side. The Lyapunov
 * rate is recomputed for V = max_i |x_i| (the built-in laws' V). The result
 * violates the equilibrium assumption and exists to exercise the certificate.
 */
DynamicsSpec with_bias(const DynamicsSpec& spec, double c);

/// Samples phi(V) > 0 over V in [1e-12, 1e6]; returns false on the first failure.
bool check_law(const AutonomousLaw& law);

}  // namespace tbarrier
