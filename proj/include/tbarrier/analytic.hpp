/**
 * @file analytic.hpp
 * @brief Closed forms for the scalar time-barrier law: barrier integral,
 * settling bound, Bernoulli-substitution solution, and the autonomous
 * settling integral.
 *
 * With z = |x|^(1-alpha) the scalar law becomes linear,
 *   zdot = -m z / (T_c - t) - q (1 - alpha),
 * and z (T_c - t)^(-m) = W^(1-alpha) decreases exactly by q(1-alpha) I(t),
 * where I(t) is the barrier integral below. Everything here is expressed in
 * the remaining-time ratio r = (T_c - t) / T_c, which keeps the formulas
 * finite for any m.
 */
#pragma once

#include "tbarrier/core.hpp"
#include "tbarrier/systems.hpp"

namespace tbarrier {

/// Exponent above which powers of (T_c - t) are evaluated in log space.
inline constexpr double kLogSpaceExponent = 30.0;

/**
 * @brief I(t) = integral over [0, t] of (T_c - s)^(-m) ds.
 *
 * Throws DivergentIntegral for t >= T_c when m >= 1, DomainError for t < 0
 * or t > T_c, NumericOverflow when the value exceeds double range.
 */
double barrier_integral(const BarrierParams& p, double t);

/// log I(t); -inf at t = 0. Same preconditions as barrier_integral without the overflow.
double log_barrier_integral(const BarrierParams& p, double t);

struct SettlingBound {
  /// Time at which the W^(1-alpha) envelope reaches zero, clamped to T_c.
  double tau_bound = 0.0;
  /// T_c - tau_bound, computed without cancellation.
  double margin = 0.0;
  bool reaches_zero = false;
  double V0 = 0.0;
};

/**
 * @brief Solves W0^(1-alpha) = q (1-alpha) I(tau) for tau.
 *
 * For m < 1 the crossing exists only when
 * V0^(1-alpha) T_c^(-m) <= q (1-alpha) T_c^(1-m) / (1-m); otherwise
 * reaches_zero is false and tau_bound = T_c.
 */
SettlingBound settling_bound(const BarrierParams& p, double V0);

/**
 * @brief x(t) for the scalar law via the Bernoulli substitution, clamped to
 * exactly zero past the crossing time. Returns x0 exactly at t = 0.
 */
double exact_solution_scalar(const BarrierParams& p, double x0, double t);

/**
 * @brief Settling integral of the autonomous comparator from V0 down to 0.
 *
 * Uses the law's closed form when available; otherwise tanh-sinh quadrature
 * after the substitution V = u^2. Throws QuadratureError when the quadrature
 * does not reach relative accuracy 1e-8.
 */
double autonomous_settling_integral(const AutonomousLaw& law, double V0);

/// Same integral by quadrature only, ignoring any closed form.
double autonomous_settling_quadrature(const AutonomousLaw& law, double V0);

/// Closed-form solution of the power-law comparator xdot = -q|x|^alpha sgn(x).
double power_law_solution(double q, double alpha, double x0, double t);

}  // namespace tbarrier
