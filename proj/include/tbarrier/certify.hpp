/**
 * @file certify.hpp
 * @brief Checks the time-barrier dissipation inequality along trajectories
 * and produces non-autonomy witnesses.
 */
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tbarrier/core.hpp"
#include "tbarrier/integrate.hpp"

namespace tbarrier {

struct Violation {
  double t = 0.0;
  double V = 0.0;
  double lhs = 0.0;
  double rhs_bound = 0.0;
  double residual = 0.0;
};

struct CertificateReport {
  std::size_t checked_samples = 0;
  std::vector<Violation> violations;
  /// Largest positive lhs - rhs_bound over checked samples, 0 if none.
  double max_residual = 0.0;
  bool w_monotone = true;
  /// Largest W(t_{k+1}) - W(t_k) over consecutive samples (may be negative).
  double worst_w_increase = 0.0;
  std::optional<double> worst_w_increase_at;
  ParamVerdict admissibility;

  bool passed() const noexcept {
    return violations.empty() && w_monotone && admissibility.admissible();
  }
};

/// W = V / (T_c - t)^beta, in log space for beta > 30. DomainError unless 0 <= t < T_c.
double w_transform(double V, double t, const BarrierParams& p);

/// -beta V / (T_c - t) - q V^alpha: the right side of the dissipation inequality.
double dissipation_bound(double V, double t, const BarrierParams& p);

/**
 * @brief Verifies Vdot <= -beta V/(T_c - t) - q V^alpha at every sample with
 * V > eps_conv, with slack residual_tol * (1 + |bound|), and that W does not
 * increase by more than residual_tol between consecutive samples.
 *
 * Vdot is the spec's analytic rate when recorded; otherwise a finite
 * difference of V over the dense output with spacing
 * min(1e-6 T_c, 0.01 (T_c - t)). Throws InputError without V data.
 */
CertificateReport check_dissipation(const Trajectory& traj, const BarrierParams& p,
                                    const NumericPolicy& policy = {});

struct NonAutonomyWitness {
  double V_level = 0.0;
  double t1 = 0.0;
  double t2 = 0.0;
  double vdot1 = 0.0;
  double vdot2 = 0.0;
  double gap = 0.0;
  /// gap exceeds residual_tol * max(|vdot1|, |vdot2|).
  bool exists = false;
  std::string note;
};

/**
 * @brief Evaluates the equality dissipation rate at one V level and two
 * times. A positive gap shows the rate is not a function of V alone.
 */
NonAutonomyWitness find_nonautonomy_witness(const BarrierParams& p, double V_level, double t1, double t2,
                                            double residual_tol = NumericPolicy{}.residual_tol);

}  // namespace tbarrier
