/**
 * @file integrate.hpp
 * @brief Adaptive Dormand-Prince 5(4) integration of a DynamicsSpec on
 * [0, T_c - delta_end] with convergence capture and dense output.
 *
 * Steps are clamped to h <= 0.5 (T_c - t) so they shrink geometrically into
 * the barrier. Once a state block is inside the eps_conv ball the error
 * control becomes purely relative, which lets the integrator follow a
 * finite-time approach to the origin down to its exact reaching time. A block
 * is captured (set to exactly zero and held) when
 *   - a scalar coordinate changes sign within a step (root located on the
 *     dense output), or
 *   - inside the ball, the local reaching-time scale |x| / |d|x|/dt| drops
 *     below kCaptureScale * T_c, or
 *   - inside the ball, the step size reaches the floating-point floor.
 * Decoupled specs are captured coordinate by coordinate, coupled specs as a
 * whole.
 */
#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "tbarrier/core.hpp"

namespace tbarrier {

inline constexpr double kCaptureScale = 1e-11;
inline constexpr std::size_t kUniformSamples = 512;
inline constexpr std::size_t kMaxSteps = 5'000'000;

struct TrajectorySample {
  double t = 0.0;
  State x;
  std::optional<double> V;
  /// V / (T_c - t)^beta
  std::optional<double> W;
  /// Analytic dV/dt when the spec supplies it.
  std::optional<double> Vdot;
};

/// One accepted step's continuous extension (4th order).
struct DenseSegment {
  double t0 = 0.0;
  double h = 0.0;
  /// Five coefficient rows of length dim, stored row-major.
  std::vector<double> coeffs;
};

struct Trajectory {
  std::size_t dim = 1;
  std::vector<TrajectorySample> samples;

  /// Exact-zero capture time when every block was captured; otherwise the
  /// terminal time if the state ends inside the eps_conv ball; otherwise unset.
  std::optional<double> converged_at;
  /// Time from which the state stayed inside the eps_conv ball.
  std::optional<double> entered_ball_at;
  /// Every block reached exactly zero before the terminal time.
  bool reached_zero = false;
  double terminal_norm = 0.0;
  /// Last integrated time, T_c - delta_end.
  double t_end = 0.0;

  std::size_t step_count = 0;
  std::size_t rejected_steps = 0;
  std::size_t rhs_evals = 0;

  /// Per-coordinate capture time; coordinates read as zero from then on.
  std::vector<std::optional<double>> capture_times;
  std::vector<DenseSegment> segments;

  /// Lyapunov function of the simulated spec, when it has one.
  ScalarFieldFn lyapunov_value;
  std::optional<BarrierParams> params;

  /// Dense-output state at t in [0, t_end].
  State state_at(double t) const;
};

/**
 * @brief Integrates spec from x0 on [0, T_c - delta_end].
 *
 * Throws InputError for a bad x0 or policy, StallError when the step size
 * underflows outside the convergence ball, BlowUpError on a non-finite rhs.
 */
Trajectory simulate(const DynamicsSpec& spec, std::span<const double> x0, const BarrierParams& p,
                    const NumericPolicy& policy = {});

/// Scalar convenience overload.
Trajectory simulate(const DynamicsSpec& spec, double x0, const BarrierParams& p,
                    const NumericPolicy& policy = {});

/**
 * @brief Dense-output states at the requested times, which must be sorted
 * and lie within [0, last sample time]. Throws InputError otherwise.
 */
std::vector<State> resample(const Trajectory& traj, std::span<const double> times);

/// The sample grid used by simulate: uniform points, a geometric cluster
/// toward t_end, and the given event times.
std::vector<double> sample_grid(double tc, double t_end, std::span<const double> events);

}  // namespace tbarrier
