/**
 * @file core.hpp
 * @brief Domain types shared by every module: barrier parameters, numeric
 * policy, dynamics specifications and the error hierarchy.
 */
#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace tbarrier {

using State = std::vector<double>;

/** @brief Right-hand side evaluator: writes f(x, t) into dxdt. */
using RhsFn = std::function<void(std::span<const double> x, double t, std::span<double> dxdt)>;

/** @brief Scalar field over (x, t), used for V and its derivative along the flow. */
using ScalarFieldFn = std::function<double(std::span<const double> x, double t)>;

// ---------------------------------------------------------------------------
// Errors

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid caller input (wrong dimension, non-finite value, out-of-range time).
class InputError : public Error {
 public:
  using Error::Error;
};

/// An evaluator was asked for a time outside its domain [0, T_c).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// The barrier integral diverges at the requested upper limit.
class DivergentIntegral : public Error {
 public:
  using Error::Error;
};

/// A finite quantity is not representable in double precision.
class NumericOverflow : public Error {
 public:
  using Error::Error;
};

/// Quadrature did not converge; the integral may diverge.
class QuadratureError : public Error {
 public:
  using Error::Error;
};

/// Failure of the integrator that carries the offending state and time.
class NumericalFailure : public Error {
 public:
  NumericalFailure(const std::string& what, State state, double t)
      : Error(what), state_(std::move(state)), t_(t) {}
  const State& state() const noexcept { return state_; }
  double time() const noexcept { return t_; }

 private:
  State state_;
  double t_;
};

/// Step size underflow before the terminal guard without convergence.
class StallError : public NumericalFailure {
 public:
  using NumericalFailure::NumericalFailure;
};

/// The right-hand side produced a non-finite value.
class BlowUpError : public NumericalFailure {
 public:
  using NumericalFailure::NumericalFailure;
};

// ---------------------------------------------------------------------------
// Parameters

/**
 * @brief The tuple (T_c, beta, q, alpha) with the barrier exponent
 * m = beta * (1 - alpha) computed once at construction.
 *
 * Construction accepts any numeric tuple; admissibility is decided by
 * validate_params(). Every module reads m() rather than recomputing it.
 */
class BarrierParams {
 public:
  BarrierParams(double tc, double beta, double q, double alpha) noexcept
      : tc_(tc), beta_(beta), q_(q), alpha_(alpha), m_(beta * (1.0 - alpha)) {}

  double tc() const noexcept { return tc_; }
  double beta() const noexcept { return beta_; }
  double q() const noexcept { return q_; }
  double alpha() const noexcept { return alpha_; }
  double m() const noexcept { return m_; }

  /// True iff m >= 1 (the structural condition only, not positivity).
  bool structurally_admissible() const noexcept { return m_ >= 1.0; }

  friend bool operator==(const BarrierParams&, const BarrierParams&) = default;

 private:
  double tc_;
  double beta_;
  double q_;
  double alpha_;
  double m_;
};

enum class ParamStatus { Admissible, Inadmissible, NonFinite };

struct ParamVerdict {
  ParamStatus status = ParamStatus::Admissible;
  /// First violated constraint, empty when admissible.
  std::string reason;
  double m = 0.0;

  bool admissible() const noexcept { return status == ParamStatus::Admissible; }
};

/**
 * @brief Checks positivity (T_c > 0, q > 0, alpha in (0,1), beta > 0, in that
 * order) and then beta*(1-alpha) >= 1. Non-finite inputs produce a distinct
 * NonFinite verdict naming the parameter.
 */
ParamVerdict validate_params(const BarrierParams& p);

/// m = beta*(1-alpha), as stored in p.
inline double barrier_exponent(const BarrierParams& p) noexcept { return p.m(); }

// ---------------------------------------------------------------------------
// Numeric policy

struct NumericPolicy {
  double eps_conv = 1e-8;
  /// Terminal guard; when unset, max(1e-9 * T_c, 1e-12).
  std::optional<double> delta_end;
  double rel_tol = 1e-9;
  double abs_tol = 1e-12;
  /// Width of the sign regularization; 0 selects exact sign with event capture.
  double sign_eps = 0.0;
  double residual_tol = 1e-7;

  double terminal_guard(double tc) const;

  /// Throws InputError when a field is out of range for horizon tc.
  void validate(double tc) const;
};

// ---------------------------------------------------------------------------
// Dynamics

struct LyapunovData {
  ScalarFieldFn value;
  /// Analytic derivative along trajectories; may be empty.
  ScalarFieldFn rate;
};

/**
 * @brief A right-hand side f(x, t) on [0, horizon) together with optional
 * Lyapunov data.
 */
struct DynamicsSpec {
  std::size_t dim = 1;
  RhsFn rhs;
  std::optional<LyapunovData> lyapunov;
  std::string label;
  double horizon = std::numeric_limits<double>::infinity();
  /// Coordinates evolve independently of one another.
  bool decoupled = false;

  State eval(std::span<const double> x, double t) const;
};

/// Result of the sampled equilibrium / positive-definiteness check.
struct SpecCheck {
  bool ok = true;
  std::string message;
  std::size_t points_checked = 0;
};

/**
 * @brief Samples rhs(0, t) == 0 and, when Lyapunov data is present,
 * V(0, t) == 0 and V(x, t) > 0 for x != 0.
 *
 * Points: the origin plus 64 random points per decade of radius over
 * [1e-6, 1e3], at 16 times spread over [0, min(horizon, t_max)).
 */
SpecCheck check_spec(const DynamicsSpec& spec, double t_max, std::uint64_t seed = 7);

double sgn(double x) noexcept;

/// sup-norm
double max_norm(std::span<const double> x) noexcept;

}  // namespace tbarrier
