/**
 * @file sweep.hpp
 * @brief Batch experiments over parameter grids and initial conditions, and
 * the barrier-versus-autonomous separation table.
 */
#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tbarrier/core.hpp"

namespace tbarrier {

enum class Law { TimeBarrier, AutonomousPowerLaw };

const char* to_string(Law law) noexcept;
std::optional<Law> parse_law(const std::string& name);

struct CheckSet {
  bool deadline = true;
  bool certificate = true;
  bool bound_tightness = true;
  bool oracle_error = true;

  static CheckSet none() { return CheckSet{false, false, false, false}; }
};

struct SweepConfig {
  std::vector<double> tc{0.5, 1.0, 2.0};
  std::vector<double> beta{4.0, 6.0, 8.0};
  std::vector<double> q{0.5, 1.0, 2.0};
  std::vector<double> alpha{0.25, 0.5, 0.75};
  int x0_decade_min = -6;
  int x0_decade_max = 6;
  Law law = Law::TimeBarrier;
  CheckSet checks;
  /// Seeds the sampled equilibrium check run once per parameter tuple.
  std::uint64_t seed = 1;
  /// Worker threads; 0 uses the hardware concurrency.
  unsigned threads = 0;

  /// Throws InputError on empty grids, non-finite values or a reversed decade range.
  void validate() const;
  std::size_t row_count() const;
};

/// Tolerance of the bound-tightness check, relative to T_c.
inline constexpr double kBoundTightness = 1e-4;

struct SweepRow {
  std::size_t index = 0;
  double tc = 0.0, beta = 0.0, q = 0.0, alpha = 0.0, m = 0.0;
  double x0 = 0.0;

  bool admissible = false;
  std::string inadmissible_reason;
  /// Sampled equilibrium check of the simulated spec.
  bool spec_ok = true;

  /// "ok", "stall", "blowup" or "error".
  std::string status = "ok";
  std::string error;

  std::optional<double> converged_at;
  std::optional<double> entered_ball_at;
  bool reached_zero = false;
  double terminal_norm = 0.0;
  std::size_t steps = 0;
  std::size_t rejected_steps = 0;

  /// Analytic settling time (barrier bound or autonomous settling integral).
  double tau_bound = 0.0;
  bool analytic_reaches_zero = false;

  std::optional<bool> deadline_pass;
  std::optional<bool> certificate_pass;
  std::optional<double> max_residual;
  std::optional<bool> bound_pass;
  std::optional<double> bound_gap;
  std::optional<bool> oracle_pass;
  std::optional<double> oracle_error;

  /// Any enabled check failed, or the simulation failed.
  bool failed() const noexcept;
};

struct SweepSummary {
  std::size_t rows = 0;
  std::size_t admissible_rows = 0;
  std::size_t inadmissible_rows = 0;
  /// Failure counts over admissible rows.
  std::size_t numeric_failures = 0;
  std::size_t deadline_failures = 0;
  std::size_t certificate_failures = 0;
  std::size_t bound_failures = 0;
  std::size_t oracle_failures = 0;
  /// Inadmissible rows whose state reached exactly zero / did not.
  std::size_t inadmissible_reaching = 0;
  std::size_t inadmissible_not_reaching = 0;
  std::optional<std::size_t> worst_bound_row;
  double worst_bound_gap = 0.0;
  std::optional<std::size_t> worst_oracle_row;
  double worst_oracle_error = 0.0;

  bool any_failure() const noexcept {
    return numeric_failures + deadline_failures + certificate_failures + bound_failures + oracle_failures > 0;
  }
};

struct SweepResult {
  std::vector<SweepRow> rows;
  SweepSummary summary;
};

/**
 * @brief Simulates, certifies and compares against analytic oracles for every
 * (parameter tuple, x0 = 10^k) combination.
 *
 * Rows are computed concurrently and stored in lexicographic grid order
 * (T_c, beta, q, alpha, then x0). Numerical failures become failing rows.
 */
SweepResult run_sweep(const SweepConfig& cfg, const NumericPolicy& policy = {});

/// One row per sweep row, 17 significant digits, "na" for absent values.
void write_sweep_csv(std::ostream& os, const SweepResult& result);

/// key=value summary block.
void write_sweep_summary(std::ostream& os, const SweepSummary& summary);

struct SeparationRow {
  double x0 = 0.0;
  /// converged_at of the time-barrier law, unset if it did not converge.
  std::optional<double> barrier_settling;
  double autonomous_settling = 0.0;
  bool autonomous_exceeds_deadline = false;
  bool barrier_within_deadline = false;
};

/// Smallest beta with beta * (1 - alpha) >= 1 in floating point.
double minimal_admissible_beta(double alpha);

/**
 * @brief Compares the time-barrier law (beta = 1/(1-alpha), so m = 1) with
 * the power-law comparator of the same q and alpha.
 */
std::vector<SeparationRow> separation_table(double tc, double q, double alpha, std::span<const double> x0_list,
                                            const NumericPolicy& policy = {});

}  // namespace tbarrier
