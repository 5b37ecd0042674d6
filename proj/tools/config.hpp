// Strict INI-style run configuration.
//
//   [params]   tc, beta, q, alpha
//   [policy]   eps_conv, delta_end, rel_tol, abs_tol, sign_eps, residual_tol
//   [initial]  x0 (comma-separated components)
//   [certify]  bias
//   [witness]  vlevel, t1, t2
//   [sweep]    tc, beta, q, alpha (comma lists), x0_decade_min, x0_decade_max,
//              law, checks, seed, threads
//   [output]   path
//
// Unknown sections, unknown keys and duplicate keys are errors. Absent keys
// keep the defaults of RunConfig.
#pragma once

#include <istream>
#include <optional>
#include <string>

#include "tbarrier/core.hpp"
#include "tbarrier/sweep.hpp"

namespace tbarrier::cli {

class ConfigError : public InputError {
 public:
  using InputError::InputError;
};

struct RunConfig {
  double tc = 1.0;
  double beta = 2.0;
  double q = 1.0;
  double alpha = 0.5;
  NumericPolicy policy;
  State x0{1.0};
  double bias = 0.0;
  double vlevel = 0.25;
  double t1 = 0.0;
  double t2 = 0.5;
  SweepConfig sweep;
  std::optional<std::string> output;

  BarrierParams params() const { return BarrierParams(tc, beta, q, alpha); }
};

/// Parses configuration text; `source` names the input in error messages.
RunConfig parse_config(std::istream& in, const std::string& source);

RunConfig load_config(const std::string& path);

}  // namespace tbarrier::cli
