// Trajectory CSV and key=value report serialization.
#pragma once

#include <istream>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "tbarrier/integrate.hpp"

namespace tbarrier::cli {

/// Shortest round-trip-safe form: 17 significant digits, C locale.
std::string format_double(double v);

/// Header `t,x_1,...,x_n,V,W`, one row per sample; absent V/W are written as nan.
void write_trajectory_csv(std::ostream& os, const Trajectory& traj);

/// Reads what write_trajectory_csv produced. Throws InputError on malformed input.
std::vector<TrajectorySample> read_trajectory_csv(std::istream& is);

using ReportBlock = std::vector<std::pair<std::string, std::string>>;

void write_report(std::ostream& os, const ReportBlock& block);

}  // namespace tbarrier::cli
