#include "csv_io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace tbarrier::cli {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
  os << "t";
  for (std::size_t i = 1; i <= traj.dim; ++i) os << ",x_" << i;
  os << ",V,W\n";
  for (const auto& s : traj.samples) {
    os << format_double(s.t);
    for (double x : s.x) os << ',' << format_double(x);
    os << ',' << format_double(s.V.value_or(NAN)) << ',' << format_double(s.W.value_or(NAN)) << '\n';
  }
}

namespace {

double parse_field(const std::string& field, int lineno) {
  if (field == "nan") return NAN;
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc() || ptr != field.data() + field.size()) {
    std::ostringstream os;
    os << "trajectory csv line " << lineno << ": bad number '" << field << "'";
    throw InputError(os.str());
  }
  return v;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

}  // namespace

std::vector<TrajectorySample> read_trajectory_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw InputError("trajectory csv: missing header");
  const auto header = split(line);
  if (header.size() < 4 || header.front() != "t" || header[header.size() - 2] != "V" || header.back() != "W") {
    throw InputError("trajectory csv: header must be t,x_1,...,x_n,V,W");
  }
  const std::size_t dim = header.size() - 3;
  for (std::size_t i = 0; i < dim; ++i) {
    if (header[i + 1] != "x_" + std::to_string(i + 1)) throw InputError("trajectory csv: bad state column name");
  }

  std::vector<TrajectorySample> out;
  int lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != header.size()) {
      std::ostringstream os;
      os << "trajectory csv line " << lineno << ": expected " << header.size() << " fields";
      throw InputError(os.str());
    }
    TrajectorySample s;
    s.t = parse_field(cells[0], lineno);
    for (std::size_t i = 0; i < dim; ++i) s.x.push_back(parse_field(cells[i + 1], lineno));
    const double V = parse_field(cells[dim + 1], lineno);
    const double W = parse_field(cells[dim + 2], lineno);
    if (!std::isnan(V)) s.V = V;
    if (!std::isnan(W)) s.W = W;
    out.push_back(std::move(s));
  }
  return out;
}

void write_report(std::ostream& os, const ReportBlock& block) {
  for (const auto& [key, value] : block) os << key << '=' << value << '\n';
}

}  // namespace tbarrier::cli
