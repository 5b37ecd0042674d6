#include "tbarrier/certify.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "tbarrier/analytic.hpp"

namespace tbarrier {

namespace {

void check_barrier_time(double t, const BarrierParams& p, const char* who) {
  if (!(t >= 0.0 && t < p.tc())) {
    std::ostringstream os;
    os << who << ": time " << t << " outside [0, T_c=" << p.tc() << ")";
    throw DomainError(os.str());
  }
}

// dV/dt by finite differences of V along the dense output.
double finite_difference_rate(const Trajectory& traj, double t, double tc) {
  const double last = traj.samples.back().t;
  const double h = std::min(1e-6 * tc, 0.01 * (tc - t));
  auto V_at = [&](double s) { return traj.lyapunov_value(traj.state_at(s), s); };
  const double lo = t - h;
  const double hi = t + h;
  if (lo >= 0.0 && hi <= last) return (V_at(hi) - V_at(lo)) / (2.0 * h);
  // second-order one-sided stencils at the ends of the trajectory
  if (t + 2.0 * h <= last) return (-3.0 * V_at(t) + 4.0 * V_at(t + h) - V_at(t + 2.0 * h)) / (2.0 * h);
  const double hb = std::min(h, t / 2.0);
  return (3.0 * V_at(t) - 4.0 * V_at(t - hb) + V_at(t - 2.0 * hb)) / (2.0 * hb);
}

}  // namespace

double w_transform(double V, double t, const BarrierParams& p) {
  check_barrier_time(t, p, "w_transform");
  if (!(V >= 0.0)) throw InputError("w_transform: V must be >= 0");
  if (V == 0.0) return 0.0;
  const double remaining = p.tc() - t;
  if (p.beta() > kLogSpaceExponent) return std::exp(std::log(V) - p.beta() * std::log(remaining));
  return V / std::pow(remaining, p.beta());
}

double dissipation_bound(double V, double t, const BarrierParams& p) {
  return -(p.beta() * V / (p.tc() - t)) - p.q() * std::pow(V, p.alpha());
}

CertificateReport check_dissipation(const Trajectory& traj, const BarrierParams& p, const NumericPolicy& policy) {
  CertificateReport report;
  report.admissibility = validate_params(p);
  if (traj.samples.empty()) return report;
  for (const auto& s : traj.samples) {
    if (!s.V) throw InputError("check_dissipation: trajectory carries no Lyapunov values");
  }
  const double tc = p.tc();

  for (const auto& s : traj.samples) {
    const double V = *s.V;
    if (!(V > policy.eps_conv) || !(s.t < tc)) continue;
    double lhs = 0.0;
    if (s.Vdot) {
      lhs = *s.Vdot;
    } else {
      if (!traj.lyapunov_value) throw InputError("check_dissipation: no Lyapunov function for differencing");
      lhs = finite_difference_rate(traj, s.t, tc);
    }
    const double bound = dissipation_bound(V, s.t, p);
    const double residual = lhs - bound;
    ++report.checked_samples;
    report.max_residual = std::max(report.max_residual, residual);
    if (residual > policy.residual_tol * (1.0 + std::abs(bound))) {
      report.violations.push_back(Violation{s.t, V, lhs, bound, residual});
    }
  }

  bool first = true;
  std::optional<double> prev;
  for (const auto& s : traj.samples) {
    if (!s.W) continue;
    if (prev) {
      const double increase = *s.W - *prev;
      if (first || increase > report.worst_w_increase) {
        report.worst_w_increase = increase;
        report.worst_w_increase_at = s.t;
        first = false;
      }
      if (increase > policy.residual_tol) report.w_monotone = false;
    }
    prev = s.W;
  }
  return report;
}

NonAutonomyWitness find_nonautonomy_witness(const BarrierParams& p, double V_level, double t1, double t2,
                                            double residual_tol) {
  if (!(V_level > 0.0) || !std::isfinite(V_level)) throw InputError("V_level must be finite and > 0");
  for (double t : {t1, t2}) {
    if (!(t >= 0.0 && t < p.tc())) {
      std::ostringstream os;
      os << "time " << t << " outside [0, T_c=" << p.tc() << ")";
      throw InputError(os.str());
    }
  }
  if (t1 == t2) throw InputError("t1 must differ from t2");

  NonAutonomyWitness w;
  w.V_level = V_level;
  w.t1 = t1;
  w.t2 = t2;
  w.vdot1 = dissipation_bound(V_level, t1, p);
  w.vdot2 = dissipation_bound(V_level, t2, p);
  w.gap = std::abs(w.vdot1 - w.vdot2);
  w.exists = w.gap > residual_tol * std::max(std::abs(w.vdot1), std::abs(w.vdot2));
  if (!w.exists) w.note = p.beta() == 0.0 ? "no witness (autonomous limit)" : "no witness (gap below tolerance)";
  return w;
}

}  // namespace tbarrier
