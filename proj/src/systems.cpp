#include "tbarrier/systems.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace tbarrier {

namespace {

void require_before_deadline(double t, double tc) {
  if (!(t < tc)) {
    std::ostringstream os;
    os << "domain exceeded: t=" << t << " >= T_c=" << tc;
    throw DomainError(os.str());
  }
}

// Index of the largest |x_i|, first one on ties.
std::size_t leading_index(std::span<const double> x) noexcept {
  std::size_t k = 0;
  for (std::size_t i = 1; i < x.size(); ++i) {
    if (std::abs(x[i]) > std::abs(x[k])) k = i;
  }
  return k;
}

struct ScalarBarrierLaw {
  double tc, beta, q, alpha, sign_eps;

  double rate(double x, double t) const {
    return -(beta * x / (tc - t)) - q * std::pow(std::abs(x), alpha) * regularized_sign(x, sign_eps);
  }

  // d|x|/dt along the flow, written in the same arithmetic as the dissipation bound.
  double lyapunov_rate(double x, double t) const {
    if (x == 0.0) return 0.0;
    const double v = std::abs(x);
    const double shape = sign_eps > 0.0 ? v / std::max(v, sign_eps) : 1.0;
    return -(beta * v / (tc - t)) - q * std::pow(v, alpha) * shape;
  }
};

std::string describe(const char* name, const BarrierParams& p) {
  std::ostringstream os;
  os << name << "(T_c=" << p.tc() << ", beta=" << p.beta() << ", q=" << p.q()
     << ", alpha=" << p.alpha() << ")";
  return os.str();
}

}  // namespace

double regularized_sign(double x, double sign_eps) noexcept {
  if (sign_eps > 0.0) return x / std::max(std::abs(x), sign_eps);
  return sgn(x);
}

DynamicsSpec make_time_barrier_scalar(const BarrierParams& p, const NumericPolicy& policy) {
  return make_time_barrier_componentwise(p, 1, policy);
}

DynamicsSpec make_time_barrier_componentwise(const BarrierParams& p, std::size_t dim,
                                             const NumericPolicy& policy) {
  if (dim == 0) throw InputError("dimension must be >= 1");
  const ScalarBarrierLaw law{p.tc(), p.beta(), p.q(), p.alpha(), policy.sign_eps};
  const double tc = p.tc();

  DynamicsSpec spec;
  spec.dim = dim;
  spec.horizon = tc;
  spec.decoupled = true;
  spec.label = dim == 1 ? describe("time_barrier", p) : describe("time_barrier_componentwise", p);
  spec.rhs = [law, tc](std::span<const double> x, double t, std::span<double> dx) {
    require_before_deadline(t, tc);
    for (std::size_t i = 0; i < x.size(); ++i) dx[i] = law.rate(x[i], t);
  };
  spec.lyapunov = LyapunovData{
      [](std::span<const double> x, double) { return max_norm(x); },
      [law, tc](std::span<const double> x, double t) {
        require_before_deadline(t, tc);
        return law.lyapunov_rate(x[leading_index(x)], t);
      }};
  return spec;
}

AutonomousSystem make_autonomous_power_law(double q, double alpha, const NumericPolicy& policy) {
  if (!(q > 0.0) || !(alpha > 0.0 && alpha < 1.0)) {
    throw InputError("power law requires q > 0 and alpha in (0,1)");
  }
  AutonomousSystem out;
  out.law.phi = [q, alpha](double v) { return q * std::pow(v, alpha); };
  out.law.settling = [q, alpha](double v0) { return std::pow(v0, 1.0 - alpha) / (q * (1.0 - alpha)); };
  out.law.params = {{"q", q}, {"alpha", alpha}};
  {
    std::ostringstream os;
    os << "power_law(q=" << q << ", alpha=" << alpha << ")";
    out.law.label = os.str();
  }

  const double sign_eps = policy.sign_eps;
  out.spec.dim = 1;
  out.spec.label = out.law.label;
  out.spec.decoupled = true;
  out.spec.rhs = [q, alpha, sign_eps](std::span<const double> x, double, std::span<double> dx) {
    dx[0] = -q * std::pow(std::abs(x[0]), alpha) * regularized_sign(x[0], sign_eps);
  };
  out.spec.lyapunov = LyapunovData{
      [](std::span<const double> x, double) { return std::abs(x[0]); },
      [q, alpha, sign_eps](std::span<const double> x, double) {
        const double v = std::abs(x[0]);
        if (v == 0.0) return 0.0;
        const double shape = sign_eps > 0.0 ? v / std::max(v, sign_eps) : 1.0;
        return -q * std::pow(v, alpha) * shape;
      }};
  return out;
}

DynamicsSpec with_bias(const DynamicsSpec& spec, double c) {
  DynamicsSpec out = spec;
  std::ostringstream os;
  os << spec.label << " + bias(" << c << ")";
  out.label = os.str();
  auto base = spec.rhs;
  out.rhs = [base, c](std::span<const double> x, double t, std::span<double> dx) {
    base(x, t, dx);
    for (auto& v : dx) v += c;
  };
  if (out.lyapunov) {
    const std::size_t dim = spec.dim;
    out.lyapunov->rate = [base, c, dim](std::span<const double> x, double t) {
      State dx(dim);
      base(x, t, dx);
      const std::size_t k = leading_index(x);
      return sgn(x[k]) * (dx[k] + c);
    };
  }
  return out;
}

bool check_law(const AutonomousLaw& law) {
  for (int decade = -12; decade <= 6; ++decade) {
    for (double mant : {1.0, 2.0, 5.0}) {
      const double v = mant * std::pow(10.0, decade);
      if (v > 1e6) break;
      if (!(law.phi(v) > 0.0)) return false;
    }
  }
  return true;
}

}  // namespace tbarrier
