#include "tbarrier/analytic.hpp"

#include <boost/math/quadrature/tanh_sinh.hpp>

#include <cmath>
#include <limits>
#include <sstream>

namespace tbarrier {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_time(const BarrierParams& p, double t) {
  if (!std::isfinite(t) || t < 0.0) {
    std::ostringstream os;
    os << "time " << t << " outside [0, T_c)";
    throw DomainError(os.str());
  }
  if (t >= p.tc()) {
    std::ostringstream os;
    os << "time " << t << " >= T_c=" << p.tc();
    throw DomainError(os.str());
  }
}

// log((T_c - t) / T_c)
double log_remaining(const BarrierParams& p, double t) { return std::log1p(-t / p.tc()); }

// r^e with r = exp(log_r); log space above kLogSpaceExponent.
double power_of_remaining(double log_r, double e) {
  if (e > kLogSpaceExponent) return std::exp(e * log_r);
  return std::pow(std::exp(log_r), e);
}

}  // namespace

double log_barrier_integral(const BarrierParams& p, double t) {
  const double m = p.m();
  if (!std::isfinite(t) || t < 0.0) throw DomainError("barrier integral: t must be >= 0");
  if (t >= p.tc()) {
    if (m >= 1.0) throw DivergentIntegral("barrier integral diverges at t >= T_c for m >= 1");
    if (t > p.tc()) throw DomainError("barrier integral: t > T_c");
    return (1.0 - m) * std::log(p.tc()) - std::log(1.0 - m);
  }
  if (t == 0.0) return -kInf;

  const double lr = log_remaining(p, t);
  if (m == 1.0) return std::log(-lr);
  // I = T_c^(1-m) * expm1(y) / (m - 1), y = (1 - m) log r; y and m - 1 share a sign.
  const double y = (1.0 - m) * lr;
  const double log_ratio =
      y > 0.0 ? y + std::log1p(-std::exp(-y)) - std::log(m - 1.0) : std::log(-std::expm1(y)) - std::log(1.0 - m);
  return (1.0 - m) * std::log(p.tc()) + log_ratio;
}

double barrier_integral(const BarrierParams& p, double t) {
  const double m = p.m();
  if (t == 0.0) return 0.0;
  if (m > kLogSpaceExponent || !(t < p.tc())) {
    const double log_value = log_barrier_integral(p, t);
    if (log_value > std::log(std::numeric_limits<double>::max())) {
      throw NumericOverflow("barrier integral exceeds double range");
    }
    return std::exp(log_value);
  }
  if (!std::isfinite(t) || t < 0.0) throw DomainError("barrier integral: t must be >= 0");

  const double lr = log_remaining(p, t);
  if (m == 1.0) return -lr;
  const double value = std::pow(p.tc(), 1.0 - m) * std::expm1((1.0 - m) * lr) / (m - 1.0);
  if (std::isfinite(value)) return value;
  const double log_value = log_barrier_integral(p, t);
  if (log_value > std::log(std::numeric_limits<double>::max())) {
    throw NumericOverflow("barrier integral exceeds double range");
  }
  return std::exp(log_value);
}

SettlingBound settling_bound(const BarrierParams& p, double V0) {
  if (!std::isfinite(V0) || V0 < 0.0) throw InputError("settling_bound: V0 must be finite and >= 0");
  const double tc = p.tc();
  SettlingBound out;
  out.V0 = V0;
  if (V0 == 0.0) {
    out.tau_bound = 0.0;
    out.margin = tc;
    out.reaches_zero = true;
    return out;
  }
  const double m = p.m();
  const double decay = p.q() * (1.0 - p.alpha());
  auto never = [&] {
    out.tau_bound = tc;
    out.margin = 0.0;
    out.reaches_zero = false;
    return out;
  };
  if (!(decay > 0.0)) return never();

  // The crossing satisfies g(r) = K with g(r) = T_c^(m-1) I and
  // K = V0^(1-alpha) / (q (1-alpha) T_c).
  const double K = std::pow(V0, 1.0 - p.alpha()) / (decay * tc);
  double log_r = 0.0;
  if (m == 1.0) {
    log_r = -K;
  } else {
    const double a = (m - 1.0) * K;
    if (a < -1.0) return never();
    log_r = a == -1.0 ? -kInf : std::log1p(a) / (1.0 - m);
  }
  out.reaches_zero = true;
  out.margin = tc * std::exp(log_r);
  out.tau_bound = -tc * std::expm1(log_r);
  return out;
}

double exact_solution_scalar(const BarrierParams& p, double x0, double t) {
  if (!std::isfinite(x0)) throw InputError("exact_solution_scalar: x0 must be finite");
  check_time(p, t);
  if (t == 0.0 || x0 == 0.0) return x0;

  const double lr = log_remaining(p, t);
  if (p.q() == 0.0) return x0 * power_of_remaining(lr, p.beta());

  const double m = p.m();
  const double one_minus_alpha = 1.0 - p.alpha();
  const double z0 = std::pow(std::abs(x0), one_minus_alpha);
  // (T_c - t)^m I(t) = (T_c - t) * h(r)
  const double h = m == 1.0 ? -lr : -std::expm1((m - 1.0) * lr) / (m - 1.0);
  const double z = z0 * power_of_remaining(lr, m) - p.q() * one_minus_alpha * (p.tc() - t) * h;
  if (!(z > 0.0)) return 0.0;
  return sgn(x0) * std::pow(z, 1.0 / one_minus_alpha);
}

double power_law_solution(double q, double alpha, double x0, double t) {
  if (t == 0.0 || x0 == 0.0) return x0;
  const double z = std::pow(std::abs(x0), 1.0 - alpha) - q * (1.0 - alpha) * t;
  if (!(z > 0.0)) return 0.0;
  return sgn(x0) * std::pow(z, 1.0 / (1.0 - alpha));
}

double autonomous_settling_quadrature(const AutonomousLaw& law, double V0) {
  if (!std::isfinite(V0) || V0 < 0.0) throw InputError("settling integral: V0 must be finite and >= 0");
  if (V0 == 0.0) return 0.0;

  // V = u^2 moves the integrable singularity of 1/phi at V = 0 into a milder one in u.
  // Nodes so close to u = 0 that u^2 underflows carry no weight.
  auto integrand = [&law](double u) {
    const double V = u * u;
    return V < std::numeric_limits<double>::min() ? 0.0 : 2.0 * u / law.phi(V);
  };
  boost::math::quadrature::tanh_sinh<double> quad;
  double error = 0.0;
  double l1 = 0.0;
  double value = 0.0;
  try {
    value = quad.integrate(integrand, 0.0, std::sqrt(V0), 1e-10, &error, &l1);
  } catch (const std::exception& e) {
    throw QuadratureError(std::string("settling integral may diverge: ") + e.what());
  }
  if (!std::isfinite(value) || !(error <= 1e-8 * std::abs(value))) {
    throw QuadratureError("settling integral may diverge: quadrature did not converge");
  }
  return value;
}

double autonomous_settling_integral(const AutonomousLaw& law, double V0) {
  if (!std::isfinite(V0) || V0 < 0.0) throw InputError("settling integral: V0 must be finite and >= 0");
  if (V0 == 0.0) return 0.0;
  if (law.settling) return law.settling(V0);
  return autonomous_settling_quadrature(law, V0);
}

}  // namespace tbarrier
