// Reference computations that share no code with the library: fixed-step RK4,
// composite Simpson and plain bisection.
#pragma once

#include <cmath>
#include <functional>

namespace oracle {

// Classical RK4 for a scalar ODE y' = f(t, y) over [t0, t1] with n steps.
inline double rk4(const std::function<double(double, double)>& f, double y, double t0, double t1, int n) {
  const double h = (t1 - t0) / n;
  double t = t0;
  for (int i = 0; i < n; ++i) {
    const double k1 = f(t, y);
    const double k2 = f(t + h / 2, y + h / 2 * k1);
    const double k3 = f(t + h / 2, y + h / 2 * k2);
    const double k4 = f(t + h, y + h * k3);
    y += h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
    t += h;
  }
  return y;
}

// The scalar law integrated directly in x. Only valid while x stays away from 0.
inline double barrier_rk4(double tc, double beta, double q, double alpha, double x0, double t, int n = 20000) {
  auto f = [=](double s, double x) {
    const double sg = x > 0 ? 1.0 : (x < 0 ? -1.0 : 0.0);
    return -beta * x / (tc - s) - q * std::pow(std::fabs(x), alpha) * sg;
  };
  return rk4(f, x0, 0.0, t, n);
}

// z = |x|^(1-alpha) obeys a linear ODE that may be continued through zero.
// Integrated in s = ln(T_c / (T_c - t)), where the barrier term is constant.
inline double z_rk4(double tc, double beta, double q, double alpha, double z0, double t, int n = 20000) {
  auto f = [=](double s, double z) { return -(1 - alpha) * (beta * z + q * tc * std::exp(-s)); };
  return rk4(f, z0, 0.0, std::log(tc / (tc - t)), n);
}

inline double bisect(const std::function<double(double)>& g, double lo, double hi, int iters = 200) {
  double glo = g(lo);
  for (int i = 0; i < iters && hi - lo > 0; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double gm = g(mid);
    if ((gm > 0) == (glo > 0)) {
      lo = mid;
      glo = gm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

// First zero of z for the scalar law: bisection on the RK4 z-trajectory.
inline double crossing_time(double tc, double beta, double q, double alpha, double x0, double hi_frac = 0.999) {
  const double z0 = std::pow(std::fabs(x0), 1 - alpha);
  return bisect([=](double t) { return z_rk4(tc, beta, q, alpha, z0, t, 4000); }, 0.0, hi_frac * tc, 80);
}

inline double simpson(const std::function<double(double)>& f, double a, double b, int n = 20000) {
  if (n % 2) ++n;
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4 : 2);
  return s * h / 3;
}

}  // namespace oracle
