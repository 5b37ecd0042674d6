#include "tbarrier/core.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>

namespace tbarrier {

namespace {

std::string format_g(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

ParamVerdict reject(ParamStatus status, std::string reason, double m) {
  return ParamVerdict{status, std::move(reason), m};
}

}  // namespace

ParamVerdict validate_params(const BarrierParams& p) {
  const double m = p.m();
  const std::pair<const char*, double> fields[] = {
      {"T_c", p.tc()}, {"beta", p.beta()}, {"q", p.q()}, {"alpha", p.alpha()}};
  for (const auto& [name, value] : fields) {
    if (!std::isfinite(value)) {
      return reject(ParamStatus::NonFinite, std::string("non-finite parameter: ") + name, m);
    }
  }
  if (!(p.tc() > 0.0)) return reject(ParamStatus::Inadmissible, "T_c > 0", m);
  if (!(p.q() > 0.0)) return reject(ParamStatus::Inadmissible, "q > 0", m);
  if (!(p.alpha() > 0.0 && p.alpha() < 1.0)) {
    return reject(ParamStatus::Inadmissible, "alpha in (0,1)", m);
  }
  if (!(p.beta() > 0.0)) return reject(ParamStatus::Inadmissible, "beta > 0", m);
  if (!(m >= 1.0)) {
    return reject(ParamStatus::Inadmissible, "beta*(1-alpha)=" + format_g(m) + " < 1", m);
  }
  return ParamVerdict{ParamStatus::Admissible, {}, m};
}

double NumericPolicy::terminal_guard(double tc) const {
  if (delta_end) return *delta_end;
  return std::max(1e-9 * tc, 1e-12);
}

void NumericPolicy::validate(double tc) const {
  const std::pair<const char*, double> positive[] = {{"eps_conv", eps_conv},
                                                     {"rel_tol", rel_tol},
                                                     {"abs_tol", abs_tol},
                                                     {"residual_tol", residual_tol},
                                                     {"delta_end", terminal_guard(tc)}};
  for (const auto& [name, value] : positive) {
    if (!(std::isfinite(value) && value > 0.0)) {
      throw InputError(std::string("policy: ") + name + " must be finite and > 0");
    }
  }
  if (!(std::isfinite(sign_eps) && sign_eps >= 0.0)) {
    throw InputError("policy: sign_eps must be finite and >= 0");
  }
  if (!(terminal_guard(tc) < tc)) throw InputError("policy: delta_end must be < T_c");
}

State DynamicsSpec::eval(std::span<const double> x, double t) const {
  if (x.size() != dim) throw InputError("state dimension mismatch");
  State out(dim, 0.0);
  rhs(x, t, out);
  return out;
}

SpecCheck check_spec(const DynamicsSpec& spec, double t_max, std::uint64_t seed) {
  SpecCheck result;
  const double end = std::min(spec.horizon, t_max);
  if (!(end > 0.0) || !std::isfinite(end)) {
    result.ok = false;
    result.message = "time range for sampling is empty or unbounded";
    return result;
  }
  std::vector<double> times;
  for (int k = 0; k < 16; ++k) times.push_back(end * k / 16.0);

  const State origin(spec.dim, 0.0);
  State dx(spec.dim);
  auto fail = [&](std::string msg) {
    result.ok = false;
    result.message = std::move(msg);
    return result;
  };

  for (double t : times) {
    spec.rhs(origin, t, dx);
    ++result.points_checked;
    if (std::any_of(dx.begin(), dx.end(), [](double v) { return v != 0.0; })) {
      std::ostringstream os;
      os << "rhs(0, " << t << ") != 0";
      return fail(os.str());
    }
    if (spec.lyapunov && spec.lyapunov->value(origin, t) != 0.0) {
      std::ostringstream os;
      os << "V(0, " << t << ") != 0";
      return fail(os.str());
    }
  }
  if (!spec.lyapunov) return result;

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  State x(spec.dim);
  for (int decade = -6; decade < 3; ++decade) {
    for (int i = 0; i < 64; ++i) {
      double norm2 = 0.0;
      for (auto& xi : x) {
        xi = gauss(rng);
        norm2 += xi * xi;
      }
      const double radius = std::pow(10.0, decade + unit(rng));
      const double scale = norm2 > 0.0 ? radius / std::sqrt(norm2) : radius;
      for (auto& xi : x) xi *= scale;
      for (double t : times) {
        ++result.points_checked;
        const double v = spec.lyapunov->value(x, t);
        if (!(v > 0.0)) {
          std::ostringstream os;
          os << "V not positive at radius " << radius << ", t=" << t;
          return fail(os.str());
        }
      }
    }
  }
  return result;
}

double sgn(double x) noexcept { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

double max_norm(std::span<const double> x) noexcept {
  double n = 0.0;
  for (double v : x) n = std::max(n, std::abs(v));
  return n;
}

}  // namespace tbarrier
