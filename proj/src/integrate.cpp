#include "tbarrier/integrate.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>

#include "tbarrier/certify.hpp"

namespace tbarrier {

namespace {

// Dormand-Prince 5(4) with Hairer's dense output coefficients.
constexpr double c2 = 1.0 / 5.0, c3 = 3.0 / 10.0, c4 = 4.0 / 5.0, c5 = 8.0 / 9.0;
constexpr double a21 = 1.0 / 5.0;
constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0,
                 a54 = -212.0 / 729.0;
constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0, a64 = 49.0 / 176.0,
                 a65 = -5103.0 / 18656.0;
constexpr double a71 = 35.0 / 384.0, a73 = 500.0 / 1113.0, a74 = 125.0 / 192.0, a75 = -2187.0 / 6784.0,
                 a76 = 11.0 / 84.0;
constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0, e5 = -17253.0 / 339200.0,
                 e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;
constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                 d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                 d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

// PI step control (Hairer's dopri5 defaults).
constexpr double kSafety = 0.9;
constexpr double kBeta = 0.04;
constexpr double kExpo = 0.2 - kBeta * 0.75;
// Step growth is bounded by kFacMax, shrinkage by kFacMin.
constexpr double kFacMax = 10.0;
constexpr double kFacMin = 0.2;
constexpr double kBarrierFraction = 0.5;
// Error floor inside the ball, relative to the block norm.
constexpr double kTerminalFloor = 1e-3;

double ulp_floor(double t) {
  const double next = std::nextafter(std::abs(t), std::numeric_limits<double>::infinity());
  return 16.0 * (next - std::abs(t)) + std::numeric_limits<double>::min();
}

// Continuous extension evaluated componentwise.
double interpolate(const DenseSegment& seg, std::size_t dim, std::size_t i, double t) {
  const double theta = (t - seg.t0) / seg.h;
  const double theta1 = 1.0 - theta;
  const double* rc = seg.coeffs.data();
  return rc[i] + theta * (rc[dim + i] +
                          theta1 * (rc[2 * dim + i] + theta * (rc[3 * dim + i] + theta1 * rc[4 * dim + i])));
}

template <class F>
double bisect(F&& positive, double lo, double hi) {
  // positive(lo) is true, positive(hi) is false; returns the boundary.
  for (int it = 0; it < 200 && hi - lo > ulp_floor(hi) / 8.0; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (positive(mid)) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return hi;
}

struct Block {
  std::size_t begin = 0;
  std::size_t end = 0;
  bool captured = false;
  bool in_ball = false;
  std::optional<double> capture;
  std::optional<double> ball_entry;

  std::size_t size() const { return end - begin; }
};

Block make_block(std::size_t begin, std::size_t end) {
  Block b;
  b.begin = begin;
  b.end = end;
  return b;
}

class Stepper {
 public:
  Stepper(const DynamicsSpec& spec, const BarrierParams& p, const NumericPolicy& policy, Trajectory& out)
      : spec_(spec), p_(p), policy_(policy), out_(out), n_(spec.dim) {
    if (spec.decoupled) {
      for (std::size_t i = 0; i < n_; ++i) blocks_.push_back(make_block(i, i + 1));
    } else {
      blocks_.push_back(make_block(0, n_));
    }
    for (auto& k : k_) k.assign(n_, 0.0);
    stage_.assign(n_, 0.0);
    y_.assign(n_, 0.0);
    y1_.assign(n_, 0.0);
    err_.assign(n_, 0.0);
  }

  void run(std::span<const double> x0) {
    t_end_ = p_.tc() - policy_.terminal_guard(p_.tc());
    out_.t_end = t_end_;
    std::copy(x0.begin(), x0.end(), y_.begin());
    double t = 0.0;

    for (auto& b : blocks_) {
      const double n = block_norm(b, y_);
      if (n == 0.0) capture(b, 0.0);
      if (n <= policy_.eps_conv) {
        b.in_ball = true;
        b.ball_entry = 0.0;
      }
    }
    if (all_captured()) return finish(t);

    rhs(t, y_, k_[0]);
    double h = initial_step(t);
    double err_old = 1e-4;

    while (t < t_end_) {
      const double remaining = t_end_ - t;
      if (remaining <= ulp_floor(t)) break;
      h = std::min(h, kBarrierFraction * (p_.tc() - t));
      if (h >= remaining || remaining - h < ulp_floor(t_end_)) h = remaining;

      if (h < ulp_floor(t)) {
        if (!capture_ball_blocks(t)) {
          std::ostringstream os;
          os << "stall: step size underflow at t=" << t;
          throw StallError(os.str(), y_, t);
        }
        if (all_captured()) return finish(t);
        rhs(t, y_, k_[0]);
        h = std::max(h, 1e3 * ulp_floor(t));
        continue;
      }
      if (out_.step_count + out_.rejected_steps >= kMaxSteps) {
        throw StallError("stall: step limit exceeded", y_, t);
      }

      step(t, h);
      const double err = error_norm();
      if (!(err <= 1.0)) {
        ++out_.rejected_steps;
        const double fac11 = std::isfinite(err) ? std::pow(err, kExpo) : 1.0 / kFacMin;
        h /= std::min(1.0 / kFacMin, fac11 / kSafety);
        continue;
      }

      const double t1 = t + h;
      out_.segments.push_back(dense_segment(t, h));
      ++out_.step_count;
      const bool captured_now = detect_events(t, t1);
      t = t1;
      std::swap(y_, y1_);
      if (all_captured()) return finish(t);
      if (captured_now) {
        rhs(t, y_, k_[0]);
      } else {
        std::swap(k_[0], k_[6]);
      }

      const double fac11 = std::pow(std::max(err, 1e-300), kExpo);
      double fac = fac11 / std::pow(err_old, kBeta);
      fac = std::clamp(fac / kSafety, 1.0 / kFacMax, 1.0 / kFacMin);
      h /= fac;
      err_old = std::max(err, 1e-4);
    }
    finish(t);
  }

 private:
  void rhs(double t, std::span<const double> y, std::span<double> dy) {
    spec_.rhs(y, t, dy);
    ++out_.rhs_evals;
    for (const auto& b : blocks_) {
      if (b.captured) std::fill(dy.begin() + b.begin, dy.begin() + b.end, 0.0);
    }
    for (double v : dy) {
      if (!std::isfinite(v)) {
        std::ostringstream os;
        os << "dynamics blow-up: non-finite rhs at t=" << t;
        throw BlowUpError(os.str(), State(y.begin(), y.end()), t);
      }
    }
  }

  double block_norm(const Block& b, std::span<const double> y) const {
    return max_norm(y.subspan(b.begin, b.size()));
  }

  bool all_captured() const {
    return std::all_of(blocks_.begin(), blocks_.end(), [](const Block& b) { return b.captured; });
  }

  void capture(Block& b, double t) {
    b.captured = true;
    b.capture = t;
    if (!b.ball_entry) b.ball_entry = t;
    b.in_ball = true;
    for (std::size_t i = b.begin; i < b.end; ++i) {
      out_.capture_times[i] = t;
    }
  }

  bool capture_ball_blocks(double t) {
    bool any = false;
    for (auto& b : blocks_) {
      if (b.captured || !b.in_ball) continue;
      capture(b, t);
      std::fill(y_.begin() + b.begin, y_.begin() + b.end, 0.0);
      any = true;
    }
    return any;
  }

  double scale(const Block& b, std::size_t i, double block_norm_now) const {
    const double mag = std::max(std::abs(y_[i]), std::abs(y1_[i]));
    if (b.in_ball) {
      return policy_.rel_tol * std::max(mag, kTerminalFloor * block_norm_now) +
             std::numeric_limits<double>::min();
    }
    return policy_.abs_tol + policy_.rel_tol * mag;
  }

  double error_norm() const {
    double sum = 0.0;
    std::size_t count = 0;
    for (const auto& b : blocks_) {
      if (b.captured) continue;
      const double bn = block_norm(b, y_);
      for (std::size_t i = b.begin; i < b.end; ++i) {
        const double r = err_[i] / scale(b, i, bn);
        sum += r * r;
        ++count;
      }
    }
    if (count == 0) return 0.0;
    return std::sqrt(sum / static_cast<double>(count));
  }

  void combine(std::span<double> dst, double h, std::initializer_list<std::pair<double, int>> terms) {
    for (std::size_t i = 0; i < n_; ++i) {
      double acc = 0.0;
      for (const auto& [coef, stage] : terms) acc += coef * k_[stage][i];
      dst[i] = y_[i] + h * acc;
    }
  }

  void step(double t, double h) {
    combine(stage_, h, {{a21, 0}});
    rhs(t + c2 * h, stage_, k_[1]);
    combine(stage_, h, {{a31, 0}, {a32, 1}});
    rhs(t + c3 * h, stage_, k_[2]);
    combine(stage_, h, {{a41, 0}, {a42, 1}, {a43, 2}});
    rhs(t + c4 * h, stage_, k_[3]);
    combine(stage_, h, {{a51, 0}, {a52, 1}, {a53, 2}, {a54, 3}});
    rhs(t + c5 * h, stage_, k_[4]);
    combine(stage_, h, {{a61, 0}, {a62, 1}, {a63, 2}, {a64, 3}, {a65, 4}});
    rhs(t + h, stage_, k_[5]);
    combine(y1_, h, {{a71, 0}, {a73, 2}, {a74, 3}, {a75, 4}, {a76, 5}});
    rhs(t + h, y1_, k_[6]);
    for (std::size_t i = 0; i < n_; ++i) {
      err_[i] = h * (e1 * k_[0][i] + e3 * k_[2][i] + e4 * k_[3][i] + e5 * k_[4][i] + e6 * k_[5][i] +
                     e7 * k_[6][i]);
    }
  }

  DenseSegment dense_segment(double t, double h) const {
    DenseSegment seg;
    seg.t0 = t;
    seg.h = h;
    seg.coeffs.resize(5 * n_);
    for (std::size_t i = 0; i < n_; ++i) {
      const double ydiff = y1_[i] - y_[i];
      const double bspl = h * k_[0][i] - ydiff;
      seg.coeffs[i] = y_[i];
      seg.coeffs[n_ + i] = ydiff;
      seg.coeffs[2 * n_ + i] = bspl;
      seg.coeffs[3 * n_ + i] = ydiff - h * k_[6][i] - bspl;
      seg.coeffs[4 * n_ + i] = h * (d1 * k_[0][i] + d3 * k_[2][i] + d4 * k_[3][i] + d5 * k_[4][i] +
                                    d6 * k_[5][i] + d7 * k_[6][i]);
    }
    return seg;
  }

  double interpolated_block_norm(const DenseSegment& seg, const Block& b, double t) const {
    double n = 0.0;
    for (std::size_t i = b.begin; i < b.end; ++i) n = std::max(n, std::abs(interpolate(seg, n_, i, t)));
    return n;
  }

  // Ball entry, sign-change capture and rate capture for the step [t0, t1].
  bool detect_events(double t0, double t1) {
    const DenseSegment& seg = out_.segments.back();
    const double eps = policy_.eps_conv;
    bool captured_any = false;
    for (auto& b : blocks_) {
      if (b.captured) continue;
      const double n1 = block_norm(b, y1_);

      if (b.size() == 1) {
        const std::size_t i = b.begin;
        const bool flipped = y_[i] != 0.0 && (y1_[i] == 0.0 || std::signbit(y_[i]) != std::signbit(y1_[i]));
        if (flipped) {
          const double s0 = y_[i];
          const double root =
              bisect([&](double t) { return interpolate(seg, n_, i, t) * s0 > 0.0; }, t0, t1);
          if (!b.in_ball) {
            b.ball_entry = bisect(
                [&](double t) { return std::abs(interpolate(seg, n_, i, t)) > eps; }, t0, root);
          }
          capture(b, root);
          y1_[i] = 0.0;
          captured_any = true;
          continue;
        }
      }

      if (!b.in_ball && n1 <= eps) {
        b.in_ball = true;
        b.ball_entry =
            bisect([&](double t) { return interpolated_block_norm(seg, b, t) > eps; }, t0, t1);
      } else if (b.in_ball && n1 > eps) {
        b.in_ball = false;
        b.ball_entry.reset();
      }
      if (!b.in_ball) continue;

      std::size_t lead = b.begin;
      for (std::size_t i = b.begin; i < b.end; ++i) {
        if (std::abs(y1_[i]) > std::abs(y1_[lead])) lead = i;
      }
      const double rate = sgn(y1_[lead]) * k_[6][lead];
      if (n1 == 0.0 || (rate < 0.0 && n1 < -rate * kCaptureScale * p_.tc())) {
        capture(b, t1);
        std::fill(y1_.begin() + b.begin, y1_.begin() + b.end, 0.0);
        captured_any = true;
      }
    }
    return captured_any;
  }

  double initial_step(double t) {
    // Hairer's starting step heuristic.
    double dnf = 0.0, dny = 0.0;
    for (const auto& b : blocks_) {
      if (b.captured) continue;
      const double bn = block_norm(b, y_);
      for (std::size_t i = b.begin; i < b.end; ++i) {
        y1_[i] = y_[i];
        const double sk = scale(b, i, bn);
        dnf += (k_[0][i] / sk) * (k_[0][i] / sk);
        dny += (y_[i] / sk) * (y_[i] / sk);
      }
    }
    const double hmax = kBarrierFraction * (p_.tc() - t);
    double h = (dnf <= 1e-10 || dny <= 1e-10) ? 1e-6 : 0.01 * std::sqrt(dny / dnf);
    h = std::min(h, hmax);
    for (std::size_t i = 0; i < n_; ++i) stage_[i] = y_[i] + h * k_[0][i];
    rhs(t + h, stage_, k_[1]);
    double der2 = 0.0;
    for (const auto& b : blocks_) {
      if (b.captured) continue;
      const double bn = block_norm(b, y_);
      for (std::size_t i = b.begin; i < b.end; ++i) {
        const double d = (k_[1][i] - k_[0][i]) / scale(b, i, bn);
        der2 += d * d;
      }
    }
    der2 = std::sqrt(der2) / h;
    const double der12 = std::max(der2, std::sqrt(dnf));
    const double h1 = der12 <= 1e-15 ? std::max(1e-6, h * 1e-3) : std::pow(0.01 / der12, 0.2);
    return std::min({100.0 * h, h1, hmax});
  }

  void finish(double t_last) {
    Trajectory& tr = out_;
    tr.terminal_norm = max_norm(y_);
    std::vector<double> events;
    std::optional<double> entry = 0.0;
    bool ball = true;
    double capture_max = 0.0;
    for (const auto& b : blocks_) {
      if (b.capture) {
        events.push_back(*b.capture);
        capture_max = std::max(capture_max, *b.capture);
      }
      if (b.ball_entry) events.push_back(*b.ball_entry);
      if (!b.captured && !b.in_ball) ball = false;
      if (b.ball_entry && entry) {
        entry = std::max(*entry, *b.ball_entry);
      } else {
        entry.reset();
      }
    }
    tr.reached_zero = all_captured();
    if (tr.reached_zero) {
      tr.converged_at = capture_max;
    } else if (ball) {
      tr.converged_at = std::max(t_last, t_end_);
    }
    tr.entered_ball_at = ball ? entry : std::nullopt;

    std::erase_if(events, [&](double e) { return e > t_end_; });
    const auto grid = sample_grid(p_.tc(), t_end_, events);
    tr.samples.reserve(grid.size());
    for (double t : grid) {
      TrajectorySample s;
      s.t = t;
      s.x = tr.state_at(t);
      if (spec_.lyapunov) {
        s.V = spec_.lyapunov->value(s.x, t);
        s.W = w_transform(*s.V, t, p_);
        if (spec_.lyapunov->rate) s.Vdot = spec_.lyapunov->rate(s.x, t);
      }
      tr.samples.push_back(std::move(s));
    }
  }

  const DynamicsSpec& spec_;
  const BarrierParams& p_;
  const NumericPolicy& policy_;
  Trajectory& out_;
  std::size_t n_;
  double t_end_ = 0.0;
  std::vector<Block> blocks_;
  std::array<State, 7> k_;
  State stage_, y_, y1_, err_;
};

}  // namespace

State Trajectory::state_at(double t) const {
  if (!(t >= 0.0 && t <= t_end)) {
    std::ostringstream os;
    os << "time " << t << " outside [0, " << t_end << "]";
    throw InputError(os.str());
  }
  State x(dim, 0.0);
  auto it = std::upper_bound(segments.begin(), segments.end(), t,
                             [](double v, const DenseSegment& s) { return v < s.t0; });
  if (it != segments.begin()) {
    const DenseSegment& seg = *std::prev(it);
    const bool past_end = t > seg.t0 + seg.h;
    for (std::size_t i = 0; i < dim; ++i) {
      if (capture_times[i] && t >= *capture_times[i]) continue;
      if (past_end) {
        throw InputError("time lies beyond the integrated range");
      }
      x[i] = interpolate(seg, dim, i, t);
    }
  }
  for (std::size_t i = 0; i < dim; ++i) {
    if (capture_times[i] && t >= *capture_times[i]) x[i] = 0.0;
  }
  return x;
}

std::vector<double> sample_grid(double tc, double t_end, std::span<const double> events) {
  std::vector<double> grid;
  grid.reserve(kUniformSamples + 160 + events.size());
  for (std::size_t i = 0; i < kUniformSamples; ++i) {
    grid.push_back(t_end * static_cast<double>(i) / static_cast<double>(kUniformSamples - 1));
  }
  grid.back() = t_end;
  // 16 points per decade of remaining time, from 0.1 T_c down to the guard.
  for (int j = 16;; ++j) {
    const double t = tc - tc * std::pow(10.0, -j / 16.0);
    if (!(t < t_end)) break;
    grid.push_back(t);
  }
  for (double e : events) {
    if (e >= 0.0 && e <= t_end) grid.push_back(e);
  }
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  return grid;
}

Trajectory simulate(const DynamicsSpec& spec, std::span<const double> x0, const BarrierParams& p,
                    const NumericPolicy& policy) {
  if (x0.size() != spec.dim) throw InputError("initial state dimension mismatch");
  for (double v : x0) {
    if (!std::isfinite(v)) throw InputError("initial state must be finite");
  }
  if (!(std::isfinite(p.tc()) && p.tc() > 0.0)) throw InputError("T_c must be finite and > 0");
  policy.validate(p.tc());
  if (spec.horizon < p.tc()) throw InputError("spec domain does not cover [0, T_c)");

  Trajectory tr;
  tr.dim = spec.dim;
  tr.params = p;
  tr.capture_times.assign(spec.dim, std::nullopt);
  if (spec.lyapunov) tr.lyapunov_value = spec.lyapunov->value;
  Stepper(spec, p, policy, tr).run(x0);
  return tr;
}

Trajectory simulate(const DynamicsSpec& spec, double x0, const BarrierParams& p, const NumericPolicy& policy) {
  const double x[1] = {x0};
  return simulate(spec, std::span<const double>(x, 1), p, policy);
}

std::vector<State> resample(const Trajectory& traj, std::span<const double> times) {
  const double last = traj.samples.empty() ? 0.0 : traj.samples.back().t;
  std::vector<State> out;
  out.reserve(times.size());
  double prev = -std::numeric_limits<double>::infinity();
  for (double t : times) {
    if (!(t >= 0.0 && t <= last)) {
      std::ostringstream os;
      os << "resample: time " << t << " outside [0, " << last << "]";
      throw InputError(os.str());
    }
    if (t < prev) throw InputError("resample: times must be sorted");
    prev = t;
    out.push_back(traj.state_at(t));
  }
  return out;
}

}  // namespace tbarrier
