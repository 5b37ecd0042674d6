#include "tbarrier/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <thread>

#include "tbarrier/analytic.hpp"
#include "tbarrier/certify.hpp"
#include "tbarrier/integrate.hpp"
#include "tbarrier/systems.hpp"

namespace tbarrier {

const char* to_string(Law law) noexcept {
  switch (law) {
    case Law::TimeBarrier:
      return "time_barrier";
    case Law::AutonomousPowerLaw:
      return "power_law";
  }
  return "unknown";
}

std::optional<Law> parse_law(const std::string& name) {
  if (name == "time_barrier") return Law::TimeBarrier;
  if (name == "power_law") return Law::AutonomousPowerLaw;
  return std::nullopt;
}

void SweepConfig::validate() const {
  const std::pair<const char*, const std::vector<double>*> grids[] = {
      {"tc", &tc}, {"beta", &beta}, {"q", &q}, {"alpha", &alpha}};
  for (const auto& [name, grid] : grids) {
    if (grid->empty()) throw InputError(std::string("sweep grid '") + name + "' is empty");
    for (double v : *grid) {
      if (!std::isfinite(v)) throw InputError(std::string("sweep grid '") + name + "' has a non-finite value");
    }
  }
  if (x0_decade_min > x0_decade_max) throw InputError("sweep: x0 decade range is reversed");
}

std::size_t SweepConfig::row_count() const {
  return tc.size() * beta.size() * q.size() * alpha.size() *
         static_cast<std::size_t>(x0_decade_max - x0_decade_min + 1);
}

bool SweepRow::failed() const noexcept {
  if (status != "ok") return true;
  for (const auto& flag : {deadline_pass, certificate_pass, bound_pass, oracle_pass}) {
    if (flag && !*flag) return true;
  }
  return false;
}

namespace {

struct RowTask {
  BarrierParams p;
  double x0;
  std::size_t index;
  std::size_t tuple;
};

void evaluate_row(const SweepConfig& cfg, const NumericPolicy& policy, const RowTask& task, SweepRow& row) {
  const BarrierParams& p = task.p;
  row.index = task.index;
  row.tc = p.tc();
  row.beta = p.beta();
  row.q = p.q();
  row.alpha = p.alpha();
  row.m = p.m();
  row.x0 = task.x0;
  const ParamVerdict verdict = validate_params(p);
  row.admissible = verdict.admissible();
  row.inadmissible_reason = verdict.reason;

  const double t_end = p.tc() - policy.terminal_guard(p.tc());

  DynamicsSpec spec;
  try {
    if (cfg.law == Law::TimeBarrier) {
      spec = make_time_barrier_scalar(p, policy);
      const SettlingBound bound = settling_bound(p, std::abs(task.x0));
      row.tau_bound = bound.tau_bound;
      row.analytic_reaches_zero = bound.reaches_zero;
    } else {
      AutonomousSystem sys = make_autonomous_power_law(p.q(), p.alpha(), policy);
      spec = std::move(sys.spec);
      row.tau_bound = autonomous_settling_integral(sys.law, std::abs(task.x0));
      row.analytic_reaches_zero = row.tau_bound <= p.tc();
    }
    row.spec_ok = check_spec(spec, t_end, cfg.seed + task.tuple).ok;
  } catch (const Error& e) {
    row.status = "error";
    row.error = e.what();
    return;
  }

  Trajectory traj;
  try {
    traj = simulate(spec, task.x0, p, policy);
  } catch (const StallError& e) {
    row.status = "stall";
    row.error = e.what();
  } catch (const BlowUpError& e) {
    row.status = "blowup";
    row.error = e.what();
  } catch (const Error& e) {
    row.status = "error";
    row.error = e.what();
  }
  if (row.status != "ok") {
    if (cfg.checks.deadline) row.deadline_pass = false;
    if (cfg.checks.certificate) row.certificate_pass = false;
    if (cfg.checks.bound_tightness) row.bound_pass = false;
    if (cfg.checks.oracle_error) row.oracle_pass = false;
    return;
  }

  row.converged_at = traj.converged_at;
  row.entered_ball_at = traj.entered_ball_at;
  row.reached_zero = traj.reached_zero;
  row.terminal_norm = traj.terminal_norm;
  row.steps = traj.step_count;
  row.rejected_steps = traj.rejected_steps;

  if (cfg.checks.deadline) {
    row.deadline_pass = traj.converged_at && *traj.converged_at <= t_end;
  }
  if (cfg.checks.certificate) {
    const CertificateReport report = check_dissipation(traj, p, policy);
    row.certificate_pass = report.passed();
    row.max_residual = report.max_residual;
  }
  if (cfg.checks.bound_tightness) {
    if (row.analytic_reaches_zero) {
      if (traj.converged_at) {
        row.bound_gap = std::abs(*traj.converged_at - row.tau_bound);
        row.bound_pass = *row.bound_gap <= kBoundTightness * p.tc();
      } else {
        row.bound_pass = false;
      }
    } else {
      // No analytic crossing: the state must not reach exactly zero either.
      row.bound_pass = !traj.reached_zero;
    }
  }
  if (cfg.checks.oracle_error) {
    double worst = 0.0;
    for (const auto& s : traj.samples) {
      const double exact = cfg.law == Law::TimeBarrier ? exact_solution_scalar(p, task.x0, s.t)
                                                       : power_law_solution(p.q(), p.alpha(), task.x0, s.t);
      worst = std::max(worst, std::abs(s.x[0] - exact));
    }
    row.oracle_error = worst;
    row.oracle_pass = worst <= std::max(1e-6 * std::abs(task.x0), 10.0 * policy.eps_conv);
  }
}

SweepSummary summarize(const std::vector<SweepRow>& rows) {
  SweepSummary s;
  s.rows = rows.size();
  for (const auto& row : rows) {
    if (!row.admissible) {
      ++s.inadmissible_rows;
      if (row.reached_zero) {
        ++s.inadmissible_reaching;
      } else {
        ++s.inadmissible_not_reaching;
      }
      continue;
    }
    ++s.admissible_rows;
    if (row.status != "ok") ++s.numeric_failures;
    if (row.deadline_pass && !*row.deadline_pass) ++s.deadline_failures;
    if (row.certificate_pass && !*row.certificate_pass) ++s.certificate_failures;
    if (row.bound_pass && !*row.bound_pass) ++s.bound_failures;
    if (row.oracle_pass && !*row.oracle_pass) ++s.oracle_failures;
    if (row.bound_gap && (!s.worst_bound_row || *row.bound_gap > s.worst_bound_gap)) {
      s.worst_bound_row = row.index;
      s.worst_bound_gap = *row.bound_gap;
    }
    if (row.oracle_error && (!s.worst_oracle_row || *row.oracle_error > s.worst_oracle_error)) {
      s.worst_oracle_row = row.index;
      s.worst_oracle_error = *row.oracle_error;
    }
  }
  return s;
}

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string num(const std::optional<double>& v) { return v ? num(*v) : "na"; }

std::string flag(bool v) { return v ? "true" : "false"; }

std::string flag(const std::optional<bool>& v) { return v ? flag(*v) : "na"; }

// Commas and newlines would break the row format.
std::string field(std::string s) {
  std::replace(s.begin(), s.end(), ',', ';');
  std::replace(s.begin(), s.end(), '\n', ' ');
  return s;
}

}  // namespace

SweepResult run_sweep(const SweepConfig& cfg, const NumericPolicy& policy) {
  cfg.validate();
  std::vector<RowTask> tasks;
  tasks.reserve(cfg.row_count());
  for (double tc : cfg.tc) {
    for (double beta : cfg.beta) {
      for (double q : cfg.q) {
        for (double alpha : cfg.alpha) {
          const std::size_t tuple = tasks.size() / static_cast<std::size_t>(cfg.x0_decade_max - cfg.x0_decade_min + 1);
          for (int k = cfg.x0_decade_min; k <= cfg.x0_decade_max; ++k) {
            tasks.push_back(RowTask{BarrierParams(tc, beta, q, alpha), std::pow(10.0, k), tasks.size(), tuple});
          }
        }
      }
    }
  }

  SweepResult result;
  result.rows.resize(tasks.size());
  unsigned workers = cfg.threads ? cfg.threads : std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, std::max<std::size_t>(1, tasks.size())));

  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < tasks.size(); i = next++) {
      evaluate_row(cfg, policy, tasks[i], result.rows[i]);
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  result.summary = summarize(result.rows);
  return result;
}

void write_sweep_csv(std::ostream& os, const SweepResult& result) {
  os << "index,T_c,beta,q,alpha,m,x0,admissible,spec_ok,status,converged_at,entered_ball_at,reached_zero,"
        "terminal_norm,tau_bound,analytic_reaches_zero,deadline_pass,certificate_pass,max_residual,bound_pass,"
        "bound_gap,oracle_pass,oracle_error,steps,rejected_steps,note\n";
  for (const auto& r : result.rows) {
    os << r.index << ',' << num(r.tc) << ',' << num(r.beta) << ',' << num(r.q) << ',' << num(r.alpha) << ','
       << num(r.m) << ',' << num(r.x0) << ',' << flag(r.admissible) << ',' << flag(r.spec_ok) << ','
       << r.status << ',' << num(r.converged_at) << ',' << num(r.entered_ball_at) << ','
       << flag(r.reached_zero) << ',' << num(r.terminal_norm) << ',' << num(r.tau_bound) << ','
       << flag(r.analytic_reaches_zero) << ',' << flag(r.deadline_pass) << ',' << flag(r.certificate_pass)
       << ',' << num(r.max_residual) << ',' << flag(r.bound_pass) << ',' << num(r.bound_gap) << ','
       << flag(r.oracle_pass) << ',' << num(r.oracle_error) << ',' << r.steps << ',' << r.rejected_steps << ','
       << field(r.error.empty() ? r.inadmissible_reason : r.error) << '\n';
  }
}

void write_sweep_summary(std::ostream& os, const SweepSummary& s) {
  os << "rows=" << s.rows << '\n'
     << "admissible_rows=" << s.admissible_rows << '\n'
     << "inadmissible_rows=" << s.inadmissible_rows << '\n'
     << "inadmissible_reaching=" << s.inadmissible_reaching << '\n'
     << "inadmissible_not_reaching=" << s.inadmissible_not_reaching << '\n'
     << "numeric_failures=" << s.numeric_failures << '\n'
     << "deadline_failures=" << s.deadline_failures << '\n'
     << "certificate_failures=" << s.certificate_failures << '\n'
     << "bound_failures=" << s.bound_failures << '\n'
     << "oracle_failures=" << s.oracle_failures << '\n'
     << "worst_bound_row=" << (s.worst_bound_row ? std::to_string(*s.worst_bound_row) : "na") << '\n'
     << "worst_bound_gap=" << num(s.worst_bound_gap) << '\n'
     << "worst_oracle_row=" << (s.worst_oracle_row ? std::to_string(*s.worst_oracle_row) : "na") << '\n'
     << "worst_oracle_error=" << num(s.worst_oracle_error) << '\n';
}

double minimal_admissible_beta(double alpha) {
  double beta = 1.0 / (1.0 - alpha);
  while (BarrierParams(1.0, beta, 1.0, alpha).m() < 1.0) {
    beta = std::nextafter(beta, std::numeric_limits<double>::infinity());
  }
  return beta;
}

std::vector<SeparationRow> separation_table(double tc, double q, double alpha, std::span<const double> x0_list,
                                            const NumericPolicy& policy) {
  const BarrierParams p(tc, minimal_admissible_beta(alpha), q, alpha);
  const ParamVerdict verdict = validate_params(p);
  if (!verdict.admissible()) throw InputError("separation_table: " + verdict.reason);
  const DynamicsSpec barrier = make_time_barrier_scalar(p, policy);
  const AutonomousSystem comparator = make_autonomous_power_law(q, alpha, policy);
  const double t_end = tc - policy.terminal_guard(tc);

  std::vector<SeparationRow> rows;
  rows.reserve(x0_list.size());
  for (double x0 : x0_list) {
    if (!std::isfinite(x0)) throw InputError("separation_table: x0 must be finite");
    SeparationRow row;
    row.x0 = x0;
    const Trajectory traj = simulate(barrier, x0, p, policy);
    row.barrier_settling = traj.converged_at;
    row.barrier_within_deadline = traj.converged_at && *traj.converged_at <= t_end;
    row.autonomous_settling = autonomous_settling_integral(comparator.law, std::abs(x0));
    row.autonomous_exceeds_deadline = row.autonomous_settling > tc;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace tbarrier
