#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "config.hpp"
#include "csv_io.hpp"
#include "tbarrier/analytic.hpp"
#include "tbarrier/certify.hpp"
#include "tbarrier/integrate.hpp"
#include "tbarrier/sweep.hpp"
#include "tbarrier/systems.hpp"

namespace tbarrier::cli {

namespace {

// Flag values override the configuration only when the flag was given.
class Overrides {
 public:
  void number(CLI::App* app, const std::string& name, double& storage, std::function<void(RunConfig&, double)> apply,
              const std::string& desc) {
    CLI::Option* opt = app->add_option(name, storage, desc)->capture_default_str();
    bindings_.push_back({opt, [&storage, apply](RunConfig& cfg) { apply(cfg, storage); }});
  }

  void bind(CLI::Option* opt, std::function<void(RunConfig&)> apply) { bindings_.push_back({opt, std::move(apply)}); }

  void apply(RunConfig& cfg) const {
    for (const auto& b : bindings_) {
      if (b.opt->count() > 0) b.apply(cfg);
    }
  }

 private:
  struct Binding {
    CLI::Option* opt;
    std::function<void(RunConfig&)> apply;
  };
  std::vector<Binding> bindings_;
};

struct FlagValues {
  RunConfig defaults;
  double delta_end = 0.0;
  bool allow_inadmissible = false;
  unsigned threads = 0;
  std::uint64_t seed = 1;
};

void add_param_flags(CLI::App* app, FlagValues& v, Overrides& o) {
  o.number(app, "--tc", v.defaults.tc, [](RunConfig& c, double x) { c.tc = x; }, "Deadline T_c");
  o.number(app, "--beta", v.defaults.beta, [](RunConfig& c, double x) { c.beta = x; }, "Barrier exponent beta");
  o.number(app, "--q", v.defaults.q, [](RunConfig& c, double x) { c.q = x; }, "Decay gain q");
  o.number(app, "--alpha", v.defaults.alpha, [](RunConfig& c, double x) { c.alpha = x; }, "Exponent alpha in (0,1)");
}

void add_x0_flag(CLI::App* app, FlagValues& v, Overrides& o) {
  CLI::Option* opt = app->add_option("--x0", v.defaults.x0, "Initial state, comma-separated components")
                         ->delimiter(',')
                         ->default_str("1");
  o.bind(opt, [&v](RunConfig& c) { c.x0 = v.defaults.x0; });
}

void add_policy_flags(CLI::App* app, FlagValues& v, Overrides& o) {
  NumericPolicy& p = v.defaults.policy;
  o.number(app, "--eps-conv", p.eps_conv, [](RunConfig& c, double x) { c.policy.eps_conv = x; },
           "Convergence threshold on |x|");
  o.number(app, "--rel-tol", p.rel_tol, [](RunConfig& c, double x) { c.policy.rel_tol = x; },
           "Integrator relative tolerance");
  o.number(app, "--abs-tol", p.abs_tol, [](RunConfig& c, double x) { c.policy.abs_tol = x; },
           "Integrator absolute tolerance");
  o.number(app, "--sign-eps", p.sign_eps, [](RunConfig& c, double x) { c.policy.sign_eps = x; },
           "Sign regularization width (0 = exact sign)");
  o.number(app, "--residual-tol", p.residual_tol, [](RunConfig& c, double x) { c.policy.residual_tol = x; },
           "Slack for inequality checks");
  CLI::Option* opt = app->add_option("--delta-end", v.delta_end, "Terminal guard (default max(1e-9*T_c, 1e-12))");
  o.bind(opt, [&v](RunConfig& c) { c.policy.delta_end = v.delta_end; });
}

std::string fmt(double v) { return format_double(v); }
std::string fmt(const std::optional<double>& v) { return v ? format_double(*v) : "na"; }
std::string fmt(bool v) { return v ? "true" : "false"; }

// Parameters the reference dynamics can be built from (admissibility not required).
std::optional<std::string> structural_problem(const BarrierParams& p) {
  const ParamVerdict verdict = validate_params(p);
  if (verdict.status == ParamStatus::NonFinite) return verdict.reason;
  if (!(p.tc() > 0.0)) return "T_c > 0";
  if (!(p.alpha() > 0.0 && p.alpha() < 1.0)) return "alpha in (0,1)";
  if (!(p.q() >= 0.0)) return "q >= 0";
  if (!(p.beta() >= 0.0)) return "beta >= 0";
  return std::nullopt;
}

std::optional<std::string> x0_problem(const State& x0) {
  if (x0.empty()) return "x0 must have at least one component";
  for (double v : x0) {
    if (!std::isfinite(v)) return "x0 must be finite";
  }
  return std::nullopt;
}

class Context {
 public:
  Context(std::ostream& out, std::ostream& err, bool quiet) : out_(out), err_(err), quiet_(quiet) {}

  std::ostream& text() { return quiet_ ? null_ : out_; }
  std::ostream& out() { return out_; }

  int fail(int code, const std::string& msg) {
    err_ << "error: " << msg << '\n';
    return code;
  }

 private:
  std::ostream& out_;
  std::ostream& err_;
  bool quiet_;
  std::ostream null_{nullptr};
};

DynamicsSpec reference_spec(const BarrierParams& p, const RunConfig& cfg) {
  if (cfg.x0.size() == 1) return make_time_barrier_scalar(p, cfg.policy);
  return make_time_barrier_componentwise(p, cfg.x0.size(), cfg.policy);
}

int check_inputs(Context& ctx, const RunConfig& cfg, bool allow_inadmissible) {
  const BarrierParams p = cfg.params();
  const ParamVerdict verdict = validate_params(p);
  if (!verdict.admissible()) {
    if (!allow_inadmissible) return ctx.fail(kValidation, "inadmissible parameters: " + verdict.reason);
    if (auto problem = structural_problem(p)) return ctx.fail(kValidation, "invalid parameters: " + *problem);
  }
  if (auto problem = x0_problem(cfg.x0)) return ctx.fail(kValidation, *problem);
  try {
    cfg.policy.validate(cfg.tc);
  } catch (const InputError& e) {
    return ctx.fail(kValidation, e.what());
  }
  return kSuccess;
}

bool open_output(Context& ctx, const std::optional<std::string>& path, std::ofstream& file) {
  if (!path) return true;
  file.open(*path);
  if (!file) {
    ctx.fail(kValidation, "cannot open output file '" + *path + "'");
    return false;
  }
  return true;
}

int cmd_simulate(Context& ctx, const RunConfig& cfg, bool allow_inadmissible) {
  if (int rc = check_inputs(ctx, cfg, allow_inadmissible)) return rc;
  const BarrierParams p = cfg.params();
  const DynamicsSpec spec = reference_spec(p, cfg);
  std::ofstream file;
  if (!open_output(ctx, cfg.output, file)) return kValidation;

  const Trajectory traj = simulate(spec, cfg.x0, p, cfg.policy);
  const SettlingBound bound = settling_bound(p, max_norm(cfg.x0));
  const bool pass = traj.converged_at && *traj.converged_at <= traj.t_end;
  if (file.is_open()) write_trajectory_csv(file, traj);

  ctx.text() << "system: " << spec.label << '\n'
             << "settling time " << fmt(traj.converged_at) << " against deadline " << fmt(p.tc()) << ": "
             << (pass ? "PASS" : "FAIL") << '\n';
  write_report(ctx.out(), {{"converged_at", fmt(traj.converged_at)},
                           {"tau_bound", fmt(bound.tau_bound)},
                           {"deadline_pass", fmt(pass)},
                           {"reached_zero", fmt(traj.reached_zero)},
                           {"entered_ball_at", fmt(traj.entered_ball_at)},
                           {"terminal_norm", fmt(traj.terminal_norm)},
                           {"steps", std::to_string(traj.step_count)},
                           {"rejected_steps", std::to_string(traj.rejected_steps)}});
  return pass ? kSuccess : kPropertyFailure;
}

int cmd_certify(Context& ctx, const RunConfig& cfg) {
  if (int rc = check_inputs(ctx, cfg, false)) return rc;
  if (!std::isfinite(cfg.bias)) return ctx.fail(kValidation, "bias must be finite");
  const BarrierParams p = cfg.params();
  DynamicsSpec spec = reference_spec(p, cfg);
  if (cfg.bias != 0.0) spec = with_bias(spec, cfg.bias);
  std::ofstream file;
  if (!open_output(ctx, cfg.output, file)) return kValidation;

  const Trajectory traj = simulate(spec, cfg.x0, p, cfg.policy);
  const CertificateReport report = check_dissipation(traj, p, cfg.policy);
  const ReportBlock block{{"converged_at", fmt(traj.converged_at)},
                          {"tau_bound", fmt(settling_bound(p, max_norm(cfg.x0)).tau_bound)},
                          {"checked_samples", std::to_string(report.checked_samples)},
                          {"violations", std::to_string(report.violations.size())},
                          {"max_residual", fmt(report.max_residual)},
                          {"w_monotone", fmt(report.w_monotone)},
                          {"worst_w_increase", fmt(report.worst_w_increase)},
                          {"certificate_pass", fmt(report.passed())}};

  ctx.text() << "system: " << spec.label << '\n'
             << "dissipation checked at " << report.checked_samples << " samples: " << report.violations.size()
             << " violations, max residual " << fmt(report.max_residual) << '\n'
             << "W monotone: " << (report.w_monotone ? "yes" : "no") << '\n';
  if (!report.violations.empty()) {
    const Violation& v = report.violations.front();
    ctx.text() << "first violation at t=" << fmt(v.t) << ": Vdot=" << fmt(v.lhs) << " > bound " << fmt(v.rhs_bound)
               << '\n';
  }
  write_report(ctx.out(), block);
  if (file.is_open()) write_report(file, block);
  return report.passed() ? kSuccess : kPropertyFailure;
}

int cmd_sweep(Context& ctx, const RunConfig& cfg) {
  try {
    cfg.sweep.validate();
    cfg.policy.validate(*std::min_element(cfg.sweep.tc.begin(), cfg.sweep.tc.end()));
  } catch (const InputError& e) {
    return ctx.fail(kValidation, e.what());
  }
  for (double tc : cfg.sweep.tc) {
    if (!(tc > 0.0)) return ctx.fail(kValidation, "sweep grid 'tc' must be > 0");
  }
  for (double alpha : cfg.sweep.alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) return ctx.fail(kValidation, "sweep grid 'alpha' must lie in (0,1)");
  }
  std::ofstream file;
  if (!open_output(ctx, cfg.output, file)) return kValidation;

  const SweepResult result = run_sweep(cfg.sweep, cfg.policy);
  if (file.is_open()) write_sweep_csv(file, result);

  const SweepSummary& s = result.summary;
  ctx.text() << "law: " << to_string(cfg.sweep.law) << ", rows: " << s.rows << " (" << s.admissible_rows
             << " admissible, " << s.inadmissible_rows << " inadmissible)\n"
             << "numeric failures: " << s.numeric_failures << '\n'
             << "deadline failures: " << s.deadline_failures << '\n'
             << "certificate failures: " << s.certificate_failures << '\n'
             << "bound failures: " << s.bound_failures << '\n'
             << "oracle failures: " << s.oracle_failures << '\n'
             << "inadmissible rows reaching zero: " << s.inadmissible_reaching << ", not reaching: "
             << s.inadmissible_not_reaching << '\n';
  write_sweep_summary(ctx.out(), s);
  return s.any_failure() ? kPropertyFailure : kSuccess;
}

int cmd_bound(Context& ctx, const RunConfig& cfg) {
  const BarrierParams p = cfg.params();
  if (auto problem = structural_problem(p)) return ctx.fail(kValidation, "invalid parameters: " + *problem);
  if (auto problem = x0_problem(cfg.x0)) return ctx.fail(kValidation, *problem);
  const ParamVerdict verdict = validate_params(p);
  const double V0 = max_norm(cfg.x0);
  const SettlingBound bound = settling_bound(p, V0);

  ReportBlock block{{"m", fmt(p.m())},
                    {"admissible", fmt(verdict.admissible())},
                    {"V0", fmt(V0)},
                    {"tau_bound", fmt(bound.tau_bound)},
                    {"margin", fmt(bound.margin)},
                    {"reaches_zero", fmt(bound.reaches_zero)}};
  if (p.q() > 0.0) {
    const AutonomousSystem comparator = make_autonomous_power_law(p.q(), p.alpha(), cfg.policy);
    const double autonomous = autonomous_settling_integral(comparator.law, V0);
    block.emplace_back("autonomous_settling", fmt(autonomous));
    block.emplace_back("autonomous_exceeds_deadline", fmt(autonomous > p.tc()));
  }
  ctx.text() << "m = beta*(1-alpha) = " << fmt(p.m()) << (verdict.admissible() ? " (admissible)" : "")
             << (verdict.admissible() ? "" : " (inadmissible: " + verdict.reason + ")") << '\n'
             << "settling bound for V0=" << fmt(V0) << ": "
             << (bound.reaches_zero ? fmt(bound.tau_bound) : std::string("no finite crossing before T_c")) << '\n';
  write_report(ctx.out(), block);
  return kSuccess;
}

int cmd_witness(Context& ctx, const RunConfig& cfg) {
  const BarrierParams p = cfg.params();
  if (auto problem = structural_problem(p)) return ctx.fail(kValidation, "invalid parameters: " + *problem);
  NonAutonomyWitness w;
  try {
    w = find_nonautonomy_witness(p, cfg.vlevel, cfg.t1, cfg.t2, cfg.policy.residual_tol);
  } catch (const InputError& e) {
    return ctx.fail(kValidation, e.what());
  }
  ctx.text() << "dissipation rate at V=" << fmt(w.V_level) << " differs between t1 and t2 by " << fmt(w.gap)
             << (w.exists ? "" : " (" + w.note + ")") << '\n';
  write_report(ctx.out(), {{"V_level", fmt(w.V_level)},
                           {"t1", fmt(w.t1)},
                           {"t2", fmt(w.t2)},
                           {"vdot1", fmt(w.vdot1)},
                           {"vdot2", fmt(w.vdot2)},
                           {"gap", fmt(w.gap)},
                           {"witness", fmt(w.exists)}});
  return kSuccess;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Simulate and certify time-barrier predefined-time stable systems", "tbarrier"};
  app.require_subcommand(1);
  app.get_formatter()->column_width(34);
  app.fallthrough();

  std::string config_path;
  std::string out_path;
  bool quiet = false;
  app.add_option("--config", config_path, "INI configuration file");
  app.add_option("--out", out_path, "Output file (trajectory CSV, report, or sweep CSV)");
  app.add_flag("--quiet", quiet, "Print only the key=value report block");

  FlagValues flags;
  Overrides overrides;

  CLI::App* sim = app.add_subcommand("simulate", "Integrate the reference law and check the deadline");
  add_param_flags(sim, flags, overrides);
  add_x0_flag(sim, flags, overrides);
  add_policy_flags(sim, flags, overrides);
  sim->add_flag("--allow-inadmissible", flags.allow_inadmissible, "Simulate even when beta*(1-alpha) < 1 or q = 0");

  CLI::App* cert = app.add_subcommand("certify", "Check the dissipation inequality along a trajectory");
  add_param_flags(cert, flags, overrides);
  add_x0_flag(cert, flags, overrides);
  add_policy_flags(cert, flags, overrides);
  overrides.number(cert, "--bias", flags.defaults.bias, [](RunConfig& c, double x) { c.bias = x; },
                   "Constant added to the right-hand side");

  CLI::App* sweep = app.add_subcommand("sweep", "Run a parameter grid sweep (grids from --config)");
  add_policy_flags(sweep, flags, overrides);
  CLI::Option* threads = sweep->add_option("--threads", flags.threads, "Worker threads (0 = hardware)")
                             ->capture_default_str();
  overrides.bind(threads, [&flags](RunConfig& c) { c.sweep.threads = flags.threads; });
  CLI::Option* seed = sweep->add_option("--seed", flags.seed, "Seed for sampled checks")->capture_default_str();
  overrides.bind(seed, [&flags](RunConfig& c) { c.sweep.seed = flags.seed; });

  CLI::App* bound = app.add_subcommand("bound", "Analytic settling bound and comparator settling time");
  add_param_flags(bound, flags, overrides);
  add_x0_flag(bound, flags, overrides);

  CLI::App* witness = app.add_subcommand("witness", "Dissipation rates at one V level and two times");
  add_param_flags(witness, flags, overrides);
  overrides.number(witness, "--vlevel", flags.defaults.vlevel, [](RunConfig& c, double x) { c.vlevel = x; },
                   "Common Lyapunov level");
  overrides.number(witness, "--t1", flags.defaults.t1, [](RunConfig& c, double x) { c.t1 = x; }, "First time");
  overrides.number(witness, "--t2", flags.defaults.t2, [](RunConfig& c, double x) { c.t2 = x; }, "Second time");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kSuccess : kValidation;
  }

  Context ctx(out, err, quiet);
  RunConfig cfg;
  try {
    if (!config_path.empty()) cfg = load_config(config_path);
  } catch (const InputError& e) {
    return ctx.fail(kValidation, e.what());
  }
  overrides.apply(cfg);
  if (!out_path.empty()) cfg.output = out_path;

  try {
    if (sim->parsed()) return cmd_simulate(ctx, cfg, flags.allow_inadmissible);
    if (cert->parsed()) return cmd_certify(ctx, cfg);
    if (sweep->parsed()) return cmd_sweep(ctx, cfg);
    if (bound->parsed()) return cmd_bound(ctx, cfg);
    if (witness->parsed()) return cmd_witness(ctx, cfg);
  } catch (const NumericalFailure& e) {
    return ctx.fail(kNumerics, e.what());
  } catch (const InputError& e) {
    return ctx.fail(kValidation, e.what());
  } catch (const DomainError& e) {
    return ctx.fail(kValidation, e.what());
  } catch (const std::exception& e) {
    return ctx.fail(kNumerics, e.what());
  }
  return ctx.fail(kValidation, "no subcommand given");
}

}  // namespace tbarrier::cli
