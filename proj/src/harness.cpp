#include "proxal/harness.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>

#include "proxal/errors.hpp"
#include "proxal/rng.hpp"

namespace proxal {

namespace {

double median(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  if (n % 2 == 1) return values[n / 2];
  return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

// Least-squares slope of y against x.
double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double denom = n * sxx - sx * sx;
  return denom == 0.0 ? 0.0 : (n * sxy - sx * sy) / denom;
}

}  // namespace

json ScalingReport::to_json(const ScalingStudySpec& spec) const {
  json j;
  j["eta"] = spec.eta;
  j["grid"] = spec.grid;
  j["rho_used"] = rho_used;
  j["slope"] = slope;
  j["slope_bound"] = slope_bound;
  j["max_t"] = max_t;
  j["median_t"] = median_t;
  j["pass"] = pass;
  if (!failure_reason.empty()) j["failure_reason"] = failure_reason;
  json cells_json = json::array();
  for (const ScalingCell& cell : cells) {
    cells_json.push_back({{"epsilon", cell.epsilon},
                          {"repetition", cell.repetition},
                          {"T", cell.t_eps},
                          {"status", to_string(cell.status)}});
  }
  j["cells"] = cells_json;
  return j;
}

ScalingReport scaling_study(const ScalingStudySpec& spec) {
  spec.validate();
  const ProblemInstance problem = make_problem(spec.problem_spec);

  ScalingReport report;
  report.slope_bound = spec.expected_slope() + spec.slope_tolerance;

  // Penalty calibration: run the trial schedule once per grid point and keep
  // the largest accepted value, so one fixed penalty serves the whole grid.
  if (spec.fixed_rho) {
    report.rho_used = *spec.fixed_rho;
  } else {
    for (std::size_t i = 0; i < spec.grid.size(); ++i) {
      SolverConfig base;
      base.epsilon = spec.grid[i];
      base.eta = spec.eta;
      base.mode = spec.mode;
      base.inner = spec.inner;
      base.seed = split_seed(spec.seed_base, 0xca11b + i);
      AdaptiveSchedule sched;
      sched.eta = spec.eta;
      sched.epsilon = spec.grid[i];
      const AdaptiveResult tuned =
          adaptive_solve(problem, base, sched, spec.x0);
      if (!is_converged(tuned.combined.status)) {
        report.pass = false;
        report.failure_reason = "penalty calibration failed at epsilon = " +
                                format_double(spec.grid[i]);
        return report;
      }
      report.rho_used = std::max(report.rho_used, tuned.combined.rho);
    }
  }

  bool all_converged = true;
  std::vector<double> log_inv_eps, log_median;
  for (std::size_t i = 0; i < spec.grid.size(); ++i) {
    const double eps = spec.grid[i];
    std::vector<double> ts;
    for (int rep = 0; rep < spec.repetitions; ++rep) {
      SolverConfig config;
      config.epsilon = eps;
      config.eta = spec.eta;
      config.mode = spec.mode;
      config.rho = report.rho_used;
      config.max_outer = spec.max_outer;
      config.inner = spec.inner;
      config.seed = split_seed(spec.seed_base, i * 1000 + rep);

      const SolveOutput out = proximal_al_solve(problem, config, spec.x0);
      ScalingCell cell;
      cell.epsilon = eps;
      cell.repetition = rep;
      cell.status = out.record.status;
      cell.t_eps = out.record.stop_index.value_or(0);
      report.cells.push_back(cell);

      if (!is_converged(out.record.status)) {
        all_converged = false;
        if (report.failure_reason.empty())
          report.failure_reason =
              "cell did not converge: epsilon = " + format_double(eps) +
              ", repetition " + std::to_string(rep);
      } else {
        ts.push_back(static_cast<double>(cell.t_eps));
        report.max_t = std::max(report.max_t, cell.t_eps);
      }
    }
    if (!ts.empty()) {
      report.median_t.push_back(median(ts));
      log_inv_eps.push_back(std::log(1.0 / eps));
      log_median.push_back(std::log(std::max(report.median_t.back(), 1.0)));
    }
  }

  if (!all_converged) {
    report.pass = false;
    return report;
  }

  report.slope = fit_slope(log_inv_eps, log_median);
  report.pass = report.slope <= report.slope_bound;
  if (!report.pass)
    report.failure_reason = "fitted slope " + format_double(report.slope) +
                            " exceeds bound " +
                            format_double(report.slope_bound);
  if (spec.eta == 2.0 && report.max_t > spec.t_cap) {
    report.pass = false;
    report.failure_reason = "max T " + std::to_string(report.max_t) +
                            " exceeds cap " + std::to_string(spec.t_cap);
  }
  return report;
}

namespace {

json load_json_file(const std::string& path, const char* what) {
  std::ifstream stream(path);
  if (!stream)
    throw ConfigError(std::string("cannot open ") + what + " '" + path + "'");
  try {
    return json::parse(stream);
  } catch (const json::parse_error& err) {
    throw ConfigError(std::string(what) + " parse error: " + err.what());
  }
}

struct CliOverrides {
  std::string config_path;
  std::string point_path;
  std::string out_dir;
  std::string mode;
  std::string rho;
  std::uint64_t seed = 0;
  bool seed_set = false;
  bool audit = false;
};

void apply_overrides(RunConfig& cfg, const CliOverrides& opt) {
  if (!opt.out_dir.empty()) cfg.out_dir = opt.out_dir;
  if (opt.seed_set) cfg.solver.seed = opt.seed;
  if (opt.audit) cfg.solver.audit = true;
  if (!opt.mode.empty()) {
    if (opt.mode == "1o")
      cfg.solver.mode = Mode::first_order;
    else if (opt.mode == "2o")
      cfg.solver.mode = Mode::second_order;
    else
      throw ConfigError("mode must be '1o' or '2o'");
    cfg.solver.validate();
  }
  if (!opt.rho.empty()) {
    if (opt.rho == "adaptive") {
      cfg.rho_policy = RhoPolicy::adaptive;
    } else {
      cfg.rho_policy = RhoPolicy::fixed;
      try {
        cfg.fixed_rho = std::stod(opt.rho);
      } catch (const std::exception&) {
        throw ConfigError("rho must be 'adaptive' or a positive number");
      }
      if (!(cfg.fixed_rho > 0.0)) throw ConfigError("rho must be positive");
      cfg.solver.rho = cfg.fixed_rho;
    }
  }
}

SolveOutput dispatch_solve(const RunConfig& cfg, RunRecord* combined_out) {
  if (cfg.beta_overridden)
    std::cerr << "note: beta override in effect; complexity guarantees assume "
                 "the default epsilon^eta / 2\n";

  if (cfg.algorithm == "classic_al") {
    if (cfg.rho_policy != RhoPolicy::fixed)
      throw ConfigError("classic_al needs a fixed initial rho");
    return classic_al_solve(cfg.problem, cfg.solver, cfg.x0);
  }
  if (cfg.rho_policy == RhoPolicy::fixed) {
    SolverConfig s = cfg.solver;
    s.rho = cfg.fixed_rho;
    return proximal_al_solve(cfg.problem, s, cfg.x0);
  }
  const AdaptiveResult result =
      adaptive_solve(cfg.problem, cfg.solver, cfg.adaptive, cfg.x0);
  if (combined_out) *combined_out = result.combined;
  return {result.combined, result.certificate};
}

int exit_code_for(RunStatus status) { return is_converged(status) ? 0 : 2; }

int cmd_solve(const CliOverrides& opt) {
  RunConfig cfg = load_run_config(opt.config_path);
  apply_overrides(cfg, opt);
  const SolveOutput out = dispatch_solve(cfg, nullptr);

  const std::string out_dir = cfg.out_dir.value_or("out");
  persist_run(out.record, cfg.echo, cfg.solver.seed, out_dir);

  std::cerr << "status: " << to_string(out.record.status)
            << ", outer iterations: " << out.record.rows.size()
            << ", stat_norm: "
            << (out.record.rows.empty() ? 0.0
                                        : out.record.rows.back().stat_norm)
            << ", feas_norm: "
            << (out.record.rows.empty() ? 0.0
                                        : out.record.rows.back().feas_norm)
            << "\nwrote " << out_dir << "/run.csv and " << out_dir
            << "/run.json\n";
  return exit_code_for(out.record.status);
}

int cmd_check(const CliOverrides& opt) {
  const RunConfig cfg = load_run_config(opt.config_path);
  const json point = load_json_file(opt.point_path, "point file");
  for (const auto& item : point.items()) {
    if (item.key() != "x" && item.key() != "lambda" && item.key() != "epsilon")
      throw ConfigError("unknown key '" + item.key() + "' in point file");
  }
  if (!point.contains("x")) throw ConfigError("point file needs an 'x' array");
  VectorXd x(point["x"].size());
  for (std::size_t i = 0; i < point["x"].size(); ++i)
    x[static_cast<int>(i)] = point["x"][i].get<double>();
  if (x.size() != cfg.problem.n)
    throw ConfigError("point dimension does not match the problem");

  const double eps = point.contains("epsilon")
                         ? point["epsilon"].get<double>()
                         : cfg.solver.epsilon;

  Certificate cert;
  if (point.contains("lambda")) {
    VectorXd lambda(point["lambda"].size());
    for (std::size_t i = 0; i < point["lambda"].size(); ++i)
      lambda[static_cast<int>(i)] = point["lambda"][i].get<double>();
    cert = cfg.problem.n <= kDenseCheckLimit
               ? check_2o(cfg.problem, x, lambda, eps)
               : check_1o(cfg.problem, x, lambda, eps);
  } else {
    cert = cfg.problem.n <= kDenseCheckLimit ? check_2o(cfg.problem, x, eps)
                                             : check_1o(cfg.problem, x, eps);
  }
  std::cout << certificate_to_json(cert).dump(2) << "\n";
  return 0;
}

int cmd_phase1(const CliOverrides& opt) {
  RunConfig cfg = load_run_config(opt.config_path);
  apply_overrides(cfg, opt);
  const Phase1Result result = phase1_feasibility(
      cfg.problem, cfg.x0, cfg.phase1_rho, cfg.solver.epsilon, cfg.phase1_C0,
      cfg.solver.inner, cfg.solver.seed);

  json j;
  j["x"] = std::vector<double>(result.x.begin(), result.x.end());
  j["c_norm"] = result.c_norm;
  j["feasible_enough"] = result.feasible_enough;
  j["iterations"] = result.inner.iterations;
  j["hvp_products"] = result.inner.hvp_count;
  std::cout << j.dump(2) << "\n";

  if (result.inner.status == InnerStatus::budget_exhausted &&
      !result.feasible_enough)
    return 2;
  return result.feasible_enough ? 0 : 5;
}

int cmd_audit(const CliOverrides& opt) {
  RunConfig cfg = load_run_config(opt.config_path);
  apply_overrides(cfg, opt);
  cfg.solver.audit = true;
  if (cfg.algorithm != "proximal_al")
    throw ConfigError("audit applies to the proximal_al algorithm");

  json report;
  bool clean = true;
  if (cfg.rho_policy == RhoPolicy::adaptive) {
    // Audit every trial separately; multipliers restart between trials.
    const AdaptiveResult result =
        adaptive_solve(cfg.problem, cfg.solver, cfg.adaptive, cfg.x0);
    json trials = json::array();
    for (const TrialSummary& trial : result.trials) {
      const auto violations = lyapunov_descent_audit(trial.record, cfg.problem);
      const double kkt = kkt_residual_audit(trial.record, cfg.problem);
      clean = clean && violations.empty() && kkt <= 1e-9;
      json tj;
      tj["tau"] = trial.tau;
      tj["rho"] = trial.rho;
      tj["lyapunov_violations"] = violations.size();
      tj["kkt_max_discrepancy"] = kkt;
      trials.push_back(tj);
    }
    report["trials"] = trials;
    report["status"] = to_string(result.combined.status);
    clean = clean && is_converged(result.combined.status);
  } else {
    SolverConfig s = cfg.solver;
    s.rho = cfg.fixed_rho;
    const SolveOutput out = proximal_al_solve(cfg.problem, s, cfg.x0);
    const auto violations = lyapunov_descent_audit(out.record, cfg.problem);
    const double kkt = kkt_residual_audit(out.record, cfg.problem);
    json vj = json::array();
    for (const LyapunovViolation& v : violations)
      vj.push_back({{"k", v.k}, {"lhs", v.lhs}, {"rhs", v.rhs}});
    report["lyapunov_violations"] = vj;
    report["kkt_max_discrepancy"] = kkt;
    report["status"] = to_string(out.record.status);
    clean = violations.empty() && kkt <= 1e-9 &&
            is_converged(out.record.status);
  }
  report["clean"] = clean;
  std::cout << report.dump(2) << "\n";
  return clean ? 0 : 2;
}

int cmd_scaling_study(const CliOverrides& opt) {
  const json doc = load_json_file(opt.config_path, "scaling study config");
  const ScalingStudySpec spec = parse_scaling_spec(doc);
  const ScalingReport report = scaling_study(spec);
  const json j = report.to_json(spec);
  std::cout << j.dump(2) << "\n";
  if (!opt.out_dir.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(opt.out_dir, ec);
    std::ofstream stream(std::filesystem::path(opt.out_dir) / "study.json",
                         std::ios::binary | std::ios::trunc);
    if (!stream) throw EvaluationError("cannot write study report");
    stream << j.dump(2) << "\n";
  }
  return report.pass ? 0 : 2;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"proximal augmented Lagrangian solver harness"};
  app.require_subcommand(1);

  CliOverrides opt;

  auto add_common = [&](CLI::App* sub, bool with_point) {
    sub->add_option("--config", opt.config_path, "JSON config file")
        ->required();
    sub->add_option("--out", opt.out_dir, "output directory");
    sub->add_option("--seed", opt.seed, "64-bit seed override")
        ->each([&](const std::string&) { opt.seed_set = true; });
    sub->add_option("--mode", opt.mode, "1o or 2o");
    sub->add_option("--rho", opt.rho, "'adaptive' or a positive number");
    sub->add_flag("--audit", opt.audit, "store full iterate history");
    if (with_point)
      sub->add_option("--point", opt.point_path, "point/multiplier JSON file")
          ->required();
  };

  CLI::App* solve = app.add_subcommand("solve", "run the solver");
  add_common(solve, false);
  CLI::App* check = app.add_subcommand("check", "certify a candidate point");
  add_common(check, true);
  CLI::App* phase1 =
      app.add_subcommand("phase1", "near-feasible start via constraint descent");
  add_common(phase1, false);
  CLI::App* study =
      app.add_subcommand("scaling-study", "tolerance-grid iteration study");
  add_common(study, false);
  CLI::App* audit = app.add_subcommand("audit", "run and replay-check a solve");
  add_common(audit, false);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& err) {
    if (err.get_exit_code() == 0) {
      // --help goes to stdout by CLI11 convention.
      return app.exit(err);
    }
    std::cerr << err.what() << "\n";
    return 3;
  }

  try {
    if (solve->parsed()) return cmd_solve(opt);
    if (check->parsed()) return cmd_check(opt);
    if (phase1->parsed()) return cmd_phase1(opt);
    if (study->parsed()) return cmd_scaling_study(opt);
    if (audit->parsed()) return cmd_audit(opt);
    std::cerr << "no subcommand given\n";
    return 3;
  } catch (const ConfigError& err) {
    std::cerr << "config error: " << err.what() << "\n";
    return 3;
  } catch (const InfeasibleCriticalError& err) {
    std::cerr << "infeasible: " << err.what() << "\n";
    return 5;
  } catch (const EvaluationError& err) {
    std::cerr << "evaluation failure: " << err.what() << "\n";
    return 4;
  } catch (const std::invalid_argument& err) {
    std::cerr << "config error: " << err.what() << "\n";
    return 3;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 4;
  }
}

}  // namespace proxal
