#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>

#include "proxal/adaptive_rho.hpp"
#include "proxal/proximal_al.hpp"
#include "proxal/run_io.hpp"

namespace proxal {

/// Problem factories addressable from configuration files. Built-ins are
/// registered on first use; library users can add their own.
using ProblemFactory = std::function<ProblemInstance(const json&)>;
void register_problem(const std::string& name, ProblemFactory factory);
ProblemInstance make_problem(const json& spec);

enum class RhoPolicy { fixed, adaptive };

/// Parsed, validated run configuration. Unknown keys anywhere in the file
/// are rejected.
struct RunConfig {
  json echo;  ///< the raw document, for persistence
  ProblemInstance problem;
  SolverConfig solver;
  RhoPolicy rho_policy = RhoPolicy::adaptive;
  double fixed_rho = 0.0;
  AdaptiveSchedule adaptive;
  bool beta_overridden = false;
  VectorXd x0;
  std::string algorithm = "proximal_al";  ///< or "classic_al"
  std::optional<std::string> out_dir;

  // phase1 subcommand parameters
  double phase1_rho = 100.0;
  double phase1_C0 = 1.0;
};

/// Parses and validates a config document. Throws ConfigError with a
/// human-readable message on any violation.
RunConfig parse_run_config(const json& doc);
RunConfig load_run_config(const std::string& path);

struct ScalingStudySpec {
  json problem_spec;
  VectorXd x0;
  std::vector<double> grid;  ///< strictly decreasing, length >= 3
  double eta = 2.0;
  int repetitions = 3;
  std::uint64_t seed_base = 0;
  Mode mode = Mode::first_order;
  std::optional<double> fixed_rho;  ///< unset: calibrate by adaptive runs
  double slope_tolerance = 0.3;
  int t_cap = 50;  ///< iteration cap checked when eta == 2
  int max_outer = 5000;
  InnerTolerances inner;

  double expected_slope() const { return 2.0 - eta; }
  void validate() const;
};

ScalingStudySpec parse_scaling_spec(const json& doc);

}  // namespace proxal
