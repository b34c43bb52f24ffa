#pragma once

#include <string>
#include <vector>

#include "proxal/config.hpp"

namespace proxal {

struct ScalingCell {
  double epsilon = 0.0;
  int repetition = 0;
  int t_eps = 0;  ///< first outer iterate passing the stopping test
  RunStatus status = RunStatus::max_outer_reached;
};

struct ScalingReport {
  std::vector<ScalingCell> cells;
  std::vector<double> median_t;  ///< per grid tolerance, grid order
  double slope = 0.0;            ///< least-squares slope of log T vs log(1/eps)
  double slope_bound = 0.0;      ///< (2 - eta) + tolerance
  int max_t = 0;
  double rho_used = 0.0;
  bool pass = false;
  std::string failure_reason;

  json to_json(const ScalingStudySpec& spec) const;
};

/// Runs the solver over the tolerance grid with a fixed penalty (calibrated
/// by adaptive runs when the spec does not pin one), measures the stop index
/// per cell, and fits the growth exponent. Cells are aggregated by grid
/// order regardless of execution order, and every cell derives its own seed,
/// so the report is deterministic.
ScalingReport scaling_study(const ScalingStudySpec& spec);

/// CLI entry point. Exit codes: 0 success/converged, 2 non-convergence,
/// 3 config error, 4 evaluation or I/O failure, 5 infeasible-critical
/// phase-I outcome.
int run_cli(const std::vector<std::string>& args);

}  // namespace proxal
