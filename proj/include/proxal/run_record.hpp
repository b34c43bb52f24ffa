#pragma once

#include <Eigen/Core>
#include <optional>
#include <string>
#include <vector>

namespace proxal {

enum class RunStatus {
  converged_1o,
  converged_2o,
  max_outer_reached,
  inner_budget_exhausted,
  max_trials_reached,
};

std::string to_string(RunStatus status);
bool is_converged(RunStatus status);

/// One outer iteration of telemetry. k starts at 1.
struct IterationRow {
  int k = 0;
  double stat_norm = 0.0;
  double feas_norm = 0.0;
  double dx_norm = 0.0;
  double dlambda_norm = 0.0;
  double lyapunov = 0.0;  ///< P_k
  long inner_iters = 0;
  long hvp_count = 0;
  double eps_g_k = 0.0;
  double eps_H_k = 0.0;
  double r_tilde_norm = 0.0;  ///< realized inner gradient residual
};

struct RunRecord {
  std::vector<IterationRow> rows;
  RunStatus status = RunStatus::max_outer_reached;
  std::optional<int> stop_index;
  double wall_time_s = 0.0;
  Eigen::VectorXd x_final;
  Eigen::VectorXd lambda_final;

  // Parameters the run used; audits need them.
  double rho = 0.0;
  double beta = 0.0;

  // Full iterate storage, populated only in audit mode.
  bool audited = false;
  std::vector<Eigen::VectorXd> xs;       ///< x_0 .. x_K
  std::vector<Eigen::VectorXd> lambdas;  ///< lambda_0 .. lambda_K

  long total_inner_iters() const;
  long total_hvps() const;
};

}  // namespace proxal
