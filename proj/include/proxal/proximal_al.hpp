#pragma once

#include <cstdint>
#include <optional>

#include "proxal/aug_lagrangian.hpp"
#include "proxal/certify.hpp"
#include "proxal/newton_cg.hpp"
#include "proxal/problem.hpp"
#include "proxal/run_record.hpp"

namespace proxal {

enum class Mode { first_order, second_order };

struct SolverConfig {
  double epsilon = 1e-6;  ///< target tolerance, in (0, 1]
  double eta = 1.0;       ///< schedule exponent; [0,2], [1,2] in second-order mode
  std::optional<double> beta_override;  ///< default is epsilon^eta / 2
  double rho = 0.0;       ///< penalty; must be positive for a fixed-penalty run
  double rho0 = 0.0;      ///< level-set offset constant (telemetry only)
  Mode mode = Mode::first_order;
  InnerTolerances inner;  ///< eps_g/eps_H are overwritten per iteration
  int max_outer = 500;
  std::uint64_t seed = 0;
  VectorXd lambda0;       ///< empty means zeros(m)

  // Classical safeguarded-multiplier baseline only.
  double baseline_tau = 0.5;
  double baseline_gamma = 10.0;
  double lambda_box_min = -1e20;
  double lambda_box_max = 1e20;

  bool audit = false;  ///< store full iterate history in the run record

  double beta() const;
  void validate() const;
};

/// Inner solve tolerances for outer iteration k >= 1:
///   eps_g = min(1/k, epsilon/2)
///   eps_H = sqrt(epsilon)/2 in first-order mode, epsilon/2 in second-order.
std::pair<double, double> tolerance_schedule(int k, double epsilon, Mode mode);

struct StopCheck {
  bool stop = false;
  double stat_norm = 0.0;
  double feas_norm = 0.0;
};

/// Termination test on the ordinary-Lagrangian gradient and feasibility,
/// computed from fresh evaluations at (x, lambda).
StopCheck stopping_check(const ProblemInstance& problem, const VectorXd& x,
                         const VectorXd& lambda, double eps);

inline VectorXd multiplier_update(const VectorXd& lambda, double rho,
                                  const VectorXd& c_val) {
  return lambda + rho * c_val;
}

struct SolveOutput {
  RunRecord record;
  Certificate certificate;
};

/// Proximal augmented Lagrangian loop with a fixed penalty. Each iteration
/// warm-starts the inner Newton-CG solve at the current iterate, which makes
/// the subproblem objective nonincreasing across outer iterations, then
/// applies the multiplier update lambda += rho * c(x). Stops at the first
/// iterate t >= 1 passing stopping_check, or at max_outer.
SolveOutput proximal_al_solve(const ProblemInstance& problem,
                              const SolverConfig& config, const VectorXd& x0);

/// Classical augmented Lagrangian baseline: multipliers are projected onto
/// the box [lambda_box_min, lambda_box_max]^m and the penalty grows by
/// baseline_gamma whenever the max-norm of c fails to contract by
/// baseline_tau. config.rho is the initial penalty.
SolveOutput classic_al_solve(const ProblemInstance& problem,
                             const SolverConfig& config, const VectorXd& x0);

/// One descent-inequality violation found by the Lyapunov audit.
struct LyapunovViolation {
  int k = 0;
  double lhs = 0.0;  ///< P_{k+1} - P_k
  double rhs = 0.0;  ///< allowed bound
};

/// Replays a stored run and checks, for every k >= 1,
///   P_{k+1} - P_k <= |dlambda|^2/rho - (beta/4)(|dx_{k+1}|^2 + |dx_k|^2)
/// up to 1e-8 * (1 + |P_k|). Empty result means the inequality held.
std::vector<LyapunovViolation> lyapunov_descent_audit(
    const RunRecord& record, const ProblemInstance& problem);

/// Checks the exact multiplier-form residual identity
///   grad f(x_{k+1}) + grad c(x_{k+1}) lambda_{k+1} + beta dx_{k+1} = r_{k+1}
/// against the recorded inner residual norms. Returns the worst discrepancy,
/// normalized by 1 + |grad f|.
double kkt_residual_audit(const RunRecord& record,
                          const ProblemInstance& problem);

/// Penalty threshold from known problem constants:
///   max{ 16 max(C1,C2)/eps^eta,
///        (M_f + beta D_S + 1)^2/(2 sigma^2) + rho0,
///        |lambda_0|^2/2 + rho0,
///        16 (M_c^2 + sigma^2) R / sigma^4,
///        3 rho0, 1 }
/// with C1 = (4/sigma^2)(L_f + L_c M_f / sigma + beta)^2 and
///      C2 = (4/sigma^2)(beta + 2 M_c beta / sigma)^2.
double rho_lower_bound(const ConstantsLedger& ledger, double eps, double eta,
                       double beta, double diameter);

}  // namespace proxal
