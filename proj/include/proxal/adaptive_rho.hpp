#pragma once

#include <functional>

#include "proxal/proximal_al.hpp"

namespace proxal {

/// Geometric trial schedule for the penalty search. Trial tau runs the
/// proximal loop with penalty rho_tau for at most T_tau iterations,
/// restarting the multiplier at Lambda0 each time.
struct AdaptiveSchedule {
  double q = 10.0;       ///< growth factor, > 1
  int T0 = 20;           ///< base iteration budget, >= 1
  double eta = 1.0;
  double epsilon = 1e-6;
  VectorXd Lambda0;      ///< restart multiplier; empty means zeros(m)
  double C0 = 1.0;       ///< feasibility budget for the phase-I start
  int trial_cap = 60;

  void validate() const;
};

/// (rho_tau, T_tau) for trial tau >= 1:
///   eta in [0,1):  rho = max(q^tau eps^{2-2 eta}, 1),  T = ceil(T0 q^tau) + 1
///   eta == 1:      rho = q^tau,                        T = ceil(T0 q^tau) + 1
///   eta in (1,2]:  rho = q^tau,  T = max(ceil(T0 q^tau eps^{2 eta - 2}) + 1, T0)
std::pair<double, int> schedule(int tau, const AdaptiveSchedule& sched);

struct Phase1Result {
  VectorXd x;
  double c_norm = 0.0;
  bool feasible_enough = false;  ///< |c(x)|^2 <= min(C0/rho, 1)
  InnerResult inner;
};

/// Minimizes |c(x)|^2 with Newton-CG until its gradient norm falls below
/// min(eps, sqrt(C0/rho), 1) (curvature tolerance: square root of that).
/// The output is flagged feasible_enough when |c| <= min(sqrt(C0/rho), 1);
/// otherwise the point is an approximate infeasible critical point of the
/// violation.
Phase1Result phase1_feasibility(const ProblemInstance& problem,
                                const VectorXd& x_init, double rho, double eps,
                                double C0, const InnerTolerances& inner,
                                std::uint64_t seed);

/// Start-point provider per trial: (tau, previous terminal x, rho_tau) -> z.
using TrialStartProvider =
    std::function<VectorXd(int, const VectorXd&, double)>;

struct TrialSummary {
  int tau = 0;
  double rho = 0.0;
  int iteration_budget = 0;
  RunRecord record;
};

struct AdaptiveResult {
  RunRecord combined;  ///< all trials' rows, reindexed consecutively
  Certificate certificate;
  int tau_final = 0;
  std::vector<TrialSummary> trials;
};

/// Runs trials tau = 1, 2, ... with the scheduled (rho_tau, T_tau) until one
/// converges or trial_cap is hit. The default start provider runs
/// phase1_feasibility from the previous trial's terminal point (first trial:
/// x_init) and throws InfeasibleCriticalError when phase I cannot reach the
/// feasibility budget. config.rho and config.max_outer are ignored.
AdaptiveResult adaptive_solve(const ProblemInstance& problem,
                              const SolverConfig& config,
                              const AdaptiveSchedule& sched,
                              const VectorXd& x_init,
                              const TrialStartProvider& start_provider = {});

}  // namespace proxal
