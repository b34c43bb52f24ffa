#include "proxal/adaptive_rho.hpp"

#include <cmath>

#include "proxal/errors.hpp"
#include "proxal/rng.hpp"

namespace proxal {

void AdaptiveSchedule::validate() const {
  if (!(q > 1.0)) throw ConfigError("schedule growth q must exceed 1");
  if (T0 < 1) throw ConfigError("schedule base budget T0 must be at least 1");
  if (eta < 0.0 || eta > 2.0) throw ConfigError("eta must lie in [0, 2]");
  if (!(epsilon > 0.0)) throw ConfigError("epsilon must be positive");
  if (!(C0 > 0.0)) throw ConfigError("C0 must be positive");
  if (trial_cap < 1) throw ConfigError("trial cap must be at least 1");
}

std::pair<double, int> schedule(int tau, const AdaptiveSchedule& sched) {
  if (tau < 1) throw ConfigError("trial index starts at 1");
  const double growth = std::pow(sched.q, static_cast<double>(tau));
  double rho;
  double budget;
  if (sched.eta < 1.0) {
    rho = std::max(growth * std::pow(sched.epsilon, 2.0 - 2.0 * sched.eta), 1.0);
    budget = std::ceil(sched.T0 * growth) + 1.0;
  } else if (sched.eta == 1.0) {
    rho = growth;
    budget = std::ceil(sched.T0 * growth) + 1.0;
  } else {
    rho = growth;
    budget = std::max(
        std::ceil(sched.T0 * growth *
                  std::pow(sched.epsilon, 2.0 * sched.eta - 2.0)) + 1.0,
        static_cast<double>(sched.T0));
  }
  const int capped =
      budget > 1e9 ? 1000000000 : static_cast<int>(budget);
  return {rho, capped};
}

Phase1Result phase1_feasibility(const ProblemInstance& problem,
                                const VectorXd& x_init, double rho, double eps,
                                double C0, const InnerTolerances& inner,
                                std::uint64_t seed) {
  validate(problem);
  if (!(rho > 0.0) || !(eps > 0.0) || !(C0 > 0.0))
    throw ConfigError("phase1 requires positive rho, eps, C0");

  // F(x) = |c(x)|^2, grad F = 2 grad c(x) c(x),
  // hess F = 2 (sum_i c_i hess c_i + grad c grad c').
  UnconstrainedOracle oracle{
      [&problem](const VectorXd& x) {
        return problem.constraints(x).squaredNorm();
      },
      [&problem](const VectorXd& x) {
        return VectorXd(2.0 * problem.constraint_vjp(x, problem.constraints(x)));
      },
      [&problem](const VectorXd& x, const VectorXd& d) {
        // The weighted product always carries hess f; cancel it with a
        // zero-weight product.
        const VectorXd w = 2.0 * problem.constraints(x);
        VectorXd out = problem.lagrangian_hvp(x, w, d) -
                       problem.lagrangian_hvp(x, VectorXd::Zero(problem.m), d);
        out += 2.0 * problem.constraint_vjp(x, problem.constraint_jvp(x, d));
        return out;
      },
      problem.n};

  const double feas_radius = std::min(std::sqrt(C0 / rho), 1.0);
  InnerTolerances tol = inner;
  tol.eps_g = std::min({eps, feas_radius, 1.0});
  tol.eps_H = std::sqrt(tol.eps_g);

  Phase1Result result;
  result.inner = newton_cg_solve(oracle, x_init, tol, /*second_order=*/false,
                                 split_seed(seed, 0x9a5e1));
  result.x = result.inner.z;
  result.c_norm = problem.constraints(result.x).norm();
  result.feasible_enough = result.c_norm <= feas_radius;
  return result;
}

AdaptiveResult adaptive_solve(const ProblemInstance& problem,
                              const SolverConfig& config,
                              const AdaptiveSchedule& sched,
                              const VectorXd& x_init,
                              const TrialStartProvider& start_provider) {
  validate(problem);
  sched.validate();
  if (x_init.size() != problem.n)
    throw ConfigError("start point dimension does not match the problem");

  VectorXd restart_multiplier = sched.Lambda0.size() == 0
                                    ? VectorXd::Zero(problem.m)
                                    : sched.Lambda0;
  if (restart_multiplier.size() != problem.m)
    throw ConfigError("Lambda0 dimension does not match the problem");

  TrialStartProvider provider = start_provider;
  if (!provider) {
    provider = [&](int tau, const VectorXd& prev_x, double rho_tau) {
      const Phase1Result p1 = phase1_feasibility(
          problem, prev_x, rho_tau, sched.epsilon, sched.C0, config.inner,
          split_seed(config.seed, 0xfea5e0ULL + static_cast<uint64_t>(tau)));
      if (!p1.feasible_enough)
        throw InfeasibleCriticalError(
            "phase I stalled at an infeasible critical point (|c| = " +
            std::to_string(p1.c_norm) + ")");
      return p1.x;
    };
  }

  AdaptiveResult result;
  RunRecord& combined = result.combined;
  combined.audited = false;
  combined.status = RunStatus::max_trials_reached;

  VectorXd carry = x_init;
  std::optional<Certificate> certificate;
  double wall_total = 0.0;

  for (int tau = 1; tau <= sched.trial_cap; ++tau) {
    const auto [rho_tau, budget_tau] = schedule(tau, sched);
    const VectorXd z_tau = provider(tau, carry, rho_tau);

    SolverConfig trial_config = config;
    trial_config.rho = rho_tau;
    trial_config.max_outer = budget_tau;
    trial_config.lambda0 = restart_multiplier;
    trial_config.seed = split_seed(config.seed, static_cast<uint64_t>(tau));

    SolveOutput out = proximal_al_solve(problem, trial_config, z_tau);
    wall_total += out.record.wall_time_s;
    carry = out.record.x_final;

    const bool converged = is_converged(out.record.status);
    result.tau_final = tau;
    result.trials.push_back(
        {tau, rho_tau, budget_tau, out.record});

    // Flatten telemetry with a global iteration index. A converged trial
    // ends at the converging iterate, so its last row is the stop row.
    for (IterationRow row : out.record.rows) {
      row.k = static_cast<int>(combined.rows.size()) + 1;
      combined.rows.push_back(row);
    }
    if (converged) combined.stop_index = static_cast<int>(combined.rows.size());

    combined.rho = rho_tau;
    combined.beta = out.record.beta;
    combined.x_final = out.record.x_final;
    combined.lambda_final = out.record.lambda_final;

    if (converged) {
      combined.status = out.record.status;
      certificate = out.certificate;
      break;
    }
  }

  combined.wall_time_s = wall_total;
  if (!certificate) {
    // No trial converged; certify the final iterate anyway for reporting.
    certificate = config.mode == Mode::second_order &&
                          problem.n <= kDenseCheckLimit
                      ? check_2o(problem, combined.x_final,
                                 combined.lambda_final, config.epsilon)
                      : check_1o(problem, combined.x_final,
                                 combined.lambda_final, config.epsilon);
  }
  result.certificate = *certificate;
  return result;
}

}  // namespace proxal
