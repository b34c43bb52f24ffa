#include "proxal/proximal_al.hpp"

#include <chrono>
#include <cmath>

#include "proxal/errors.hpp"
#include "proxal/rng.hpp"

namespace proxal {

long RunRecord::total_inner_iters() const {
  long total = 0;
  for (const auto& row : rows) total += row.inner_iters;
  return total;
}

long RunRecord::total_hvps() const {
  long total = 0;
  for (const auto& row : rows) total += row.hvp_count;
  return total;
}

std::string to_string(RunStatus status) {
  switch (status) {
    case RunStatus::converged_1o: return "converged_1o";
    case RunStatus::converged_2o: return "converged_2o";
    case RunStatus::max_outer_reached: return "max_outer_reached";
    case RunStatus::inner_budget_exhausted: return "inner_budget_exhausted";
    case RunStatus::max_trials_reached: return "max_trials_reached";
  }
  return "unknown";
}

bool is_converged(RunStatus status) {
  return status == RunStatus::converged_1o || status == RunStatus::converged_2o;
}

double SolverConfig::beta() const {
  if (beta_override) return *beta_override;
  return 0.5 * std::pow(epsilon, eta);
}

void SolverConfig::validate() const {
  if (!(epsilon > 0.0) || epsilon > 1.0)
    throw ConfigError("epsilon must lie in (0, 1]");
  if (eta < 0.0 || eta > 2.0) throw ConfigError("eta must lie in [0, 2]");
  if (mode == Mode::second_order && eta < 1.0)
    throw ConfigError("second-order mode requires eta in [1, 2]");
  if (!(beta() > 0.0)) throw ConfigError("beta must be positive");
  if (rho0 < 0.0) throw ConfigError("rho0 must be nonnegative");
  if (max_outer < 1) throw ConfigError("max_outer must be at least 1");
  if (!(baseline_tau > 0.0 && baseline_tau < 1.0))
    throw ConfigError("baseline tau must lie in (0, 1)");
  if (!(baseline_gamma > 1.0))
    throw ConfigError("baseline gamma must exceed 1");
  if (lambda_box_min > lambda_box_max)
    throw ConfigError("multiplier box is empty");
  inner.validate();
}

std::pair<double, double> tolerance_schedule(int k, double epsilon, Mode mode) {
  if (k < 1) throw ConfigError("tolerance schedule index starts at 1");
  const double eps_g = std::min(1.0 / static_cast<double>(k), 0.5 * epsilon);
  const double eps_H =
      mode == Mode::first_order ? 0.5 * std::sqrt(epsilon) : 0.5 * epsilon;
  return {eps_g, eps_H};
}

StopCheck stopping_check(const ProblemInstance& problem, const VectorXd& x,
                         const VectorXd& lambda, double eps) {
  StopCheck result;
  const VectorXd residual =
      problem.objective_gradient(x) + problem.constraint_vjp(x, lambda);
  if (!residual.allFinite())
    throw EvaluationError("stationarity residual is non-finite");
  result.stat_norm = residual.norm();
  result.feas_norm = problem.constraints(x).norm();
  result.stop = result.stat_norm <= eps && result.feas_norm <= eps;
  return result;
}

namespace {

VectorXd initial_multiplier(const SolverConfig& config, int m) {
  if (config.lambda0.size() == 0) return VectorXd::Zero(m);
  if (config.lambda0.size() != m)
    throw ConfigError("lambda0 dimension does not match the problem");
  return config.lambda0;
}

Certificate terminal_certificate(const ProblemInstance& problem,
                                 const SolverConfig& config, const VectorXd& x,
                                 const VectorXd& lambda) {
  if (config.mode == Mode::second_order && problem.n <= kDenseCheckLimit)
    return check_2o(problem, x, lambda, config.epsilon);
  return check_1o(problem, x, lambda, config.epsilon);
}

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

}  // namespace

SolveOutput proximal_al_solve(const ProblemInstance& problem,
                              const SolverConfig& config, const VectorXd& x0) {
  validate(problem);
  config.validate();
  if (!(config.rho > 0.0))
    throw ConfigError("proximal_al_solve requires a positive penalty rho");
  if (x0.size() != problem.n)
    throw ConfigError("start point dimension does not match the problem");
  if (!x0.allFinite()) throw ConfigError("start point must be finite");

  const auto t_start = Clock::now();
  const double beta = config.beta();

  RunRecord rec;
  rec.rho = config.rho;
  rec.beta = beta;
  rec.audited = config.audit;

  VectorXd x = x0;
  VectorXd lambda = initial_multiplier(config, problem.m);
  if (config.audit) {
    rec.xs.push_back(x);
    rec.lambdas.push_back(lambda);
  }

  rec.status = RunStatus::max_outer_reached;
  for (int k = 0; k < config.max_outer; ++k) {
    const auto [eps_g, eps_H] =
        tolerance_schedule(k + 1, config.epsilon, config.mode);
    InnerTolerances tol = config.inner;
    tol.eps_g = eps_g;
    tol.eps_H = eps_H;

    const ProxSubproblem sub(problem, lambda, config.rho, beta, x);
    const ProxObjective objective(sub);
    UnconstrainedOracle oracle{
        [&objective](const VectorXd& z) { return objective.value(z); },
        [&objective](const VectorXd& z) { return objective.gradient(z); },
        [&objective](const VectorXd& z, const VectorXd& d) {
          return objective.hessian_vec(z, d);
        },
        problem.n};

    const InnerResult inner =
        newton_cg_solve(oracle, x, tol, config.mode == Mode::second_order,
                        split_seed(config.seed, static_cast<uint64_t>(k) + 1));

    const VectorXd x_next = inner.z;
    const VectorXd c_val = problem.constraints(x_next);
    if (!c_val.allFinite())
      throw EvaluationError("constraints evaluated to non-finite values");
    const VectorXd lambda_next = multiplier_update(lambda, config.rho, c_val);

    const StopCheck check =
        stopping_check(problem, x_next, lambda_next, config.epsilon);

    IterationRow row;
    row.k = k + 1;
    row.stat_norm = check.stat_norm;
    row.feas_norm = check.feas_norm;
    row.dx_norm = (x_next - x).norm();
    row.dlambda_norm = (lambda_next - lambda).norm();
    row.lyapunov = lyapunov(problem, config.rho, beta, x_next, x, lambda_next);
    row.inner_iters = inner.iterations;
    row.hvp_count = inner.hvp_count;
    row.eps_g_k = eps_g;
    row.eps_H_k = eps_H;
    row.r_tilde_norm = inner.grad_norm;
    rec.rows.push_back(row);

    x = x_next;
    lambda = lambda_next;
    if (config.audit) {
      rec.xs.push_back(x);
      rec.lambdas.push_back(lambda);
    }

    if (check.stop) {
      rec.status = config.mode == Mode::second_order ? RunStatus::converged_2o
                                                     : RunStatus::converged_1o;
      rec.stop_index = k + 1;
      break;
    }
    if (inner.status == InnerStatus::budget_exhausted) {
      rec.status = RunStatus::inner_budget_exhausted;
      break;
    }
  }

  rec.x_final = x;
  rec.lambda_final = lambda;
  rec.wall_time_s = seconds_since(t_start);
  return {rec, terminal_certificate(problem, config, x, lambda)};
}

SolveOutput classic_al_solve(const ProblemInstance& problem,
                             const SolverConfig& config, const VectorXd& x0) {
  validate(problem);
  config.validate();
  if (!(config.rho > 0.0))
    throw ConfigError("classic_al_solve requires a positive initial penalty");
  if (x0.size() != problem.n)
    throw ConfigError("start point dimension does not match the problem");
  if (!x0.allFinite()) throw ConfigError("start point must be finite");

  const auto project = [&](VectorXd v) {
    for (int i = 0; i < v.size(); ++i)
      v[i] = std::clamp(v[i], config.lambda_box_min, config.lambda_box_max);
    return v;
  };

  VectorXd lambda = initial_multiplier(config, problem.m);
  for (int i = 0; i < lambda.size(); ++i) {
    if (lambda[i] < config.lambda_box_min || lambda[i] > config.lambda_box_max)
      throw ConfigError("lambda0 must lie inside the multiplier box");
  }

  const auto t_start = Clock::now();
  RunRecord rec;
  rec.rho = config.rho;
  rec.beta = 0.0;  // no proximal term in the baseline
  rec.audited = config.audit;

  VectorXd x = x0;
  double rho_k = config.rho;
  double c_inf_prev = 0.0;
  if (config.audit) {
    rec.xs.push_back(x);
    rec.lambdas.push_back(lambda);
  }

  rec.status = RunStatus::max_outer_reached;
  for (int k = 0; k < config.max_outer; ++k) {
    const auto [eps_g, eps_H] =
        tolerance_schedule(k + 1, config.epsilon, config.mode);
    InnerTolerances tol = config.inner;
    tol.eps_g = eps_g;
    tol.eps_H = eps_H;

    const ProxSubproblem sub(problem, lambda, rho_k, 0.0, x);
    const ProxObjective objective(sub);
    UnconstrainedOracle oracle{
        [&objective](const VectorXd& z) { return objective.value(z); },
        [&objective](const VectorXd& z) { return objective.gradient(z); },
        [&objective](const VectorXd& z, const VectorXd& d) {
          return objective.hessian_vec(z, d);
        },
        problem.n};

    const InnerResult inner =
        newton_cg_solve(oracle, x, tol, config.mode == Mode::second_order,
                        split_seed(config.seed, static_cast<uint64_t>(k) + 1));

    const VectorXd x_next = inner.z;
    const VectorXd c_val = problem.constraints(x_next);
    const VectorXd lambda_next = project(lambda + rho_k * c_val);
    const StopCheck check =
        stopping_check(problem, x_next, lambda_next, config.epsilon);

    IterationRow row;
    row.k = k + 1;
    row.stat_norm = check.stat_norm;
    row.feas_norm = check.feas_norm;
    row.dx_norm = (x_next - x).norm();
    row.dlambda_norm = (lambda_next - lambda).norm();
    row.lyapunov = al_value(problem, x_next, lambda_next, rho_k);
    row.inner_iters = inner.iterations;
    row.hvp_count = inner.hvp_count;
    row.eps_g_k = eps_g;
    row.eps_H_k = eps_H;
    row.r_tilde_norm = inner.grad_norm;
    rec.rows.push_back(row);

    const double c_inf = c_val.lpNorm<Eigen::Infinity>();
    if (k > 0 && c_inf > config.baseline_tau * c_inf_prev)
      rho_k *= config.baseline_gamma;
    c_inf_prev = c_inf;

    x = x_next;
    lambda = lambda_next;
    if (config.audit) {
      rec.xs.push_back(x);
      rec.lambdas.push_back(lambda);
    }

    if (check.stop) {
      rec.status = config.mode == Mode::second_order ? RunStatus::converged_2o
                                                     : RunStatus::converged_1o;
      rec.stop_index = k + 1;
      break;
    }
    if (inner.status == InnerStatus::budget_exhausted) {
      rec.status = RunStatus::inner_budget_exhausted;
      break;
    }
  }

  rec.rho = rho_k;
  rec.x_final = x;
  rec.lambda_final = lambda;
  rec.wall_time_s = seconds_since(t_start);
  return {rec, terminal_certificate(problem, config, x, lambda)};
}

std::vector<LyapunovViolation> lyapunov_descent_audit(
    const RunRecord& record, const ProblemInstance& problem) {
  if (!record.audited)
    throw ConfigError("lyapunov audit needs a run recorded in audit mode");
  std::vector<LyapunovViolation> violations;
  const auto& xs = record.xs;
  const auto& ls = record.lambdas;
  const int last = static_cast<int>(xs.size()) - 1;
  for (int k = 1; k + 1 <= last; ++k) {
    const double p_k =
        lyapunov(problem, record.rho, record.beta, xs[k], xs[k - 1], ls[k]);
    const double p_next = lyapunov(problem, record.rho, record.beta, xs[k + 1],
                                   xs[k], ls[k + 1]);
    const double dl2 = (ls[k + 1] - ls[k]).squaredNorm();
    const double dx2_next = (xs[k + 1] - xs[k]).squaredNorm();
    const double dx2 = (xs[k] - xs[k - 1]).squaredNorm();
    const double bound = dl2 / record.rho -
                         0.25 * record.beta * (dx2_next + dx2) +
                         1e-8 * (1.0 + std::abs(p_k));
    if (p_next - p_k > bound)
      violations.push_back({k, p_next - p_k, bound});
  }
  return violations;
}

double kkt_residual_audit(const RunRecord& record,
                          const ProblemInstance& problem) {
  if (!record.audited)
    throw ConfigError("kkt audit needs a run recorded in audit mode");
  double worst = 0.0;
  for (std::size_t k = 1; k < record.xs.size(); ++k) {
    const VectorXd& x = record.xs[k];
    const VectorXd grad_f = problem.objective_gradient(x);
    const VectorXd residual = grad_f + problem.constraint_vjp(x, record.lambdas[k]) +
                              record.beta * (x - record.xs[k - 1]);
    const double measured = record.rows[k - 1].r_tilde_norm;
    const double discrepancy =
        std::abs(residual.norm() - measured) / (1.0 + grad_f.norm());
    worst = std::max(worst, discrepancy);
  }
  return worst;
}

double rho_lower_bound(const ConstantsLedger& ledger, double eps, double eta,
                       double beta, double diameter) {
  ledger.validate();
  const auto need = [](const std::optional<double>& field, const char* name) {
    if (!field) throw MissingConstantError(name);
    return *field;
  };
  const double m_f = need(ledger.grad_f_bound, "grad_f_bound");
  const double l_f = need(ledger.grad_f_lipschitz, "grad_f_lipschitz");
  const double m_c = need(ledger.jacobian_bound, "jacobian_bound");
  const double l_c = need(ledger.jacobian_lipschitz, "jacobian_lipschitz");
  const double sigma = need(ledger.sigma_min, "sigma_min");
  const double rho0 = need(ledger.rho0, "rho0");
  const double energy = need(ledger.residual_energy, "residual_energy");
  const double lambda0 = need(ledger.lambda0_norm, "lambda0_norm");

  const double sigma2 = sigma * sigma;
  const double c1 = 4.0 / sigma2 * std::pow(l_f + l_c * m_f / sigma + beta, 2);
  const double c2 = 4.0 / sigma2 * std::pow(beta + 2.0 * m_c * beta / sigma, 2);

  const double term_schedule = 16.0 * std::max(c1, c2) / std::pow(eps, eta);
  const double term_multiplier =
      std::pow(m_f + beta * diameter + 1.0, 2) / (2.0 * sigma2) + rho0;
  const double term_lambda0 = 0.5 * lambda0 * lambda0 + rho0;
  const double term_energy =
      16.0 * (m_c * m_c + sigma2) * energy / (sigma2 * sigma2);

  return std::max({term_schedule, term_multiplier, term_lambda0, term_energy,
                   3.0 * rho0, 1.0});
}

}  // namespace proxal
