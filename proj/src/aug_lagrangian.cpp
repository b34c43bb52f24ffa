#include "proxal/aug_lagrangian.hpp"

#include <cmath>

#include "proxal/errors.hpp"

namespace proxal {

namespace {

void require_finite(double v, const char* what) {
  if (!std::isfinite(v))
    throw EvaluationError(std::string(what) + " evaluated to a non-finite value");
}

void require_finite(const VectorXd& v, const char* what) {
  for (int i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i]))
      throw EvaluationError(
          std::string(what) + " evaluated to a non-finite value", i);
  }
}

}  // namespace

double al_value(const ProblemInstance& problem, const VectorXd& x,
                const VectorXd& lambda, double rho) {
  const double f = problem.objective(x);
  require_finite(f, "objective");
  const VectorXd c = problem.constraints(x);
  require_finite(c, "constraints");
  return f + lambda.dot(c) + 0.5 * rho * c.squaredNorm();
}

VectorXd al_gradient(const ProblemInstance& problem, const VectorXd& x,
                     const VectorXd& lambda, double rho) {
  const VectorXd c = problem.constraints(x);
  require_finite(c, "constraints");
  const VectorXd g =
      problem.objective_gradient(x) + problem.constraint_vjp(x, lambda + rho * c);
  require_finite(g, "augmented Lagrangian gradient");
  return g;
}

ProxSubproblem::ProxSubproblem(const ProblemInstance& prob, VectorXd lam,
                               double rho_in, double beta_in, VectorXd anchor_in)
    : problem(&prob),
      lambda(std::move(lam)),
      rho(rho_in),
      beta(beta_in),
      anchor(std::move(anchor_in)) {
  if (!(rho > 0.0)) throw ConfigError("subproblem penalty rho must be positive");
  if (beta < 0.0) throw ConfigError("proximal coefficient beta must be >= 0");
  if (lambda.size() != prob.m || anchor.size() != prob.n)
    throw ConfigError("subproblem dimensions do not match the problem");
}

double prox_value(const ProxSubproblem& sub, const VectorXd& x) {
  return al_value(*sub.problem, x, sub.lambda, sub.rho) +
         0.5 * sub.beta * (x - sub.anchor).squaredNorm();
}

VectorXd prox_gradient(const ProxSubproblem& sub, const VectorXd& x) {
  return al_gradient(*sub.problem, x, sub.lambda, sub.rho) +
         sub.beta * (x - sub.anchor);
}

VectorXd prox_hvp(const ProxSubproblem& sub, const VectorXd& x,
                  const VectorXd& d) {
  const ProblemInstance& p = *sub.problem;
  const VectorXd c = p.constraints(x);
  require_finite(c, "constraints");
  VectorXd out = p.lagrangian_hvp(x, sub.lambda + sub.rho * c, d);
  out += sub.rho * p.constraint_vjp(x, p.constraint_jvp(x, d));
  out += sub.beta * d;
  require_finite(out, "subproblem hvp");
  return out;
}

double lyapunov(const ProblemInstance& problem, double rho, double beta,
                const VectorXd& x_k, const VectorXd& x_prev,
                const VectorXd& lambda_k) {
  return al_value(problem, x_k, lambda_k, rho) +
         0.25 * beta * (x_k - x_prev).squaredNorm();
}

const VectorXd& ProxObjective::shifted_weights(const VectorXd& x) const {
  if (!cache_valid_ || cached_x_.size() != x.size() ||
      (cached_x_.array() != x.array()).any()) {
    cached_c_ = sub_->problem->constraints(x);
    require_finite(cached_c_, "constraints");
    cached_w_ = sub_->lambda + sub_->rho * cached_c_;
    cached_x_ = x;
    cache_valid_ = true;
  }
  return cached_w_;
}

double ProxObjective::value(const VectorXd& x) const {
  shifted_weights(x);
  const double f = sub_->problem->objective(x);
  require_finite(f, "objective");
  return f + sub_->lambda.dot(cached_c_) +
         0.5 * sub_->rho * cached_c_.squaredNorm() +
         0.5 * sub_->beta * (x - sub_->anchor).squaredNorm();
}

VectorXd ProxObjective::gradient(const VectorXd& x) const {
  const VectorXd& w = shifted_weights(x);
  VectorXd g = sub_->problem->objective_gradient(x) +
               sub_->problem->constraint_vjp(x, w) +
               sub_->beta * (x - sub_->anchor);
  require_finite(g, "subproblem gradient");
  return g;
}

VectorXd ProxObjective::hessian_vec(const VectorXd& x, const VectorXd& d) const {
  const VectorXd& w = shifted_weights(x);
  const ProblemInstance& p = *sub_->problem;
  VectorXd out = p.lagrangian_hvp(x, w, d);
  out += sub_->rho * p.constraint_vjp(x, p.constraint_jvp(x, d));
  out += sub_->beta * d;
  require_finite(out, "subproblem hvp");
  return out;
}

}  // namespace proxal
