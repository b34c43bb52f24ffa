#pragma once

#include "proxal/problem.hpp"

namespace proxal {

/// L_rho(x, lambda) = f(x) + lambda' c(x) + (rho/2) |c(x)|^2.
/// rho = 0 gives the ordinary Lagrangian.
double al_value(const ProblemInstance& problem, const VectorXd& x,
                const VectorXd& lambda, double rho);

/// grad_x L_rho = grad f(x) + sum_i (lambda + rho c(x))_i grad c_i(x).
VectorXd al_gradient(const ProblemInstance& problem, const VectorXd& x,
                     const VectorXd& lambda, double rho);

/// One outer-iteration subproblem: minimize
///   L_rho(x, lambda) + (beta/2) |x - anchor|^2.
/// Immutable after construction; safe to share across readers.
struct ProxSubproblem {
  ProxSubproblem(const ProblemInstance& problem, VectorXd lambda, double rho,
                 double beta, VectorXd anchor);

  const ProblemInstance* problem;
  VectorXd lambda;
  double rho;
  double beta;
  VectorXd anchor;
};

double prox_value(const ProxSubproblem& sub, const VectorXd& x);
VectorXd prox_gradient(const ProxSubproblem& sub, const VectorXd& x);
VectorXd prox_hvp(const ProxSubproblem& sub, const VectorXd& x,
                  const VectorXd& d);

/// Progress measure tracked across outer iterations:
///   L_rho(x_k, lambda_k) + (beta/4) |x_k - x_prev|^2.
double lyapunov(const ProblemInstance& problem, double rho, double beta,
                const VectorXd& x_k, const VectorXd& x_prev,
                const VectorXd& lambda_k);

/// Caching evaluator for a ProxSubproblem. Shares a single c(x) evaluation
/// across value/gradient/hvp at the same point (cache size 1, keyed bitwise
/// on x). Not shareable across threads; make one per worker.
class ProxObjective {
 public:
  explicit ProxObjective(const ProxSubproblem& sub) : sub_(&sub) {}

  double value(const VectorXd& x) const;
  VectorXd gradient(const VectorXd& x) const;
  VectorXd hessian_vec(const VectorXd& x, const VectorXd& d) const;

  int dim() const { return sub_->problem->n; }

 private:
  const VectorXd& shifted_weights(const VectorXd& x) const;

  const ProxSubproblem* sub_;
  mutable VectorXd cached_x_;
  mutable VectorXd cached_c_;
  mutable VectorXd cached_w_;  // lambda + rho * c(x)
  mutable bool cache_valid_ = false;
};

}  // namespace proxal
