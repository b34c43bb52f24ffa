#include "proxal/certify.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <cmath>
#include <limits>

#include "proxal/errors.hpp"

namespace proxal {

namespace {

void require_dense_size(int n) {
  if (n > kDenseCheckLimit)
    throw UnsupportedSizeError("dense verification supports n <= " +
                               std::to_string(kDenseCheckLimit));
}

}  // namespace

MatrixXd assemble_constraint_gradients(const ProblemInstance& problem,
                                       const VectorXd& x) {
  MatrixXd jac(problem.n, problem.m);
  VectorXd unit = VectorXd::Zero(problem.m);
  for (int j = 0; j < problem.m; ++j) {
    unit[j] = 1.0;
    jac.col(j) = problem.constraint_vjp(x, unit);
    unit[j] = 0.0;
  }
  if (!jac.allFinite())
    throw EvaluationError("constraint gradients evaluated to non-finite values");
  return jac;
}

MatrixXd assemble_lagrangian_hessian(const ProblemInstance& problem,
                                     const VectorXd& x,
                                     const VectorXd& lambda) {
  require_dense_size(problem.n);
  MatrixXd h(problem.n, problem.n);
  VectorXd unit = VectorXd::Zero(problem.n);
  for (int i = 0; i < problem.n; ++i) {
    unit[i] = 1.0;
    h.col(i) = problem.lagrangian_hvp(x, lambda, unit);
    unit[i] = 0.0;
  }
  if (!h.allFinite())
    throw EvaluationError("Lagrangian Hessian evaluated to non-finite values");
  return 0.5 * (h + h.transpose());
}

VectorXd estimate_multiplier(const ProblemInstance& problem, const VectorXd& x) {
  const MatrixXd jac = assemble_constraint_gradients(problem, x);
  Eigen::JacobiSVD<MatrixXd> svd(jac,
                                 Eigen::ComputeThinU | Eigen::ComputeThinV);
  const double smax = svd.singularValues().maxCoeff();
  const double smin = svd.singularValues().minCoeff();
  if (smin <= 1e-10 * smax || smax == 0.0)
    throw RankDeficiencyError(
        "constraint gradients are rank deficient at the query point "
        "(sigma_min = " + std::to_string(smin) + ")",
        smin);
  return svd.solve(-problem.objective_gradient(x));
}

namespace {

Certificate first_order_core(const ProblemInstance& problem, const VectorXd& x,
                             const VectorXd& lambda, double eps) {
  if (!(eps > 0.0)) throw ConfigError("certificate tolerance must be positive");
  Certificate cert;
  cert.lambda_used = lambda;
  cert.epsilon = eps;
  const VectorXd residual =
      problem.objective_gradient(x) + problem.constraint_vjp(x, lambda);
  if (!residual.allFinite())
    throw EvaluationError("stationarity residual is non-finite");
  cert.stat_norm = residual.norm();
  cert.feas_norm = problem.constraints(x).norm();
  cert.is_1o = cert.first_order(eps);
  return cert;
}

}  // namespace

Certificate check_1o(const ProblemInstance& problem, const VectorXd& x,
                     const VectorXd& lambda, double eps) {
  return first_order_core(problem, x, lambda, eps);
}

Certificate check_1o(const ProblemInstance& problem, const VectorXd& x,
                     double eps) {
  return first_order_core(problem, x, estimate_multiplier(problem, x), eps);
}

Certificate check_2o(const ProblemInstance& problem, const VectorXd& x,
                     const VectorXd& lambda, double eps) {
  require_dense_size(problem.n);
  Certificate cert = first_order_core(problem, x, lambda, eps);

  const MatrixXd jac = assemble_constraint_gradients(problem, x);
  Eigen::JacobiSVD<MatrixXd> svd(jac, Eigen::ComputeFullU);
  const auto& sv = svd.singularValues();
  cert.sigma_max = sv.size() > 0 ? sv.maxCoeff() : 0.0;
  cert.sigma_min = sv.size() > 0 ? sv.minCoeff() : 0.0;
  cert.rank_tolerance = 1e-10 * cert.sigma_max;

  int rank = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv[i] > cert.rank_tolerance) ++rank;
  cert.null_space_dim = problem.n - rank;

  if (cert.null_space_dim == 0) {
    // Empty tangent space; the curvature condition is vacuous.
    cert.reduced_min_eig = std::numeric_limits<double>::infinity();
    cert.is_2o = cert.is_1o;
    return cert;
  }

  const MatrixXd null_basis = svd.matrixU().rightCols(cert.null_space_dim);
  const MatrixXd hess = assemble_lagrangian_hessian(problem, x, lambda);
  const MatrixXd reduced =
      null_basis.transpose() * hess * null_basis;
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(
      0.5 * (reduced + reduced.transpose()));
  cert.reduced_min_eig = eig.eigenvalues().minCoeff();
  cert.is_2o = cert.is_1o && *cert.reduced_min_eig >= -eps;
  return cert;
}

Certificate check_2o(const ProblemInstance& problem, const VectorXd& x,
                     double eps) {
  return check_2o(problem, x, estimate_multiplier(problem, x), eps);
}

std::pair<bool, double> check_subproblem_2o(const ProxSubproblem& sub,
                                            const VectorXd& x, double eps_H) {
  const int n = sub.problem->n;
  require_dense_size(n);
  MatrixXd h(n, n);
  VectorXd unit = VectorXd::Zero(n);
  for (int i = 0; i < n; ++i) {
    unit[i] = 1.0;
    h.col(i) = prox_hvp(sub, x, unit);
    unit[i] = 0.0;
  }
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(0.5 * (h + h.transpose()));
  const double lam_min = eig.eigenvalues().minCoeff();
  return {lam_min >= -eps_H, lam_min};
}

}  // namespace proxal
