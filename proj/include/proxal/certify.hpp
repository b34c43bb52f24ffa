#pragma once

#include <optional>

#include "proxal/aug_lagrangian.hpp"
#include "proxal/problem.hpp"

namespace proxal {

/// Outcome of an optimality check at a candidate point. The verdicts are
/// monotone in the tolerance: first_order(e1) implies first_order(e2) for
/// e2 >= e1, and likewise for second_order.
struct Certificate {
  VectorXd lambda_used;
  double stat_norm = 0.0;  ///< | grad f + grad c * lambda |
  double feas_norm = 0.0;  ///< | c(x) |
  std::optional<double> reduced_min_eig;  ///< set when a second-order check ran
  double epsilon = 0.0;    ///< tolerance the stored verdicts refer to
  bool is_1o = false;
  bool is_2o = false;
  int null_space_dim = 0;  ///< n - rank(grad c(x)')
  double sigma_min = 0.0;
  double sigma_max = 0.0;
  double rank_tolerance = 0.0;

  bool first_order(double eps) const {
    return stat_norm <= eps && feas_norm <= eps;
  }
  bool second_order(double eps) const {
    return first_order(eps) &&
           (!reduced_min_eig || *reduced_min_eig >= -eps);
  }
};

/// Assembles grad c(x) column by column from m unit products. n x m.
MatrixXd assemble_constraint_gradients(const ProblemInstance& problem,
                                       const VectorXd& x);

/// Assembles hess f + sum_i lambda_i hess c_i from n products. Symmetrized.
MatrixXd assemble_lagrangian_hessian(const ProblemInstance& problem,
                                     const VectorXd& x, const VectorXd& lambda);

/// Least-squares multiplier: argmin over lambda of |grad f + grad c * lambda|.
/// Requires full column rank of grad c(x); throws RankDeficiencyError below
/// sigma_min > 1e-10 * sigma_max.
VectorXd estimate_multiplier(const ProblemInstance& problem, const VectorXd& x);

/// First-order check with a caller-supplied multiplier.
Certificate check_1o(const ProblemInstance& problem, const VectorXd& x,
                     const VectorXd& lambda, double eps);

/// First-order check with the least-squares multiplier witness.
Certificate check_1o(const ProblemInstance& problem, const VectorXd& x,
                     double eps);

/// Full check: first-order residuals plus the minimum eigenvalue of the
/// Lagrangian Hessian reduced to the constraint tangent space
/// { d : grad c(x)' d = 0 }. Dense verification; dimension capped.
Certificate check_2o(const ProblemInstance& problem, const VectorXd& x,
                     const VectorXd& lambda, double eps);
Certificate check_2o(const ProblemInstance& problem, const VectorXd& x,
                     double eps);

/// Minimum eigenvalue test for a subproblem Hessian:
/// returns (lambda_min >= -eps_H, lambda_min) for hess of the proximal
/// augmented Lagrangian at x, assembled densely.
std::pair<bool, double> check_subproblem_2o(const ProxSubproblem& sub,
                                            const VectorXd& x, double eps_H);

/// Dimension bound for dense verification.
inline constexpr int kDenseCheckLimit = 500;

}  // namespace proxal
