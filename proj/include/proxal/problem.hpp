#pragma once

#include <Eigen/Core>
#include <functional>
#include <optional>
#include <string>

namespace proxal {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Equality-constrained problem: minimize f(x) subject to c(x) = 0 with
/// c : R^n -> R^m. Everything is exposed through black-box evaluators so the
/// solver stays matrix-free. The constraint gradient matrix is n x m, with
/// the gradient of c_i in column i.
struct ProblemInstance {
  int n = 0;  ///< decision dimension
  int m = 0;  ///< number of equality constraints, m <= n

  std::function<double(const VectorXd&)> objective;
  std::function<VectorXd(const VectorXd&)> objective_gradient;
  std::function<VectorXd(const VectorXd&)> constraints;

  /// (x, v in R^m) -> sum_i v_i * grad c_i(x) in R^n.
  std::function<VectorXd(const VectorXd&, const VectorXd&)> constraint_vjp;

  /// (x, d in R^n) -> directional derivative of c along d, in R^m.
  std::function<VectorXd(const VectorXd&, const VectorXd&)> constraint_jvp;

  /// (x, w in R^m, d in R^n) -> (hess f(x) + sum_i w_i hess c_i(x)) d.
  std::function<VectorXd(const VectorXd&, const VectorXd&, const VectorXd&)>
      lagrangian_hvp;

  std::string name;
};

/// Throws ConfigError when dimensions or evaluators are missing/inconsistent.
void validate(const ProblemInstance& problem);

/// Known problem constants for the penalty threshold formula. Fields left
/// unset are "unknown"; formulas that need them raise MissingConstantError.
struct ConstantsLedger {
  std::optional<double> grad_f_bound;       // M_f
  std::optional<double> grad_f_lipschitz;   // L_f
  std::optional<double> jacobian_bound;     // M_c
  std::optional<double> jacobian_lipschitz; // L_c
  std::optional<double> sigma_min;          // sigma, > 0
  std::optional<double> rho0;
  std::optional<double> feasibility_budget; // C_0
  std::optional<double> residual_energy;    // R, >= 1
  std::optional<double> lambda0_norm;

  /// Checks the range constraints on whichever fields are present.
  void validate() const;
};

/// f(x) = b'x subject to |x|^2 = 1. Global minimizer -b/|b| with multiplier
/// |b|/2; the antipode is first-order stationary but not second-order.
ProblemInstance make_sphere_linear(int n, const VectorXd& b);

/// f(x) = x'Qx/2 - p'x subject to Ax = b. A must have full row rank
/// (smallest singular value above 1e-10); construction checks this by SVD.
ProblemInstance make_linear_qp(const MatrixXd& Q, const VectorXd& p,
                               const MatrixXd& A, const VectorXd& b);

/// Chained Rosenbrock objective on the sphere of radius sqrt(n), so the
/// all-ones point is feasible and globally optimal. n must be even.
ProblemInstance make_rosenbrock_sphere(int n);

}  // namespace proxal
