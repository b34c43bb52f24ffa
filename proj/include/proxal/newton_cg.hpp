#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <functional>

namespace proxal {

using Eigen::VectorXd;

/// Smooth unconstrained objective exposed through evaluators. hessian_vec
/// computes (hess F(x)) d without forming the Hessian.
struct UnconstrainedOracle {
  std::function<double(const VectorXd&)> value;
  std::function<VectorXd(const VectorXd&)> gradient;
  std::function<VectorXd(const VectorXd&, const VectorXd&)> hessian_vec;
  int dim = 0;
};

struct InnerTolerances {
  double eps_g = 1e-6;   ///< gradient tolerance
  double eps_H = 1e-3;   ///< Hessian (negative curvature) tolerance
  double delta = 0.01;   ///< per-call failure probability of the eigenvalue oracle
  double zeta = 0.5;     ///< CG accuracy parameter
  int max_iters = 500;
  long max_hvps = 400000;

  void validate() const;
};

enum class InnerStatus { first_order_met, second_order_met, budget_exhausted };

struct InnerResult {
  VectorXd z;            ///< terminal point
  double value = 0.0;    ///< F(z)
  double grad_norm = 0.0;
  double decrease = 0.0; ///< F(z0) - F(z), nonnegative
  int iterations = 0;
  long hvp_count = 0;
  int meo_calls = 0;
  InnerStatus status = InnerStatus::budget_exhausted;
  bool neg_curvature_certified_absent = false;

  // Diagnostics only; never used for control flow.
  double kappa = 0.0;       ///< final condition estimate (|H| + 2 eps_H)/eps_H
  long cg_product_cap = 0;  ///< per-call product cap implied by kappa
  long meo_product_cap = 0; ///< Lanczos step cap for the eigenvalue oracle
};

struct CappedCgOutcome {
  enum class Kind { newton_step, negative_curvature, budget_exhausted };
  Kind kind = Kind::budget_exhausted;
  VectorXd direction;      ///< step for newton_step, unit vector otherwise
  double curvature = 0.0;  ///< d'Hd / |d|^2 for negative_curvature
  double residual_norm = 0.0;
  long hvps = 0;
  int iterations = 0;
  double max_hnorm_seen = 0.0;  ///< largest |Hp|/|p| encountered
};

/// Conjugate gradient on the shifted system (H + 2 eps_H I) d = -g with a
/// per-call product cap. Either returns an approximate Newton step whose
/// shifted-system residual is below zeta_hat * |g| (zeta_hat = zeta/(3 kappa))
/// or a unit direction of certified negative curvature d'Hd <= -eps_H.
/// Requires |g| > 0 and budget >= 1.
CappedCgOutcome capped_cg(
    const std::function<VectorXd(const VectorXd&)>& hvp, const VectorXd& g,
    double eps_H, double zeta, double kappa, long budget);

/// Product cap for one capped CG call, from the condition estimate kappa.
long capped_cg_product_bound(int n, double kappa, double zeta);

struct MeoOutcome {
  bool certified = false;  ///< claims hess >= -eps_H I
  VectorXd direction;      ///< unit vector, set when !certified
  double curvature = 0.0;  ///< d'Hd, at most -eps_H/2 when !certified
  long hvps = 0;
};

/// Randomized Lanczos minimum-eigenvalue oracle. Starts from a uniformly
/// random unit vector and runs at most
///   N = min{n, 1 + ceil(C * eps_H^{-1/2})},  C = ln(2.75 n / delta^2)/2
/// steps. Either certifies H >= -eps_H I (wrong with probability at most
/// delta) or returns a direction of curvature at most -eps_H/2.
MeoOutcome min_eig_oracle(
    const std::function<VectorXd(const VectorXd&)>& hvp, int n, double eps_H,
    double delta, std::uint64_t seed);

long meo_product_bound(int n, double eps_H, double delta);

/// Minimizes F from z0 until the gradient norm falls below tol.eps_g and,
/// when second_order is set, a minimum-eigenvalue certificate
/// hess F(z) >= -eps_H I is obtained. Every accepted step decreases F, so a
/// warm-started call never increases the objective. Steps come from capped
/// CG (Newton directions, Armijo backtracking from step 1) or from negative
/// curvature directions (step length |curvature| / L_H with a cubic decrease
/// test; L_H starts at 1 and doubles on failure, the decrease requirement
/// relaxes tenfold per failed attempt).
InnerResult newton_cg_solve(const UnconstrainedOracle& oracle,
                            const VectorXd& z0, const InnerTolerances& tol,
                            bool second_order, std::uint64_t seed);

}  // namespace proxal
