#include "proxal/fd_check.hpp"

#include <cmath>
#include <stdexcept>

#include "proxal/errors.hpp"

namespace proxal {

namespace {

void require_step(double h) {
  if (!(h > 0.0) || h > 1e-2)
    throw std::invalid_argument("finite-difference step must be in (0, 1e-2]");
}

void require_finite_scalar(double v, const char* what, int coord) {
  if (!std::isfinite(v))
    throw EvaluationError(std::string(what) + " returned a non-finite value",
                          coord);
}

void require_finite_vec(const VectorXd& v, const char* what) {
  for (int i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i]))
      throw EvaluationError(std::string(what) + " returned a non-finite value",
                            i);
  }
}

double relative_error(double measured, double reference) {
  return std::abs(measured - reference) / (1.0 + std::abs(reference));
}

}  // namespace

double fd_check_gradient(const ProblemInstance& problem, const VectorXd& x,
                         double h) {
  require_step(h);
  require_finite_vec(x, "query point");

  const VectorXd grad = problem.objective_gradient(x);
  require_finite_vec(grad, "objective gradient");

  // Analytic constraint gradients, one column per constraint.
  MatrixXd jac(problem.n, problem.m);
  for (int j = 0; j < problem.m; ++j) {
    VectorXd unit = VectorXd::Zero(problem.m);
    unit[j] = 1.0;
    jac.col(j) = problem.constraint_vjp(x, unit);
  }
  require_finite_vec(VectorXd(jac.reshaped()), "constraint gradients");

  double worst = 0.0;
  VectorXd xp = x, xm = x;
  for (int i = 0; i < problem.n; ++i) {
    xp[i] = x[i] + h;
    xm[i] = x[i] - h;

    const double fp = problem.objective(xp);
    const double fm = problem.objective(xm);
    require_finite_scalar(fp, "objective", i);
    require_finite_scalar(fm, "objective", i);
    worst = std::max(worst, relative_error((fp - fm) / (2.0 * h), grad[i]));

    const VectorXd cp = problem.constraints(xp);
    const VectorXd cm = problem.constraints(xm);
    require_finite_vec(cp, "constraints");
    require_finite_vec(cm, "constraints");
    for (int j = 0; j < problem.m; ++j) {
      worst = std::max(
          worst, relative_error((cp[j] - cm[j]) / (2.0 * h), jac(i, j)));
    }

    xp[i] = x[i];
    xm[i] = x[i];
  }
  return worst;
}

double fd_check_hvp(const ProblemInstance& problem, const VectorXd& x,
                    const VectorXd& w, const VectorXd& d, double h) {
  require_step(h);
  require_finite_vec(x, "query point");
  if (std::abs(d.norm() - 1.0) > 1e-8)
    throw std::invalid_argument("fd_check_hvp expects a unit direction");

  const auto weighted_gradient = [&](const VectorXd& z) {
    VectorXd g = problem.objective_gradient(z) + problem.constraint_vjp(z, w);
    require_finite_vec(g, "weighted Lagrangian gradient");
    return g;
  };

  const VectorXd analytic = problem.lagrangian_hvp(x, w, d);
  require_finite_vec(analytic, "weighted Lagrangian hvp");

  const VectorXd gp = weighted_gradient(x + h * d);
  const VectorXd gm = weighted_gradient(x - h * d);

  double worst = 0.0;
  for (int i = 0; i < problem.n; ++i) {
    const double fd = (gp[i] - gm[i]) / (2.0 * h);
    worst = std::max(worst, relative_error(fd, analytic[i]));
  }
  return worst;
}

}  // namespace proxal
