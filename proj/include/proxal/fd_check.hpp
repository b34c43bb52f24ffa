#pragma once

#include "proxal/problem.hpp"

namespace proxal {

/// Central-difference verification of the objective gradient and constraint
/// Jacobian at x. Returns the maximum relative error over all coordinates of
/// f and each c_i, with denominator 1 + |analytic value|.
/// h must lie in (0, 1e-2].
double fd_check_gradient(const ProblemInstance& problem, const VectorXd& x,
                         double h);

/// Compares the weighted Lagrangian Hessian-vector product against central
/// differences of the gradient map x -> grad f(x) + sum_i w_i grad c_i(x)
/// along the unit direction d.
double fd_check_hvp(const ProblemInstance& problem, const VectorXd& x,
                    const VectorXd& w, const VectorXd& d, double h);

}  // namespace proxal
