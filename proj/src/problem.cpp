#include "proxal/problem.hpp"

#include <Eigen/SVD>
#include <cmath>

#include "proxal/errors.hpp"

namespace proxal {

void validate(const ProblemInstance& problem) {
  if (problem.n <= 0) throw ConfigError("problem dimension n must be positive");
  if (problem.m <= 0) throw ConfigError("constraint count m must be positive");
  if (problem.m > problem.n)
    throw ConfigError("constraint count m must not exceed n");
  if (!problem.objective || !problem.objective_gradient ||
      !problem.constraints || !problem.constraint_vjp ||
      !problem.constraint_jvp || !problem.lagrangian_hvp)
    throw ConfigError("problem '" + problem.name + "' is missing an evaluator");
}

void ConstantsLedger::validate() const {
  if (sigma_min && *sigma_min <= 0.0)
    throw ConfigError("constants ledger: sigma must be positive");
  if (residual_energy && *residual_energy < 1.0)
    throw ConfigError("constants ledger: R must be at least 1");
  for (const auto* field :
       {&grad_f_bound, &grad_f_lipschitz, &jacobian_bound, &jacobian_lipschitz,
        &rho0, &feasibility_budget, &lambda0_norm}) {
    if (*field && **field < 0.0)
      throw ConfigError("constants ledger fields must be nonnegative");
  }
}

ProblemInstance make_sphere_linear(int n, const VectorXd& b) {
  if (n < 2) throw ConfigError("sphere_linear requires n >= 2");
  if (b.size() != n) throw ConfigError("sphere_linear: b has wrong dimension");
  if (b.norm() == 0.0) throw ConfigError("sphere_linear: b must be nonzero");

  ProblemInstance p;
  p.n = n;
  p.m = 1;
  p.name = "sphere_linear";
  p.objective = [b](const VectorXd& x) { return b.dot(x); };
  p.objective_gradient = [b](const VectorXd&) { return b; };
  p.constraints = [](const VectorXd& x) {
    VectorXd c(1);
    c[0] = x.squaredNorm() - 1.0;
    return c;
  };
  p.constraint_vjp = [](const VectorXd& x, const VectorXd& v) {
    return VectorXd(2.0 * v[0] * x);
  };
  p.constraint_jvp = [](const VectorXd& x, const VectorXd& d) {
    VectorXd out(1);
    out[0] = 2.0 * x.dot(d);
    return out;
  };
  // hess f = 0, hess c = 2 I.
  p.lagrangian_hvp = [](const VectorXd&, const VectorXd& w, const VectorXd& d) {
    return VectorXd(2.0 * w[0] * d);
  };
  return p;
}

ProblemInstance make_linear_qp(const MatrixXd& Q, const VectorXd& p_vec,
                               const MatrixXd& A, const VectorXd& b) {
  const int n = static_cast<int>(Q.rows());
  const int m = static_cast<int>(A.rows());
  if (Q.cols() != n) throw ConfigError("linear_qp: Q must be square");
  if (!Q.isApprox(Q.transpose(), 1e-12))
    throw ConfigError("linear_qp: Q must be symmetric");
  if (p_vec.size() != n) throw ConfigError("linear_qp: p has wrong dimension");
  if (A.cols() != n) throw ConfigError("linear_qp: A has wrong column count");
  if (b.size() != m) throw ConfigError("linear_qp: b has wrong dimension");
  if (m < 1 || m > n) throw ConfigError("linear_qp: need 1 <= m <= n");

  Eigen::JacobiSVD<MatrixXd> svd(A);
  const double smin = svd.singularValues().minCoeff();
  if (smin <= 1e-10)
    throw ConfigError("linear_qp: A is row rank deficient (sigma_min = " +
                      std::to_string(smin) + ")");

  ProblemInstance prob;
  prob.n = n;
  prob.m = m;
  prob.name = "linear_qp";
  prob.objective = [Q, p_vec](const VectorXd& x) {
    return 0.5 * x.dot(Q * x) - p_vec.dot(x);
  };
  prob.objective_gradient = [Q, p_vec](const VectorXd& x) {
    return VectorXd(Q * x - p_vec);
  };
  prob.constraints = [A, b](const VectorXd& x) { return VectorXd(A * x - b); };
  prob.constraint_vjp = [A](const VectorXd&, const VectorXd& v) {
    return VectorXd(A.transpose() * v);
  };
  prob.constraint_jvp = [A](const VectorXd&, const VectorXd& d) {
    return VectorXd(A * d);
  };
  prob.lagrangian_hvp = [Q](const VectorXd&, const VectorXd&,
                            const VectorXd& d) { return VectorXd(Q * d); };
  return prob;
}

namespace {

// Chained Rosenbrock over consecutive pairs (x_{2i}, x_{2i+1}), 0-based.
double rosenbrock_value(const VectorXd& x) {
  double total = 0.0;
  for (int i = 0; i + 1 < x.size(); i += 2) {
    const double a = x[i];
    const double b = x[i + 1];
    const double t = b - a * a;
    total += 100.0 * t * t + (1.0 - a) * (1.0 - a);
  }
  return total;
}

VectorXd rosenbrock_gradient(const VectorXd& x) {
  VectorXd g = VectorXd::Zero(x.size());
  for (int i = 0; i + 1 < x.size(); i += 2) {
    const double a = x[i];
    const double b = x[i + 1];
    const double t = b - a * a;
    g[i] = -400.0 * a * t - 2.0 * (1.0 - a);
    g[i + 1] = 200.0 * t;
  }
  return g;
}

// Block-diagonal Hessian of the chained Rosenbrock; blocks are 2x2.
VectorXd rosenbrock_hvp(const VectorXd& x, const VectorXd& d) {
  VectorXd out = VectorXd::Zero(x.size());
  for (int i = 0; i + 1 < x.size(); i += 2) {
    const double a = x[i];
    const double b = x[i + 1];
    const double haa = -400.0 * (b - a * a) + 800.0 * a * a + 2.0;
    const double hab = -400.0 * a;
    out[i] = haa * d[i] + hab * d[i + 1];
    out[i + 1] = hab * d[i] + 200.0 * d[i + 1];
  }
  return out;
}

}  // namespace

ProblemInstance make_rosenbrock_sphere(int n) {
  if (n < 2 || n % 2 != 0)
    throw ConfigError("rosenbrock_sphere requires even n >= 2");
  const double radius_sq = static_cast<double>(n);

  ProblemInstance p;
  p.n = n;
  p.m = 1;
  p.name = "rosenbrock_sphere";
  p.objective = rosenbrock_value;
  p.objective_gradient = rosenbrock_gradient;
  p.constraints = [radius_sq](const VectorXd& x) {
    VectorXd c(1);
    c[0] = x.squaredNorm() - radius_sq;
    return c;
  };
  p.constraint_vjp = [](const VectorXd& x, const VectorXd& v) {
    return VectorXd(2.0 * v[0] * x);
  };
  p.constraint_jvp = [](const VectorXd& x, const VectorXd& d) {
    VectorXd out(1);
    out[0] = 2.0 * x.dot(d);
    return out;
  };
  p.lagrangian_hvp = [](const VectorXd& x, const VectorXd& w,
                        const VectorXd& d) {
    return VectorXd(rosenbrock_hvp(x, d) + 2.0 * w[0] * d);
  };
  return p;
}

}  // namespace proxal
