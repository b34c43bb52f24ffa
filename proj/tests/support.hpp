#pragma once

#include <Eigen/Dense>

#include "proxal/problem.hpp"
#include "proxal/rng.hpp"
#include "proxal/run_record.hpp"

namespace proxal::testing {

/// Random problem with quadratic objective and quadratic constraints:
///   f(x)   = x'Qx/2 + p'x
///   c_i(x) = x'B_i x/2 + a_i'x + d_i
/// The offsets d_i are chosen so a drawn point xbar is feasible, which keeps
/// the feasible set nonempty and the constraint gradients generic there.
struct QuadraticConstrainedProblem {
  ProblemInstance problem;
  Eigen::MatrixXd Q;
  std::vector<Eigen::MatrixXd> B;
  Eigen::MatrixXd A;  ///< rows a_i'
  Eigen::VectorXd p, d, xbar;
};

inline QuadraticConstrainedProblem make_random_quadratic(int n, int m,
                                                         Rng& rng,
                                                         double curvature_lo,
                                                         double curvature_hi) {
  QuadraticConstrainedProblem out;
  Eigen::MatrixXd raw(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) raw(i, j) = rng.normal();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(raw);
  Eigen::MatrixXd basis = qr.householderQ();
  Eigen::VectorXd eigs(n);
  for (int i = 0; i < n; ++i)
    eigs[i] = rng.uniform(curvature_lo, curvature_hi);
  out.Q = basis * eigs.asDiagonal() * basis.transpose();
  out.Q = 0.5 * (out.Q + out.Q.transpose());

  out.p = rng.gaussian_vector(n);
  out.A.resize(m, n);
  out.d.resize(m);
  out.xbar = rng.gaussian_vector(n) * 0.5;
  for (int i = 0; i < m; ++i) {
    Eigen::MatrixXd b(n, n);
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < n; ++c) b(r, c) = rng.normal();
    b = 0.25 * (b + b.transpose());
    out.B.push_back(b);
    out.A.row(i) = rng.gaussian_vector(n).transpose();
    out.d[i] = -(0.5 * out.xbar.dot(b * out.xbar) + out.A.row(i) * out.xbar);
  }

  const Eigen::MatrixXd Q = out.Q;
  const Eigen::VectorXd p = out.p;
  const std::vector<Eigen::MatrixXd> B = out.B;
  const Eigen::MatrixXd A = out.A;
  const Eigen::VectorXd d = out.d;

  ProblemInstance& prob = out.problem;
  prob.n = n;
  prob.m = m;
  prob.name = "random_quadratic";
  prob.objective = [Q, p](const Eigen::VectorXd& x) {
    return 0.5 * x.dot(Q * x) + p.dot(x);
  };
  prob.objective_gradient = [Q, p](const Eigen::VectorXd& x) {
    return Eigen::VectorXd(Q * x + p);
  };
  prob.constraints = [B, A, d](const Eigen::VectorXd& x) {
    Eigen::VectorXd c(A.rows());
    for (int i = 0; i < A.rows(); ++i)
      c[i] = 0.5 * x.dot(B[static_cast<std::size_t>(i)] * x) +
             A.row(i).dot(x) + d[i];
    return c;
  };
  prob.constraint_vjp = [B, A](const Eigen::VectorXd& x,
                               const Eigen::VectorXd& v) {
    Eigen::VectorXd out_vec = A.transpose() * v;
    for (int i = 0; i < A.rows(); ++i)
      out_vec += v[i] * (B[static_cast<std::size_t>(i)] * x);
    return out_vec;
  };
  prob.constraint_jvp = [B, A](const Eigen::VectorXd& x,
                               const Eigen::VectorXd& dvec) {
    Eigen::VectorXd out_vec = A * dvec;
    for (int i = 0; i < A.rows(); ++i)
      out_vec[i] += x.dot(B[static_cast<std::size_t>(i)] * dvec);
    return out_vec;
  };
  prob.lagrangian_hvp = [Q, B](const Eigen::VectorXd&, const Eigen::VectorXd& w,
                               const Eigen::VectorXd& dvec) {
    Eigen::VectorXd out_vec = Q * dvec;
    for (int i = 0; i < w.size(); ++i)
      out_vec += w[i] * (B[static_cast<std::size_t>(i)] * dvec);
    return out_vec;
  };
  return out;
}

}  // namespace proxal::testing
