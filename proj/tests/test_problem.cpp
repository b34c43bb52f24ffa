#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "proxal/certify.hpp"
#include "proxal/errors.hpp"
#include "proxal/fd_check.hpp"
#include "proxal/problem.hpp"
#include "proxal/rng.hpp"
#include "support.hpp"

using namespace proxal;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

VectorXd vec2(double a, double b) {
  VectorXd v(2);
  v << a, b;
  return v;
}

std::vector<ProblemInstance> builtin_suite() {
  std::vector<ProblemInstance> suite;
  suite.push_back(make_sphere_linear(2, vec2(1.0, 0.0)));
  Rng rng(77);
  suite.push_back(make_sphere_linear(5, rng.gaussian_vector(5)));
  {
    MatrixXd q = MatrixXd::Identity(2, 2);
    MatrixXd a(1, 2);
    a << 1.0, 1.0;
    VectorXd b(1);
    b << 1.0;
    suite.push_back(make_linear_qp(q, VectorXd::Zero(2), a, b));
  }
  {
    Rng local(123);
    const int n = 4, m = 2;
    MatrixXd q(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) q(i, j) = local.normal();
    q = MatrixXd(0.5 * (q + q.transpose())) + 2.0 * MatrixXd::Identity(n, n);
    MatrixXd a(m, n);
    for (int i = 0; i < m; ++i) a.row(i) = local.gaussian_vector(n).transpose();
    suite.push_back(
        make_linear_qp(q, local.gaussian_vector(n), a, local.gaussian_vector(m)));
  }
  suite.push_back(make_rosenbrock_sphere(4));
  return suite;
}

}  // namespace

TEST_CASE("sphere_linear matches its closed-form KKT pair") {
  // KKT solve: grad f + lambda grad c = b + 2 lambda x = 0 on |x| = 1
  // gives x* = -b/|b|, lambda* = |b|/2.
  const auto problem = make_sphere_linear(2, vec2(1.0, 0.0));
  const VectorXd x_star = vec2(-1.0, 0.0);
  VectorXd lambda_star(1);
  lambda_star << 0.5;

  const Certificate cert = check_1o(problem, x_star, lambda_star, 1e-10);
  CHECK(cert.is_1o);
  CHECK(cert.stat_norm <= 1e-14);
  CHECK(cert.feas_norm <= 1e-14);

  // The antipode is stationary with lambda = -1/2 but has tangent curvature
  // d'(2 lambda I)d = -1 along d = (0, 1).
  VectorXd lambda_neg(1);
  lambda_neg << -0.5;
  const Certificate saddle = check_2o(problem, vec2(1.0, 0.0), lambda_neg, 1e-10);
  CHECK(saddle.is_1o);
  CHECK_FALSE(saddle.is_2o);
  CHECK(*saddle.reduced_min_eig == doctest::Approx(-1.0).epsilon(1e-10));

  // LICQ margin on the sphere: |grad c| = |2x| = 2.
  const MatrixXd jac = assemble_constraint_gradients(problem, vec2(0.6, -0.8));
  CHECK(jac.norm() == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("linear_qp factory checks rank and reproduces KKT pairs") {
  MatrixXd q = MatrixXd::Identity(2, 2);
  MatrixXd a(1, 2);
  a << 1.0, 1.0;
  VectorXd b(1);
  b << 1.0;
  const auto problem = make_linear_qp(q, VectorXd::Zero(2), a, b);

  // x + lambda A' = 0, Ax = 1 gives x* = (1/2, 1/2), lambda* = -1/2.
  VectorXd lambda_star(1);
  lambda_star << -0.5;
  const Certificate cert = check_1o(problem, vec2(0.5, 0.5), lambda_star, 1e-10);
  CHECK(cert.is_1o);

  // Origin is feasible and unconstrained-optimal for Q = I, p = 0, A = I.
  const auto identity_qp =
      make_linear_qp(MatrixXd::Identity(2, 2), VectorXd::Zero(2),
                     MatrixXd::Identity(2, 2), VectorXd::Zero(2));
  const Certificate origin =
      check_1o(identity_qp, VectorXd::Zero(2), VectorXd::Zero(2), 1e-12);
  CHECK(origin.is_1o);

  // Indefinite Q restricted to null(A) stays positive: reduced eig = 1.
  MatrixXd q_ind(2, 2);
  q_ind << 1.0, 0.0, 0.0, -1.0;
  MatrixXd a2(1, 2);
  a2 << 0.0, 1.0;
  const auto qp2 =
      make_linear_qp(q_ind, VectorXd::Zero(2), a2, VectorXd::Zero(1));
  const Certificate reduced =
      check_2o(qp2, VectorXd::Zero(2), VectorXd::Zero(1), 1e-10);
  CHECK(reduced.is_2o);
  CHECK(*reduced.reduced_min_eig == doctest::Approx(1.0).epsilon(1e-10));

  // Rank-deficient A must be rejected at construction.
  MatrixXd a_bad(2, 2);
  a_bad << 1.0, 1.0, 1.0, 1.0;
  CHECK_THROWS_AS(make_linear_qp(MatrixXd::Identity(2, 2), VectorXd::Zero(2),
                                 a_bad, VectorXd::Zero(2)),
                  ConfigError);
}

TEST_CASE("rosenbrock_sphere is feasible and optimal at the all-ones point") {
  const auto problem = make_rosenbrock_sphere(4);
  const VectorXd ones = VectorXd::Ones(4);
  CHECK(problem.objective(ones) == doctest::Approx(0.0));
  CHECK(problem.constraints(ones).norm() == doctest::Approx(0.0));
  CHECK(fd_check_gradient(problem, 0.9 * ones, 1e-6) <= 1e-5);
}

TEST_CASE("fd_check_gradient on trivial objectives") {
  // Constant objective: error is pure roundoff.
  ProblemInstance constant = make_sphere_linear(2, vec2(1.0, 0.0));
  constant.objective = [](const VectorXd&) { return 3.0; };
  constant.objective_gradient = [](const VectorXd& x) {
    return VectorXd(VectorXd::Zero(x.size()));
  };
  CHECK(fd_check_gradient(constant, vec2(0.4, -0.2), 1e-6) <= 1e-10);

  // f = |x|^2/2 has exact central differences up to roundoff.
  ProblemInstance quad = make_sphere_linear(2, vec2(1.0, 0.0));
  quad.objective = [](const VectorXd& x) { return 0.5 * x.squaredNorm(); };
  quad.objective_gradient = [](const VectorXd& x) { return x; };
  CHECK(fd_check_gradient(quad, vec2(1.0, 2.0), 1e-6) <= 1e-8);

  CHECK(fd_check_gradient(make_sphere_linear(2, vec2(1.0, 0.0)),
                          vec2(0.3, -0.4), 1e-6) <= 1e-6);

  CHECK_THROWS_AS(fd_check_gradient(quad, vec2(0.0, 0.0), 0.5),
                  std::invalid_argument);
}

TEST_CASE("fd_check_hvp on linear, quadratic, and sphere problems") {
  // Linear f and c: the weighted Hessian is identically zero.
  MatrixXd a(1, 2);
  a << 1.0, 2.0;
  const auto linear = make_linear_qp(MatrixXd::Zero(2, 2), vec2(1.0, 1.0), a,
                                     VectorXd::Zero(1));
  VectorXd w(1);
  w << 0.7;
  CHECK(fd_check_hvp(linear, vec2(0.2, 0.3), w, vec2(1.0, 0.0), 1e-6) <= 1e-10);

  // Constant diagonal Hessian: product along e1 is (1, 0).
  MatrixXd diag(2, 2);
  diag << 1.0, 0.0, 0.0, 2.0;
  const auto quad =
      make_linear_qp(diag, VectorXd::Zero(2), a, VectorXd::Zero(1));
  VectorXd w0(1);
  w0 << 0.0;
  CHECK(fd_check_hvp(quad, vec2(0.5, 0.5), w0, vec2(1.0, 0.0), 1e-6) <= 1e-8);

  // Sphere constraint with weight 1/2: hess = 0 + 0.5 * 2I = I, so the
  // product along e2 is e2.
  const auto sphere = make_sphere_linear(2, vec2(1.0, 0.0));
  VectorXd w_half(1);
  w_half << 0.5;
  const VectorXd product =
      sphere.lagrangian_hvp(vec2(0.3, 0.1), w_half, vec2(0.0, 1.0));
  CHECK((product - vec2(0.0, 1.0)).norm() <= 1e-12);
  CHECK(fd_check_hvp(sphere, vec2(0.3, 0.1), w_half, vec2(0.0, 1.0), 1e-6) <=
        1e-6);

  CHECK_THROWS_AS(
      fd_check_hvp(sphere, vec2(0.3, 0.1), w_half, vec2(0.0, 2.0), 1e-6),
      std::invalid_argument);
}

TEST_CASE("non-finite evaluator output raises an evaluation failure") {
  ProblemInstance bad = make_sphere_linear(2, vec2(1.0, 0.0));
  bad.objective = [](const VectorXd& x) {
    return x[0] > 0.35 ? std::numeric_limits<double>::quiet_NaN() : x[0];
  };
  CHECK_THROWS_AS(fd_check_gradient(bad, vec2(0.349999, 0.0), 1e-3),
                  EvaluationError);
}

TEST_CASE("adjointness of the two Jacobian products") {
  Rng rng(2024);
  for (const auto& problem : builtin_suite()) {
    for (int trial = 0; trial < 100; ++trial) {
      const VectorXd x = rng.gaussian_vector(problem.n);
      const VectorXd v = rng.gaussian_vector(problem.m);
      const VectorXd d = rng.gaussian_vector(problem.n);
      const double lhs = problem.constraint_vjp(x, v).dot(d);
      const double rhs = v.dot(problem.constraint_jvp(x, d));
      CHECK(std::abs(lhs - rhs) <= 1e-12 * (1.0 + std::abs(rhs)));
    }
  }
}

TEST_CASE("weighted Hessian products are symmetric bilinear forms") {
  Rng rng(501);
  for (const auto& problem : builtin_suite()) {
    for (int trial = 0; trial < 100; ++trial) {
      const VectorXd x = rng.gaussian_vector(problem.n);
      const VectorXd w = rng.gaussian_vector(problem.m);
      const VectorXd d1 = rng.gaussian_vector(problem.n);
      const VectorXd d2 = rng.gaussian_vector(problem.n);
      const double lhs = problem.lagrangian_hvp(x, w, d1).dot(d2);
      const double rhs = d1.dot(problem.lagrangian_hvp(x, w, d2));
      CHECK(std::abs(lhs - rhs) <= 1e-10 * (1.0 + std::abs(rhs)));
    }
  }
}

TEST_CASE("all built-ins pass derivative verification at random points") {
  Rng rng(99);
  for (const auto& problem : builtin_suite()) {
    for (int trial = 0; trial < 20; ++trial) {
      VectorXd x(problem.n);
      for (int i = 0; i < problem.n; ++i) x[i] = rng.uniform(-1.5, 1.5);
      CHECK(fd_check_gradient(problem, x, 1e-6) <= 1e-5);
      const VectorXd w = rng.gaussian_vector(problem.m);
      CHECK(fd_check_hvp(problem, x, w, rng.unit_vector(problem.n), 1e-6) <=
            1e-5);
    }
  }
}

TEST_CASE("constants ledger range checks") {
  ConstantsLedger ledger;
  ledger.sigma_min = 0.0;
  CHECK_THROWS_AS(ledger.validate(), ConfigError);
  ledger.sigma_min = 1.0;
  ledger.residual_energy = 0.5;
  CHECK_THROWS_AS(ledger.validate(), ConfigError);
  ledger.residual_energy = 1.0;
  CHECK_NOTHROW(ledger.validate());
}
