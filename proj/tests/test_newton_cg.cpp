#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "proxal/newton_cg.hpp"
#include "proxal/rng.hpp"

using namespace proxal;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

std::function<VectorXd(const VectorXd&)> matrix_hvp(const MatrixXd& h) {
  return [h](const VectorXd& v) { return VectorXd(h * v); };
}

UnconstrainedOracle quadratic_oracle(const MatrixXd& h, const VectorXd& g0) {
  UnconstrainedOracle oracle;
  oracle.dim = static_cast<int>(h.rows());
  oracle.value = [h, g0](const VectorXd& z) {
    return 0.5 * z.dot(h * z) + g0.dot(z);
  };
  oracle.gradient = [h, g0](const VectorXd& z) { return VectorXd(h * z + g0); };
  oracle.hessian_vec = [h](const VectorXd&, const VectorXd& d) {
    return VectorXd(h * d);
  };
  return oracle;
}

}  // namespace

TEST_CASE("capped_cg solves a definite shifted system") {
  const MatrixXd h = MatrixXd::Identity(2, 2);
  VectorXd g(2);
  g << 1.0, 0.0;
  const double eps_H = 0.1;
  const auto out = capped_cg(matrix_hvp(h), g, eps_H, 0.5, 2.0, 1000);
  REQUIRE(out.kind == CappedCgOutcome::Kind::newton_step);
  // Exact solution of (1 + 2 eps_H) d = -g.
  const VectorXd expected = -g / 1.2;
  CHECK((out.direction - expected).norm() <= 1e-10);
}

TEST_CASE("capped_cg certifies negative curvature") {
  MatrixXd h(2, 2);
  h << 1.0, 0.0, 0.0, -3.0;
  // Oracle: the true minimum eigenvalue is -3, well below -2 eps_H.
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(h);
  REQUIRE(eig.eigenvalues().minCoeff() == doctest::Approx(-3.0));

  VectorXd g(2);
  g << 1.0, 1.0;
  const double eps_H = 0.1;
  const auto out = capped_cg(matrix_hvp(h), g, eps_H, 0.5, 40.0, 1000);
  REQUIRE(out.kind == CappedCgOutcome::Kind::negative_curvature);
  CHECK(out.direction.norm() == doctest::Approx(1.0));
  const double quad = out.direction.dot(h * out.direction);
  CHECK(quad < 0.0);
  CHECK(quad <= -eps_H);
  CHECK(out.curvature == doctest::Approx(quad).epsilon(1e-12));
}

TEST_CASE("capped_cg rejects a zero gradient") {
  const MatrixXd h = MatrixXd::Identity(2, 2);
  CHECK_THROWS_AS(
      capped_cg(matrix_hvp(h), VectorXd::Zero(2), 0.1, 0.5, 2.0, 100),
      std::invalid_argument);
}

TEST_CASE("capped_cg respects the product cap") {
  Rng rng(31);
  const int n = 30;
  MatrixXd raw(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) raw(i, j) = rng.normal();
  const MatrixXd h = raw.transpose() * raw + MatrixXd::Identity(n, n);
  const VectorXd g = rng.gaussian_vector(n);

  long products = 0;
  const auto counting = [&](const VectorXd& v) {
    ++products;
    return VectorXd(h * v);
  };
  const double kappa = 50.0;
  const auto out = capped_cg(counting, g, 0.01, 0.5, kappa, 1000000);
  CHECK(products == out.hvps);
  CHECK(out.hvps <= capped_cg_product_bound(n, kappa, 0.5));
  CHECK(out.hvps <= n + 2);
}

TEST_CASE("min_eig_oracle certifies definite matrices") {
  const MatrixXd h = MatrixXd::Identity(3, 3);
  const auto out = min_eig_oracle(matrix_hvp(h), 3, 0.1, 0.05, 7);
  CHECK(out.certified);
  CHECK(out.hvps <= meo_product_bound(3, 0.1, 0.05));
}

TEST_CASE("min_eig_oracle finds dominant negative curvature") {
  MatrixXd h = MatrixXd::Zero(3, 3);
  h(0, 0) = 1.0;
  h(1, 1) = 2.0;
  h(2, 2) = -3.0;
  // Oracle eigendecomposition pins the target.
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(h);
  REQUIRE(eig.eigenvalues().minCoeff() == doctest::Approx(-3.0));

  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto out = min_eig_oracle(matrix_hvp(h), 3, 0.1, 0.05, seed);
    REQUIRE_FALSE(out.certified);
    CHECK(out.curvature <= -1.5);
    // Reported curvature matches the Rayleigh quotient of the direction.
    const double rayleigh = out.direction.dot(h * out.direction);
    CHECK(std::abs(rayleigh - out.curvature) <= 1e-8);
  }
}

TEST_CASE("min_eig_oracle scalar case") {
  MatrixXd h(1, 1);
  h << -0.04;
  const auto out = min_eig_oracle(matrix_hvp(h), 1, 0.1, 0.05, 3);
  CHECK(out.certified);  // -0.04 >= -0.1
}

TEST_CASE("newton_cg_solve minimizes a convex quadratic to second order") {
  const MatrixXd h = MatrixXd::Identity(2, 2);
  const auto oracle = quadratic_oracle(h, VectorXd::Zero(2));
  VectorXd z0(2);
  z0 << 1.0, 1.0;
  InnerTolerances tol;
  tol.eps_g = 1e-8;
  tol.eps_H = 0.1;
  const InnerResult res = newton_cg_solve(oracle, z0, tol, true, 42);
  CHECK(res.status == InnerStatus::second_order_met);
  CHECK(res.z.norm() <= 1e-7);
  CHECK(res.grad_norm <= tol.eps_g);
  CHECK(res.decrease == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(res.neg_curvature_certified_absent);
}

TEST_CASE("newton_cg_solve escapes a saddle of the scalar double well") {
  // F(z) = z^4/4 - z^2/2 has F'(0) = 0, F''(0) = -1; the minimizers are
  // z = +-1 where F'' = 2.
  UnconstrainedOracle oracle;
  oracle.dim = 1;
  oracle.value = [](const VectorXd& z) {
    const double t = z[0];
    return 0.25 * t * t * t * t - 0.5 * t * t;
  };
  oracle.gradient = [](const VectorXd& z) {
    VectorXd g(1);
    g[0] = z[0] * z[0] * z[0] - z[0];
    return g;
  };
  oracle.hessian_vec = [](const VectorXd& z, const VectorXd& d) {
    VectorXd out(1);
    out[0] = (3.0 * z[0] * z[0] - 1.0) * d[0];
    return out;
  };

  InnerTolerances tol;
  tol.eps_g = 1e-6;
  tol.eps_H = 0.1;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const InnerResult res =
        newton_cg_solve(oracle, VectorXd::Zero(1), tol, true, seed);
    REQUIRE(res.status == InnerStatus::second_order_met);
    CHECK(std::abs(std::abs(res.z[0]) - 1.0) <= 1e-4);
    CHECK(res.grad_norm <= tol.eps_g);
    CHECK(res.meo_calls >= 1);
  }
}

TEST_CASE("newton_cg_solve reports budget exhaustion on unbounded descent") {
  // F = -|z|^2/2 is unbounded below; the iteration budget must trip.
  UnconstrainedOracle oracle;
  oracle.dim = 2;
  oracle.value = [](const VectorXd& z) { return -0.5 * z.squaredNorm(); };
  oracle.gradient = [](const VectorXd& z) { return VectorXd(-z); };
  oracle.hessian_vec = [](const VectorXd&, const VectorXd& d) {
    return VectorXd(-d);
  };
  VectorXd z0(2);
  z0 << 0.1, 0.0;
  InnerTolerances tol;
  tol.eps_g = 1e-10;
  tol.eps_H = 0.1;
  tol.max_iters = 5;
  const InnerResult res = newton_cg_solve(oracle, z0, tol, false, 0);
  CHECK(res.status == InnerStatus::budget_exhausted);
  CHECK(res.decrease >= 0.0);
}

TEST_CASE("monotone decrease and first-order termination on a nonconvex bowl") {
  // Indefinite quadratic plus quartic bowl. Several seeds, both modes.
  Rng rng(2718);
  const int n = 6;
  MatrixXd raw(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) raw(i, j) = rng.normal();
  MatrixXd h = 0.5 * (raw + raw.transpose());
  h -= 2.0 * MatrixXd::Identity(n, n);  // guarantee directions of escape

  UnconstrainedOracle oracle;
  oracle.dim = n;
  oracle.value = [h](const VectorXd& z) {
    return 0.5 * z.dot(h * z) + 0.25 * std::pow(z.squaredNorm(), 2);
  };
  oracle.gradient = [h](const VectorXd& z) {
    return VectorXd(h * z + z.squaredNorm() * z);
  };
  oracle.hessian_vec = [h](const VectorXd& z, const VectorXd& d) {
    return VectorXd(h * d + z.squaredNorm() * d + 2.0 * z.dot(d) * z);
  };

  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Rng start(seed + 100);
    const VectorXd z0 = start.gaussian_vector(n);
    InnerTolerances tol;
    tol.eps_g = 1e-7;
    tol.eps_H = 1e-3;

    const InnerResult first = newton_cg_solve(oracle, z0, tol, false, seed);
    REQUIRE(first.status == InnerStatus::first_order_met);
    CHECK(first.grad_norm <= tol.eps_g);
    CHECK(first.decrease >= 0.0);
    CHECK(oracle.value(first.z) <= oracle.value(z0));

    const InnerResult second = newton_cg_solve(oracle, z0, tol, true, seed);
    REQUIRE(second.status == InnerStatus::second_order_met);
    CHECK(second.grad_norm <= tol.eps_g);
    // Verify the certificate densely.
    MatrixXd dense(n, n);
    VectorXd unit = VectorXd::Zero(n);
    for (int i = 0; i < n; ++i) {
      unit[i] = 1.0;
      dense.col(i) = oracle.hessian_vec(second.z, unit);
      unit[i] = 0.0;
    }
    Eigen::SelfAdjointEigenSolver<MatrixXd> eig(
        MatrixXd(0.5 * (dense + dense.transpose())));
    CHECK(eig.eigenvalues().minCoeff() >= -tol.eps_H - 1e-8);
  }
}

TEST_CASE("hvp accounting stays within the per-iteration envelope") {
  Rng rng(99);
  for (int trial = 0; trial < 25; ++trial) {
    const int n = 2 + static_cast<int>(rng.uniform(0, 20));
    MatrixXd raw(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) raw(i, j) = rng.normal();
    const MatrixXd h =
        MatrixXd(0.5 * (raw + raw.transpose())) - MatrixXd::Identity(n, n);
    const VectorXd g0 = rng.gaussian_vector(n);

    UnconstrainedOracle oracle;
    oracle.dim = n;
    oracle.value = [h, g0](const VectorXd& z) {
      return 0.5 * z.dot(h * z) + g0.dot(z) +
             0.25 * std::pow(z.squaredNorm(), 2);
    };
    oracle.gradient = [h, g0](const VectorXd& z) {
      return VectorXd(h * z + g0 + z.squaredNorm() * z);
    };
    oracle.hessian_vec = [h](const VectorXd& z, const VectorXd& d) {
      return VectorXd(h * d + z.squaredNorm() * d + 2.0 * z.dot(d) * z);
    };

    InnerTolerances tol;
    tol.eps_g = 1e-6;
    tol.eps_H = 1e-2;
    const InnerResult res = newton_cg_solve(
        oracle, rng.gaussian_vector(n), tol, true, 1000 + trial);
    REQUIRE(res.status == InnerStatus::second_order_met);

    const long per_iter = std::max<long>(
        2 * std::min<long>(n, res.cg_product_cap) + 2, res.meo_product_cap);
    CHECK(res.hvp_count <= per_iter * std::max(res.iterations, 1));
  }
}
