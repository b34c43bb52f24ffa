#include "proxal/newton_cg.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "proxal/errors.hpp"
#include "proxal/rng.hpp"

namespace proxal {

namespace {

constexpr double kArmijo = 1e-4;
constexpr int kMaxBacktracks = 60;

void require_finite(double v, const char* what) {
  if (!std::isfinite(v))
    throw EvaluationError(std::string(what) + " produced a non-finite value");
}

void require_finite(const VectorXd& v, const char* what) {
  if (!v.allFinite())
    throw EvaluationError(std::string(what) + " produced a non-finite value");
}

}  // namespace

void InnerTolerances::validate() const {
  if (!(eps_g > 0.0) || !(eps_H > 0.0))
    throw ConfigError("inner tolerances must be positive");
  if (!(delta > 0.0 && delta < 1.0))
    throw ConfigError("inner delta must lie in (0,1)");
  if (!(zeta > 0.0 && zeta < 1.0))
    throw ConfigError("inner zeta must lie in (0,1)");
  if (max_iters < 1 || max_hvps < 1)
    throw ConfigError("inner iteration/product budgets must be at least 1");
}

long capped_cg_product_bound(int n, double kappa, double zeta) {
  kappa = std::max(kappa, 2.0);
  const double sqrt_kappa = std::sqrt(kappa);
  const double arg = 144.0 * (sqrt_kappa + 1.0) * (sqrt_kappa + 1.0) *
                     std::pow(kappa, 6.0) / (zeta * zeta);
  const double j = (sqrt_kappa + 0.5) * std::log(arg);
  const long j_bound = static_cast<long>(std::ceil(j));
  return std::min<long>(n + 2, std::max<long>(j_bound, 1));
}

CappedCgOutcome capped_cg(
    const std::function<VectorXd(const VectorXd&)>& hvp, const VectorXd& g,
    double eps_H, double zeta, double kappa, long budget) {
  const int n = static_cast<int>(g.size());
  const double gnorm = g.norm();
  if (!(gnorm > 0.0))
    throw std::invalid_argument("capped_cg requires a nonzero gradient");
  if (budget < 1) throw std::invalid_argument("capped_cg requires budget >= 1");

  kappa = std::max(kappa, 2.0);
  const double zeta_hat = zeta / (3.0 * kappa);
  const long cap = std::min(budget, capped_cg_product_bound(n, kappa, zeta));

  CappedCgOutcome out;
  const auto shifted = [&](const VectorXd& v) {
    VectorXd hv = hvp(v);
    require_finite(hv, "hessian-vector product");
    ++out.hvps;
    const double vnorm = v.norm();
    if (vnorm > 0.0)
      out.max_hnorm_seen = std::max(out.max_hnorm_seen, hv.norm() / vnorm);
    return VectorXd(hv + 2.0 * eps_H * v);
  };

  // Returns a negative-curvature outcome for v, given v' (H + 2 eps_H I) v.
  const auto emit_curvature = [&](const VectorXd& v, double v_shifted_quad) {
    const double sq = v.squaredNorm();
    out.kind = CappedCgOutcome::Kind::negative_curvature;
    out.curvature = v_shifted_quad / sq - 2.0 * eps_H;
    out.direction = v / std::sqrt(sq);
    return out;
  };

  VectorXd y = VectorXd::Zero(n);
  VectorXd shifted_y = VectorXd::Zero(n);
  VectorXd r = -g;       // residual of (H + 2 eps_H I) y = -g
  VectorXd p = r;
  double rr = r.squaredNorm();

  VectorXd shifted_p = shifted(p);
  double p_quad = p.dot(shifted_p);
  if (p_quad < eps_H * p.squaredNorm()) return emit_curvature(p, p_quad);

  while (out.hvps < cap) {
    const double alpha = rr / p_quad;
    y += alpha * p;
    shifted_y += alpha * shifted_p;
    r -= alpha * shifted_p;
    ++out.iterations;

    const double y_quad = y.dot(shifted_y);
    if (y_quad < eps_H * y.squaredNorm()) return emit_curvature(y, y_quad);

    const double rr_next = r.squaredNorm();
    if (std::sqrt(rr_next) <= zeta_hat * gnorm) {
      out.kind = CappedCgOutcome::Kind::newton_step;
      out.direction = y;
      out.residual_norm = std::sqrt(rr_next);
      return out;
    }

    p = r + (rr_next / rr) * p;
    rr = rr_next;
    shifted_p = shifted(p);
    p_quad = p.dot(shifted_p);
    if (p_quad < eps_H * p.squaredNorm()) return emit_curvature(p, p_quad);
  }

  // Product cap reached without convergence; hand back the partial iterate.
  out.kind = CappedCgOutcome::Kind::budget_exhausted;
  out.direction = y;
  out.residual_norm = r.norm();
  return out;
}

long meo_product_bound(int n, double eps_H, double delta) {
  const double c_meo = 0.5 * std::log(2.75 * n / (delta * delta));
  const double steps = 1.0 + std::ceil(c_meo / std::sqrt(eps_H));
  return std::min<long>(n, std::max<long>(static_cast<long>(steps), 1));
}

MeoOutcome min_eig_oracle(
    const std::function<VectorXd(const VectorXd&)>& hvp, int n, double eps_H,
    double delta, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("min_eig_oracle requires n >= 1");
  const long max_steps = meo_product_bound(n, eps_H, delta);

  MeoOutcome out;
  Rng rng(seed);

  // Lanczos with full reorthogonalization; desk-scale n keeps this cheap.
  std::vector<VectorXd> basis;
  basis.reserve(max_steps);
  std::vector<double> diag, offdiag;
  basis.push_back(rng.unit_vector(n));

  const auto finish = [&](long steps) {
    Eigen::MatrixXd tri = Eigen::MatrixXd::Zero(steps, steps);
    for (long i = 0; i < steps; ++i) {
      tri(i, i) = diag[i];
      if (i + 1 < steps) {
        tri(i, i + 1) = offdiag[i];
        tri(i + 1, i) = offdiag[i];
      }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(tri);
    long idx = 0;
    const double lam_min = eig.eigenvalues().minCoeff(&idx);
    if (lam_min <= -0.5 * eps_H) {
      VectorXd ritz = VectorXd::Zero(n);
      for (long i = 0; i < steps; ++i)
        ritz += eig.eigenvectors().col(idx)[i] * basis[i];
      ritz.normalize();
      out.certified = false;
      out.direction = ritz;
      out.curvature = lam_min;  // Rayleigh quotient of the Ritz vector
    } else {
      out.certified = true;
    }
    return out;
  };

  for (long j = 0; j < max_steps; ++j) {
    VectorXd w = hvp(basis[j]);
    require_finite(w, "hessian-vector product");
    ++out.hvps;
    const double alpha = basis[j].dot(w);
    diag.push_back(alpha);
    w -= alpha * basis[j];
    if (j > 0) w -= offdiag[j - 1] * basis[j - 1];
    for (const VectorXd& q : basis) w -= q.dot(w) * q;

    const double beta = w.norm();
    if (beta < 1e-12 * (1.0 + std::abs(alpha))) {
      // Invariant subspace reached; the tridiagonal spectrum is exact.
      return finish(j + 1);
    }
    if (j + 1 < max_steps) {
      offdiag.push_back(beta);
      basis.push_back(w / beta);
    }
  }
  return finish(max_steps);
}

namespace {

struct SolveState {
  const UnconstrainedOracle* oracle;
  const InnerTolerances* tol;
  VectorXd z;
  double f_z;
  long hvps = 0;
  double lipschitz_estimate = 1.0;  // local bound on the Hessian variation
};

// Backtracking Armijo search along a descent direction. Returns false when no
// acceptable step was found.
bool armijo_step(SolveState& st, const VectorXd& g, const VectorXd& d) {
  const double slope = g.dot(d);
  if (!(slope < 0.0)) return false;
  double t = 1.0;
  for (int i = 0; i < kMaxBacktracks; ++i) {
    const VectorXd trial = st.z + t * d;
    const double f_trial = st.oracle->value(trial);
    require_finite(f_trial, "objective");
    if (f_trial <= st.f_z + kArmijo * t * slope) {
      st.z = trial;
      st.f_z = f_trial;
      return true;
    }
    t *= 0.5;
  }
  return false;
}

// Step along a unit direction of negative curvature `curv` (per unit norm).
// Length |curv| / L_H, cubic decrease test, tenfold relaxation plus L_H
// doubling on each failed attempt.
bool curvature_step(SolveState& st, const VectorXd& g, const VectorXd& unit_dir,
                    double curv, double eps_H) {
  VectorXd u = unit_dir;
  if (g.dot(u) > 0.0) u = -u;
  double relax = 1.0;
  for (int i = 0; i < kMaxBacktracks; ++i) {
    const double scale = std::abs(curv) / st.lipschitz_estimate;
    const VectorXd trial = st.z + scale * u;
    const double f_trial = st.oracle->value(trial);
    require_finite(f_trial, "objective");
    const double required = (eps_H / 24.0) * scale * scale * scale / relax;
    if (f_trial <= st.f_z - required) {
      st.z = trial;
      st.f_z = f_trial;
      return true;
    }
    st.lipschitz_estimate *= 2.0;
    relax *= 10.0;
  }
  return false;
}

}  // namespace

InnerResult newton_cg_solve(const UnconstrainedOracle& oracle,
                            const VectorXd& z0, const InnerTolerances& tol,
                            bool second_order, std::uint64_t seed) {
  tol.validate();
  if (!z0.allFinite())
    throw std::invalid_argument("newton_cg_solve requires a finite start");
  const int n = oracle.dim;

  SolveState st{&oracle, &tol, z0, oracle.value(z0)};
  require_finite(st.f_z, "objective");
  const double f_start = st.f_z;

  InnerResult res;
  res.meo_product_cap = meo_product_bound(n, tol.eps_H, tol.delta);

  Rng rng(seed);
  double hnorm_estimate = -1.0;  // computed lazily before the first CG call

  const auto hvp_here = [&](const VectorXd& d) {
    ++st.hvps;
    return oracle.hessian_vec(st.z, d);
  };

  const auto finalize = [&](InnerStatus status, double grad_norm) {
    res.status = status;
    res.z = st.z;
    res.value = st.f_z;
    res.grad_norm = grad_norm;
    res.decrease = f_start - st.f_z;
    res.hvp_count = st.hvps;
    res.kappa = (std::max(hnorm_estimate, 0.0) + 2.0 * tol.eps_H) / tol.eps_H;
    res.cg_product_cap = capped_cg_product_bound(n, res.kappa, tol.zeta);
    return res;
  };

  while (true) {
    const VectorXd g = oracle.gradient(st.z);
    require_finite(g, "gradient");
    const double gnorm = g.norm();

    if (res.iterations >= tol.max_iters || st.hvps >= tol.max_hvps)
      return finalize(InnerStatus::budget_exhausted, gnorm);
    ++res.iterations;

    if (gnorm <= tol.eps_g) {
      if (!second_order) return finalize(InnerStatus::first_order_met, gnorm);

      if (st.hvps + res.meo_product_cap > tol.max_hvps)
        return finalize(InnerStatus::budget_exhausted, gnorm);
      ++res.meo_calls;
      const MeoOutcome meo = min_eig_oracle(hvp_here, n, tol.eps_H, tol.delta,
                                            rng.next_u64());
      if (meo.certified) {
        res.neg_curvature_certified_absent = true;
        return finalize(InnerStatus::second_order_met, gnorm);
      }
      if (!curvature_step(st, g, meo.direction, meo.curvature, tol.eps_H))
        return finalize(InnerStatus::budget_exhausted, gnorm);
      continue;
    }

    if (hnorm_estimate < 0.0) {
      // Power-iteration estimate of |hess F|; shapes the CG accuracy and cap.
      VectorXd v = rng.unit_vector(n);
      hnorm_estimate = 0.0;
      const int power_steps = std::min(n, 10);
      for (int i = 0; i < power_steps && st.hvps < tol.max_hvps; ++i) {
        VectorXd hv = hvp_here(v);
        require_finite(hv, "hessian-vector product");
        const double nrm = hv.norm();
        hnorm_estimate = std::max(hnorm_estimate, nrm);
        if (nrm < 1e-300) break;
        v = hv / nrm;
      }
    }

    const double kappa =
        (hnorm_estimate + 2.0 * tol.eps_H) / tol.eps_H;
    const long remaining = tol.max_hvps - st.hvps;
    if (remaining < 1) return finalize(InnerStatus::budget_exhausted, gnorm);

    const CappedCgOutcome cg = capped_cg(
        hvp_here, g, tol.eps_H, tol.zeta, kappa, remaining);
    hnorm_estimate = std::max(hnorm_estimate, cg.max_hnorm_seen);

    bool stepped = false;
    switch (cg.kind) {
      case CappedCgOutcome::Kind::newton_step:
        stepped = armijo_step(st, g, cg.direction);
        break;
      case CappedCgOutcome::Kind::negative_curvature:
        stepped = curvature_step(st, g, cg.direction, cg.curvature, tol.eps_H);
        break;
      case CappedCgOutcome::Kind::budget_exhausted:
        // Partial CG iterate; keep it when it is a descent direction.
        if (cg.direction.size() == n && cg.direction.norm() > 0.0)
          stepped = armijo_step(st, g, cg.direction);
        break;
    }
    if (!stepped) {
      // Steepest-descent fallback keeps the method monotone.
      stepped = armijo_step(st, g, -g);
    }
    if (!stepped) return finalize(InnerStatus::budget_exhausted, gnorm);
  }
}

}  // namespace proxal
