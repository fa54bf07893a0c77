#include "l1l2/subsolvers.hpp"

#include "l1l2/error.hpp"

#include <algorithm>
#include <cmath>

namespace l1l2 {

Vector soft_threshold(const Vector& v, double tau) {
  if (!(tau >= 0.0)) throw InvalidParameter("soft_threshold: tau must be nonnegative");
  return v.unaryExpr([tau](double t) {
    const double mag = std::abs(t) - tau;
    return mag > 0.0 ? std::copysign(mag, t) : 0.0;
  });
}

namespace {

constexpr double kMultiplierCap = 1e18;

// x(mu) for the ball problem, written into out; returns ||x(mu) - s||^2.
double ball_point(const BallProxProblem& p, double mu, Vector& out) {
  const double denom = p.alpha + mu;
  const double tau = 1.0 / denom;
  double dist_sq = 0.0;
  for (Eigen::Index i = 0; i < p.center.size(); ++i) {
    const double v = (p.alpha * p.center[i] + mu * p.ball_center[i]) / denom;
    const double mag = std::abs(v) - tau;
    const double xi = mag > 0.0 ? std::copysign(mag, v) : 0.0;
    out[i] = xi;
    const double d = xi - p.ball_center[i];
    dist_sq += d * d;
  }
  return dist_sq;
}

void validate(const BallProxProblem& p, double tol) {
  if (p.center.size() != p.ball_center.size()) {
    throw DimensionMismatch("prox_l1_ball: center and ball center differ in length");
  }
  if (!(p.alpha > 0.0)) throw InvalidParameter("prox_l1_ball: alpha must be positive");
  if (!(tol > 0.0)) throw InvalidParameter("prox_l1_ball: tol must be positive");
  if (!std::isfinite(p.radius_sq) || !p.center.allFinite() || !p.ball_center.allFinite() ||
      !std::isfinite(p.alpha)) {
    throw InvalidParameter("prox_l1_ball: non-finite input");
  }
  if (p.radius_sq < 0.0) throw InvalidParameter("prox_l1_ball: squared radius is negative");
}

}  // namespace

double ball_kkt_residual(const BallProxProblem& p, const Vector& x, double mu) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double g = p.alpha * (x[i] - p.center[i]) + mu * (x[i] - p.ball_center[i]);
    double r;
    if (x[i] > 0.0) {
      r = std::abs(1.0 + g);
    } else if (x[i] < 0.0) {
      r = std::abs(g - 1.0);
    } else {
      r = std::max(0.0, std::abs(g) - 1.0);
    }
    worst = std::max(worst, r);
  }
  return worst;
}

BallProxSolution prox_l1_ball(const BallProxProblem& p, double tol) {
  validate(p, tol);
  BallProxSolution sol;
  if (p.radius_sq == 0.0) {
    // Singleton feasible set; the normal cone is everything.
    sol.x = p.ball_center;
    sol.active = true;
    return sol;
  }

  sol.x.resize(p.center.size());
  const double phi0 = ball_point(p, 0.0, sol.x) - p.radius_sq;
  if (phi0 <= 0.0) {
    sol.kkt_residual = ball_kkt_residual(p, sol.x, 0.0);
    return sol;
  }

  Vector trial(p.center.size());
  double lo = 0.0;
  double hi = p.alpha;
  double phi_hi = ball_point(p, hi, trial) - p.radius_sq;
  while (phi_hi > 0.0) {
    lo = hi;
    hi *= 2.0;
    if (hi > kMultiplierCap) {
      throw SubsolverNotConverged("prox_l1_ball: multiplier bracket exceeded 1e18", phi_hi,
                                  0.0);
    }
    phi_hi = ball_point(p, hi, trial) - p.radius_sq;
  }
  sol.x = trial;

  const double target = tol * std::max(p.radius_sq, 1.0);
  while (phi_hi < -target) {
    const double mid = lo + 0.5 * (hi - lo);
    if (mid <= lo || mid >= hi) break;
    const double phi_mid = ball_point(p, mid, trial) - p.radius_sq;
    if (phi_mid > 0.0) {
      lo = mid;
    } else {
      hi = mid;
      phi_hi = phi_mid;
      sol.x = trial;
    }
  }

  sol.mu = hi;
  sol.active = true;
  sol.kkt_residual = ball_kkt_residual(p, sol.x, sol.mu);
  return sol;
}

Vector prox_l1_affine(const Vector& c, const SensingMatrix& a, const Vector& b, double alpha,
                      double tol, int max_iter, AffineProxWarmStart* warm,
                      AffineProxReport* report) {
  const auto n = a.cols();
  if (c.size() != n) throw DimensionMismatch("prox_l1_affine: c has wrong length");
  if (b.size() != a.rows()) throw DimensionMismatch("prox_l1_affine: b has wrong length");
  if (!(alpha > 0.0)) throw InvalidParameter("prox_l1_affine: alpha must be positive");
  if (!(tol > 0.0)) throw InvalidParameter("prox_l1_affine: tol must be positive");
  if (max_iter <= 0) throw InvalidParameter("prox_l1_affine: max_iter must be positive");

  const double rho = alpha;
  const double denom = alpha + rho;
  const double threshold = tol * std::sqrt(static_cast<double>(n));

  Vector z;
  Vector u;
  if (warm != nullptr && warm->z.size() == n && warm->u.size() == n) {
    z = warm->z;
    u = warm->u;
  } else {
    z = a.project_affine(c, b);
    u = Vector::Zero(n);
  }

  Vector x(n);
  Vector z_prev(n);
  double primal = 0.0;
  double dual = 0.0;
  for (int it = 1; it <= max_iter; ++it) {
    x = soft_threshold((alpha * c + rho * z - u) / denom, 1.0 / denom);
    z_prev = z;
    z = a.project_affine(x + u / rho, b);
    u += rho * (x - z);
    primal = (x - z).norm();
    dual = rho * (z - z_prev).norm();
    if (primal <= threshold && dual <= threshold) {
      if (warm != nullptr) {
        warm->z = z;
        warm->u = u;
      }
      if (report != nullptr) *report = {it, primal, dual};
      return a.project_affine(x, b);
    }
  }
  if (report != nullptr) *report = {max_iter, primal, dual};
  throw SubsolverNotConverged("prox_l1_affine: subsolver did not converge", primal, dual);
}

Vector least_norm_solution(const SensingMatrix& a, const Vector& b) {
  return a.least_norm(b);
}

}  // namespace l1l2
