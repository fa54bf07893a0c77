#pragma once

#include "l1l2/models.hpp"

namespace l1l2 {

/// Componentwise sign(v_i) * max(|v_i| - tau, 0).
Vector soft_threshold(const Vector& v, double tau);

/// min ||x||_1 + alpha/2 ||x - c||^2  s.t.  ||x - s||^2 <= radius_sq
struct BallProxProblem {
  Vector center;       // c
  Vector ball_center;  // s
  double radius_sq = 0.0;
  double alpha = 1.0;
};

/// Solution of a BallProxProblem together with its ball multiplier.
///
/// The multiplier is scaled so that stationarity reads
/// 0 in d||x||_1 + alpha (x - c) + mu (x - s).
struct BallProxSolution {
  Vector x;
  double mu = 0.0;
  bool active = false;
  double kkt_residual = 0.0;
};

/// Stationarity residual of (x, mu) for the ball problem, max over coordinates.
double ball_kkt_residual(const BallProxProblem& p, const Vector& x, double mu);

/// Solves a BallProxProblem by root finding on the multiplier.
///
/// For mu >= 0 the Lagrangian minimizer is
///   x(mu) = soft_threshold((alpha c + mu s) / (alpha + mu), 1 / (alpha + mu)),
/// and phi(mu) = ||x(mu) - s||^2 - R is continuous and nonincreasing. If x(0)
/// already lies in the ball it is returned with mu = 0. Otherwise the root of
/// phi is bracketed by doubling from mu = alpha and refined by bisection until
/// |phi| <= tol * max(R, 1). The returned point is always the feasible end of
/// the bracket.
BallProxSolution prox_l1_ball(const BallProxProblem& p, double tol = 1e-12);

/// Operator-splitting state that can be carried between calls to
/// prox_l1_affine with the same (A, b).
struct AffineProxWarmStart {
  Vector z;
  Vector u;
};

struct AffineProxReport {
  int iterations = 0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
};

/// min ||x||_1 + alpha/2 ||x - c||^2  s.t.  A x = b
///
/// Splits x = z with penalty rho = alpha: the x-step is a soft threshold, the
/// z-step an affine projection through the cached QR of A^T. Stops once the
/// primal and dual residuals are at most tol * sqrt(n). The returned point is
/// the affine projection of the final x-iterate, so A x = b to working
/// precision. Throws SubsolverNotConverged after max_iter iterations.
Vector prox_l1_affine(const Vector& c, const SensingMatrix& a, const Vector& b, double alpha,
                      double tol, int max_iter, AffineProxWarmStart* warm = nullptr,
                      AffineProxReport* report = nullptr);

/// A^+ b via the cached thin QR of A^T.
Vector least_norm_solution(const SensingMatrix& a, const Vector& b);

}  // namespace l1l2
