#include "l1l2/drivers.hpp"

#include "l1l2/error.hpp"
#include "l1l2/subsolvers.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <string>

namespace l1l2 {

void SolverConfig::validate() const {
  if (!(alpha > 0.0)) throw InvalidParameter("alpha must be positive");
  if (!(l_min > 0.0) || !(l_min < l_max)) throw InvalidParameter("need 0 < l_min < l_max");
  if (!(tol > 0.0)) throw InvalidParameter("tol must be positive");
  if (max_outer_iters <= 0) throw InvalidParameter("max_outer_iters must be positive");
  if (!(sub_tol > 0.0)) throw InvalidParameter("sub_tol must be positive");
  if (sub_max_iter <= 0) throw InvalidParameter("sub_max_iter must be positive");
  if (!(feas_tol >= 0.0)) throw InvalidParameter("feas_tol must be nonnegative");
}

std::string_view to_string(RunStatus status) {
  switch (status) {
    case RunStatus::converged: return "converged";
    case RunStatus::max_iters: return "max_iters";
    case RunStatus::subsolver_failure: return "subsolver_failure";
  }
  return "unknown";
}

RunStatus run_status_from_string(std::string_view name) {
  if (name == "converged") return RunStatus::converged;
  if (name == "max_iters") return RunStatus::max_iters;
  if (name == "subsolver_failure") return RunStatus::subsolver_failure;
  throw InvalidParameter("unknown run status '" + std::string(name) + "'");
}

double l1_l2_ratio(const Vector& x) {
  const double nrm = x.norm();
  if (!(nrm > 0.0)) throw InvalidParameter("l1/l2 ratio undefined at x = 0");
  return x.lpNorm<1>() / nrm;
}

double bb_init_step(const Vector& d_x, const Vector& d_g, double l_prev, double l_min,
                    double l_max) {
  const double inner = d_x.dot(d_g);
  if (inner >= 1e-12) {
    return std::max(l_min, std::min(inner / d_x.squaredNorm(), l_max));
  }
  return std::max(l_min, std::min(l_prev / 2.0, l_max));
}

Vector feasible_start(const ConstraintModel& model, const std::optional<Vector>& hint,
                      double feas_tol) {
  const Vector base = model.matrix().least_norm(model.b());
  Vector x = base;
  if (hint) {
    if (hint->size() != model.dim()) throw DimensionMismatch("feasible_start: hint length");
    x = *hint;
    if (model.kind() == ModelKind::least_squares) {
      const double res = model.residual(*hint).norm();
      if (res > model.sigma()) x = base + model.sigma() * (*hint - base) / res;
    }
  }
  const double q = q_value(model, x);
  if (!(q <= feas_tol)) {
    throw InfeasibleStart("feasible_start: constructed point has q = " + std::to_string(q));
  }
  return x;
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

double objective_value(Objective objective, const Vector& x) {
  return objective == Objective::ratio_l1_l2 ? l1_l2_ratio(x) : x.lpNorm<1>();
}

bool stop_rule(double step, const Vector& x, double tol) {
  return step <= tol * std::max(x.norm(), 1.0);
}

}  // namespace

RunResult run_algorithm1(const SensingMatrix& a, const Vector& b, const Vector& x0,
                         const SolverConfig& cfg) {
  cfg.validate();
  if (b.size() != a.rows()) throw DimensionMismatch("run_algorithm1: b has wrong length");
  if (x0.size() != a.cols()) throw DimensionMismatch("run_algorithm1: x0 has wrong length");
  if (!(b.norm() > 0.0)) throw InvalidParameter("run_algorithm1: b must be nonzero");
  const double infeas = (a.apply(x0) - b).norm();
  if (!(infeas <= 1e-8 * std::max(1.0, b.norm()))) {
    throw InfeasibleStart("run_algorithm1: A x0 != b (residual " + std::to_string(infeas) + ")");
  }

  const auto start = Clock::now();
  RunResult result;
  IterateTrace trace;
  Vector x = x0;
  double omega = l1_l2_ratio(x);
  auto record = [&](double step) {
    if (!cfg.record_trace) return;
    trace.entries.push_back(
        {omega, step, x.norm(), 0.0, 0, (a.apply(x) - b).norm(), seconds_since(start)});
    if (cfg.record_iterates) trace.iterates.push_back(x);
  };
  record(0.0);

  AffineProxWarmStart warm;
  for (int t = 0; t < cfg.max_outer_iters; ++t) {
    const Vector c = (1.0 + omega / (cfg.alpha * x.norm())) * x;
    Vector next = prox_l1_affine(c, a, b, cfg.alpha, cfg.sub_tol, cfg.sub_max_iter, &warm);
    const double step = (next - x).norm();
    x = std::move(next);
    omega = l1_l2_ratio(x);
    ++result.iterations;
    record(step);
    if (stop_rule(step, x, cfg.tol)) {
      result.status = RunStatus::converged;
      break;
    }
  }

  result.final_objective = omega;
  result.x_final = std::move(x);
  if (cfg.record_trace) result.trace = std::move(trace);
  return result;
}

RunResult run_mba(const ConstraintModel& model, Objective objective, const Vector& x0,
                  const SolverConfig& cfg) {
  cfg.validate();
  if (x0.size() != model.dim()) throw DimensionMismatch("run_mba: x0 has wrong length");

  const auto start = Clock::now();
  const SensingMatrix& a = model.matrix();
  Vector x = x0;
  Vector y = a.apply(x) - model.b();
  double q = model.q_from_residual(y);
  if (!(q <= cfg.feas_tol)) {
    throw InfeasibleStart("run_mba: starting point has q = " + std::to_string(q));
  }
  if (!(x.norm() > 0.0)) throw InfeasibleStart("run_mba: starting point is zero");

  // Bound on doublings per outer iteration; exceeding it means the
  // linearization does not majorize q, i.e. a gradient bug.
  const int max_doublings =
      static_cast<int>(std::ceil(std::log2(cfg.l_max * 2.0 / cfg.l_min)));

  RunResult result;
  IterateTrace trace;
  Vector xi = model.linearization_from_residual(y);
  double omega = objective_value(objective, x);
  auto record = [&](double step, double l_bar, int doublings) {
    if (!cfg.record_trace) return;
    trace.entries.push_back({omega, step, x.norm(), l_bar, doublings, q, seconds_since(start)});
    if (cfg.record_iterates) trace.iterates.push_back(x);
  };
  record(0.0, 0.0, 0);

  Vector x_prev;
  Vector xi_prev;
  double l_bar = 1.0;
  BallProxProblem ball;
  ball.alpha = cfg.alpha;
  for (int t = 0; t < cfg.max_outer_iters; ++t) {
    double l = t == 0 ? 1.0 : bb_init_step(x - x_prev, xi - xi_prev, l_bar, cfg.l_min, cfg.l_max);
    ball.center = objective == Objective::ratio_l1_l2
                      ? Vector((1.0 + omega / (cfg.alpha * x.norm())) * x)
                      : x;

    int doublings = 0;
    BallProxSolution sol;
    Vector y_new;
    double q_new = 0.0;
    // q(x^t) + <xi, x - x^t> + l/2 ||x - x^t||^2 <= 0  <=>  ||x - s||^2 <= R.
    // q is clipped at 0 so that x^t stays inside the ball even when it was
    // accepted with 0 < q <= feas_tol; otherwise descent can fail by ~mu * q.
    // Once l majorizes q, q(x~) <= max(q, 0) <= feas_tol still holds.
    const double q_ball = std::min(q, 0.0);
    for (;;) {
      ball.ball_center = x - xi / l;
      ball.radius_sq = std::max(0.0, xi.squaredNorm() / (l * l) - 2.0 * q_ball / l);
      sol = prox_l1_ball(ball, cfg.sub_tol);
      y_new = a.apply(sol.x) - model.b();
      q_new = model.q_from_residual(y_new);
      if (q_new <= cfg.feas_tol) break;
      l *= 2.0;
      if (++doublings > max_doublings) {
        throw DoublingLimitExceeded("run_mba: curvature doubling exceeded " +
                                    std::to_string(max_doublings) + " steps");
      }
    }

    x_prev = std::move(x);
    xi_prev = std::move(xi);
    x = std::move(sol.x);
    y = std::move(y_new);
    q = q_new;
    xi = model.linearization_from_residual(y);
    l_bar = l;
    if (!(x.norm() > 0.0)) throw InfeasibleStart("run_mba: iterate collapsed to zero");
    omega = objective_value(objective, x);
    const double step = (x - x_prev).norm();
    ++result.iterations;
    record(step, l_bar, doublings);
    if (stop_rule(step, x, cfg.tol)) {
      result.status = RunStatus::converged;
      break;
    }
  }

  result.final_objective = omega;
  result.criticality_residual = criticality_residual(model, x, cfg.feas_tol);
  result.x_final = std::move(x);
  if (cfg.record_trace) result.trace = std::move(trace);
  return result;
}

double default_active_tol(const ConstraintModel& model, double feas_tol) {
  const double s = model.sigma();
  const double budget = model.kind() == ModelKind::lorentzian ? s : s * s;
  return std::max(feas_tol, 1e-8 * std::max(1.0, budget));
}

double criticality_residual(const ConstraintModel& model, const Vector& x, double feas_tol,
                            std::optional<double> active_tol) {
  if (x.size() != model.dim()) throw DimensionMismatch("criticality_residual: x length");
  const double nrm = x.norm();
  if (!(nrm > 0.0)) throw InvalidParameter("criticality_residual: x must be nonzero");
  const Vector y = model.residual(x);
  const double q = model.q_from_residual(y);
  if (!(q <= feas_tol)) {
    throw InvalidParameter("criticality_residual: x is infeasible (q = " + std::to_string(q) +
                           ")");
  }

  // d(||x||_1/||x||) = (1/||x||) d||x||_1 - (||x||_1/||x||^3) x
  const double inv = 1.0 / nrm;
  const double shift = x.lpNorm<1>() / (nrm * nrm * nrm);
  const Vector g = model.linearization_from_residual(y);
  auto distance = [&](double lambda) {
    double sum = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      const double lg = lambda * g[i];
      double r;
      if (x[i] != 0.0) {
        r = std::copysign(inv, x[i]) - shift * x[i] + lg;
      } else {
        r = std::max(0.0, std::abs(lg) - inv);
      }
      sum += r * r;
    }
    return std::sqrt(sum);
  };

  if (q < -active_tol.value_or(default_active_tol(model, feas_tol))) return distance(0.0);

  constexpr double kLambdaCap = 1e6;
  constexpr double kWidth = 1e-10;
  const double ratio = (std::sqrt(5.0) - 1.0) / 2.0;
  double lo = 0.0;
  double hi = kLambdaCap;
  double m1 = hi - ratio * (hi - lo);
  double m2 = lo + ratio * (hi - lo);
  double f1 = distance(m1);
  double f2 = distance(m2);
  while (hi - lo > kWidth) {
    if (f1 <= f2) {
      hi = m2;
      m2 = m1;
      f2 = f1;
      m1 = hi - ratio * (hi - lo);
      f1 = distance(m1);
    } else {
      lo = m1;
      m1 = m2;
      f1 = f2;
      m2 = lo + ratio * (hi - lo);
      f2 = distance(m2);
    }
    if (m1 >= m2) break;
  }
  return std::min({distance(0.5 * (lo + hi)), distance(0.0), f1, f2});
}

}  // namespace l1l2
