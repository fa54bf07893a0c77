#include "l1l2/diagnostics.hpp"
#include "l1l2/drivers.hpp"
#include "l1l2/error.hpp"
#include "l1l2/instances.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <cmath>
#include <cstring>
#include <memory>
#include <vector>

using namespace l1l2;
using namespace l1l2::testing;

namespace {

Vector vec(std::initializer_list<double> values) {
  Vector v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double x : values) v[i++] = x;
  return v;
}

SensingMatrixPtr identity(int n) {
  return std::make_shared<const SensingMatrix>(Matrix::Identity(n, n));
}

// q = ||x - (1, 0)||^2 - 1/4
ConstraintModel unit_ls() { return ConstraintModel::least_squares(identity(2), vec({1, 0}), 0.5); }

bool bitwise_equal(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) return false;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (std::memcmp(&a[i], &b[i], sizeof(double)) != 0) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("SolverConfig validation") {
  SolverConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.alpha = 0.0;
  CHECK_THROWS_AS(cfg.validate(), InvalidParameter);
  cfg = {};
  cfg.l_min = cfg.l_max;
  CHECK_THROWS_AS(cfg.validate(), InvalidParameter);
  cfg = {};
  cfg.tol = -1.0;
  CHECK_THROWS_AS(cfg.validate(), InvalidParameter);
  cfg = {};
  cfg.max_outer_iters = 0;
  CHECK_THROWS_AS(cfg.validate(), InvalidParameter);
}

TEST_CASE("run status names round trip") {
  for (auto s : {RunStatus::converged, RunStatus::max_iters, RunStatus::subsolver_failure}) {
    CHECK(run_status_from_string(to_string(s)) == s);
  }
  CHECK_THROWS_AS(run_status_from_string("done"), InvalidParameter);
}

TEST_CASE("l1_l2_ratio") {
  CHECK(l1_l2_ratio(vec({3, 0})) == 1.0);
  CHECK(l1_l2_ratio(vec({1, 1})) == doctest::Approx(std::sqrt(2.0)));
  CHECK_THROWS_AS(l1_l2_ratio(vec({0, 0})), InvalidParameter);
}

TEST_CASE("bb_init_step") {
  CHECK(bb_init_step(vec({1, 0}), vec({2, 0}), 7.0, 1e-8, 1e8) == 2.0);
  CHECK(bb_init_step(vec({1, 1}), vec({4, 4}), 7.0, 1e-8, 1e8) == 4.0);
  CHECK(bb_init_step(vec({1e-6, 0}), vec({1e3, 0}), 7.0, 1e-8, 1e8) == 1e8);
  CHECK(bb_init_step(vec({1e3, 0}), vec({1e-9, 0}), 7.0, 1e-8, 1e8) == 1e-8);
  // Nonpositive curvature falls back to halving the previous value.
  CHECK(bb_init_step(vec({1, 0}), vec({-1, 0}), 7.0, 1e-8, 1e8) == 3.5);
  CHECK(bb_init_step(vec({1, 0}), vec({0, 5}), 1e-8, 1e-8, 1e8) == 1e-8);
}

TEST_CASE("feasible_start") {
  const auto model = unit_ls();
  CHECK((feasible_start(model, std::nullopt) - vec({1, 0})).norm() <= 1e-15);
  // Feasible hints are kept.
  CHECK(feasible_start(model, vec({1.2, 0.1})) == vec({1.2, 0.1}));
  // (3, 0) is 2 away from b; the blend lands on the boundary at (1.5, 0).
  const Vector x = feasible_start(model, vec({3, 0}));
  CHECK((x - vec({1.5, 0})).norm() <= 1e-15);
  CHECK(std::abs(q_value(model, x)) <= 1e-15);
  CHECK_THROWS_AS(feasible_start(model, vec({1, 0, 0})), DimensionMismatch);

  // Non-LS models do not repair hints.
  const auto lor = ConstraintModel::lorentzian(identity(2), vec({1, 0}), 0.1, 1.0);
  CHECK_THROWS_AS(feasible_start(lor, vec({5, 5})), InfeasibleStart);
}

TEST_CASE("algorithm 1 hand examples") {
  const SensingMatrix line(Matrix::Ones(1, 2));
  const Vector b = vec({2});
  SolverConfig cfg;
  cfg.tol = 1e-10;
  cfg.record_trace = true;

  // The symmetric point is a fixed point of the iteration.
  auto res = run_algorithm1(line, b, vec({1, 1}), cfg);
  CHECK(res.status == RunStatus::converged);
  CHECK((res.x_final - vec({1, 1})).norm() <= 1e-9);

  res = run_algorithm1(line, b, vec({1.8, 0.2}), cfg);
  CHECK(res.status == RunStatus::converged);
  CHECK(l1_l2_ratio(res.x_final) <= 1.0 + 1e-6);
  CHECK(std::abs(res.x_final.sum() - 2.0) <= 1e-10);
  const auto audit = audit_trace(*res.trace, Objective::ratio_l1_l2, cfg.alpha, 0.0, 1e-10, false);
  CHECK(audit.descent_violations == 0);

  CHECK_THROWS_AS(run_algorithm1(line, b, vec({1, 0}), cfg), InfeasibleStart);
  CHECK_THROWS_AS(run_algorithm1(line, vec({0}), vec({0, 0}), cfg), InvalidParameter);
  CHECK_THROWS_AS(run_algorithm1(line, b, vec({2}), cfg), DimensionMismatch);
}

TEST_CASE("algorithm 1 recovers a sparse signal from noiseless measurements") {
  std::mt19937_64 rng(101);
  const auto a = random_sensing(64, 256, rng);
  Vector x_orig = Vector::Zero(256);
  std::uniform_int_distribution<int> pick(0, 255);
  for (int placed = 0; placed < 8;) {
    const int i = pick(rng);
    if (x_orig[i] == 0.0) {
      x_orig[i] = std::normal_distribution<double>()(rng);
      ++placed;
    }
  }
  const Vector b = a->apply(x_orig);
  SolverConfig cfg;
  cfg.tol = 1e-10;
  cfg.record_trace = true;
  const auto res = run_algorithm1(*a, b, a->least_norm(b), cfg);
  CHECK(res.status == RunStatus::converged);
  CHECK(rec_err(res.x_final, x_orig) <= 1e-4);
  const auto audit = audit_trace(*res.trace, Objective::ratio_l1_l2, cfg.alpha, 0.0, 1e-10, false);
  CHECK(audit.descent_violations == 0);
  CHECK(audit.monotonicity_violations == 0);
}

TEST_CASE("MBA on the two-dimensional least-squares toy") {
  const auto model = unit_ls();
  SolverConfig cfg;
  cfg.record_trace = true;
  const auto res = run_mba(model, Objective::ratio_l1_l2, vec({1, 0}), cfg);
  CHECK(res.status == RunStatus::converged);
  CHECK(res.iterations == 1);
  CHECK(std::abs(l1_l2_ratio(res.x_final) - 1.0) <= 1e-6);
  CHECK(res.x_final[1] == 0.0);
  CHECK(res.criticality_residual <= 1e-8);

  // From a generic feasible point the ratio still drops to its minimum.
  const auto moved = run_mba(model, Objective::ratio_l1_l2, vec({1.1, 0.3}), cfg);
  CHECK(moved.status == RunStatus::converged);
  CHECK(std::abs(moved.final_objective - 1.0) <= 1e-6);
  CHECK(q_value(model, moved.x_final) <= cfg.feas_tol);
  const auto audit = audit_trace(*moved.trace, Objective::ratio_l1_l2, cfg.alpha, cfg.feas_tol);
  CHECK(audit.descent_violations == 0);
  CHECK(audit.feasibility_violations == 0);
}

TEST_CASE("MBA rejects bad starting points") {
  const auto model = unit_ls();
  SolverConfig cfg;
  CHECK_THROWS_AS(run_mba(model, Objective::ratio_l1_l2, vec({0, 0}), cfg), InfeasibleStart);
  CHECK_THROWS_AS(run_mba(model, Objective::ratio_l1_l2, vec({3, 0}), cfg), InfeasibleStart);
  CHECK_THROWS_AS(run_mba(model, Objective::ratio_l1_l2, vec({1}), cfg), DimensionMismatch);
}

TEST_CASE("MBA keeps descent and feasibility on every model") {
  std::vector<ProblemInstance> cases;
  cases.push_back(gen_robust_cs(128, 40, 4, 4, 5));
  cases.push_back(gen_cauchy(128, 40, 4, 6));
  cases.push_back(gen_badly_scaled(128, 24, 3, 5.0, 2.0, 7));
  for (const auto& inst : cases) {
    CAPTURE(to_string(inst.model.kind()));
    for (auto objective : {Objective::ratio_l1_l2, Objective::plain_l1}) {
      SolverConfig cfg;
      cfg.record_trace = true;
      cfg.max_outer_iters = 3000;
      const Vector x0 = feasible_start(inst.model, std::nullopt);
      const auto res = run_mba(inst.model, objective, x0, cfg);
      const auto audit = audit_trace(*res.trace, objective, cfg.alpha, cfg.feas_tol);
      CHECK(audit.descent_violations == 0);
      CHECK(audit.feasibility_violations == 0);
      CHECK(audit.monotonicity_violations == 0);
      CHECK(res.final_objective <= res.trace->entries.front().omega);
      CHECK(static_cast<int>(res.trace->entries.size()) == res.iterations + 1);
    }
  }
}

TEST_CASE("MBA is deterministic") {
  const auto inst = gen_robust_cs(128, 40, 4, 4, 9);
  SolverConfig cfg;
  const Vector x0 = feasible_start(inst.model, std::nullopt);
  const auto r1 = run_mba(inst.model, Objective::ratio_l1_l2, x0, cfg);
  const auto r2 = run_mba(inst.model, Objective::ratio_l1_l2, x0, cfg);
  CHECK(r1.iterations == r2.iterations);
  CHECK(bitwise_equal(r1.x_final, r2.x_final));
}

TEST_CASE("criticality residual") {
  const auto model = unit_ls();
  // Along e1 the ratio gradient vanishes, active or not.
  for (double t : {0.5, 0.8, 1.0, 1.5}) {
    CHECK(criticality_residual(model, vec({t, 0})) <= 1e-8);
  }
  CHECK(criticality_residual(model, vec({1.1, 0.3})) > 1e-2);
  CHECK_THROWS_AS(criticality_residual(model, vec({0, 0})), InvalidParameter);
  CHECK_THROWS_AS(criticality_residual(model, vec({3, 0})), InvalidParameter);

  // At a converged MBA point the constraint is active and stationarity needs a
  // positive multiplier: forcing lambda = 0 leaves a large residual.
  const auto inst = gen_robust_cs(128, 40, 4, 4, 5);
  SolverConfig cfg;
  cfg.tol = 1e-10;
  const auto res = run_mba(inst.model, Objective::ratio_l1_l2,
                           feasible_start(inst.model, std::nullopt), cfg);
  const double active = criticality_residual(inst.model, res.x_final);
  const double forced_zero = criticality_residual(inst.model, res.x_final, 1e-10, -1.0);
  CHECK(res.criticality_residual == active);
  CHECK(active <= 1e-6);
  CHECK(forced_zero > 1e-2);
}

TEST_CASE("default_active_tol scales with the constraint budget") {
  CHECK(default_active_tol(unit_ls(), 1e-10) == 1e-8);
  CHECK(default_active_tol(unit_ls(), 1e-6) == 1e-6);
  const auto big = ConstraintModel::least_squares(identity(2), vec({1e4, 0}), 1e3);
  CHECK(default_active_tol(big, 1e-10) == doctest::Approx(1e-2));
}

TEST_CASE("fit_line and audit_trace") {
  const std::vector<double> t{0, 1, 2, 3};
  const std::vector<double> v{1, 3, 5, 7};
  const auto fit = fit_line(t, v);
  CHECK(fit.slope == doctest::Approx(2.0));
  CHECK(fit.intercept == doctest::Approx(1.0));
  CHECK(fit.r_squared == doctest::Approx(1.0));

  IterateTrace trace;
  trace.entries.push_back({2.0, 0.0, 1.0, 0.0, 0, -1.0, 0.0});
  trace.entries.push_back({1.0, 1.0, 1.0, 1.0, 0, -1.0, 0.0});  // drop 1 >= 0.5
  trace.entries.push_back({0.9, 1.0, 1.0, 1.0, 0, 1e-3, 0.0});  // drop 0.1 < 0.5, infeasible
  trace.entries.push_back({1.0, 0.0, 1.0, 1.0, 0, -1.0, 0.0});  // increase
  const auto audit = audit_trace(trace, Objective::ratio_l1_l2, 1.0, 1e-10);
  CHECK(audit.descent_violations == 2);
  CHECK(audit.feasibility_violations == 1);
  CHECK(audit.monotonicity_violations == 1);
  CHECK(audit.worst_descent_gap == doctest::Approx(-0.4));
  CHECK(audit.worst_q == 1e-3);
}
