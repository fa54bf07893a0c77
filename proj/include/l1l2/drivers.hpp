#pragma once

#include "l1l2/models.hpp"

#include <optional>
#include <string_view>
#include <vector>

namespace l1l2 {

/// Tunables shared by the outer drivers.
struct SolverConfig {
  double alpha = 1.0;
  double l_min = 1e-8;
  double l_max = 1e8;
  double tol = 1e-6;
  int max_outer_iters = 20000;
  double sub_tol = 1e-12;
  int sub_max_iter = 200000;
  double feas_tol = 1e-10;
  bool record_trace = false;
  /// Keep every iterate in the trace (memory heavy; for diagnostics on small problems).
  bool record_iterates = false;

  void validate() const;
};

/// One record per iterate x^t, t = 0, 1, ...
struct TraceEntry {
  double omega = 0.0;       // objective value at x^t (ratio, or ||x||_1 for plain l1)
  double step_norm = 0.0;   // ||x^t - x^{t-1}||, 0 for t = 0
  double x_norm = 0.0;      // ||x^t||
  double l_bar = 0.0;       // accepted curvature that produced x^t, 0 for t = 0
  int inner_doublings = 0;  // doublings spent producing x^t
  double q = 0.0;           // q(x^t); 0 for the noiseless driver
  double wall_time = 0.0;   // seconds since the run started
};

struct IterateTrace {
  std::vector<TraceEntry> entries;
  std::vector<Vector> iterates;  // only with SolverConfig::record_iterates
};

enum class RunStatus { converged, max_iters, subsolver_failure };

std::string_view to_string(RunStatus status);
RunStatus run_status_from_string(std::string_view name);

struct RunResult {
  Vector x_final;
  RunStatus status = RunStatus::max_iters;
  std::optional<IterateTrace> trace;
  int iterations = 0;
  double final_objective = 0.0;
  double criticality_residual = 0.0;
};

enum class Objective { ratio_l1_l2, plain_l1 };

/// ||x||_1 / ||x||
double l1_l2_ratio(const Vector& x);

/// Spectral (Barzilai-Borwein) initial curvature, safeguarded to [l_min, l_max].
///
/// Uses <d_x, d_g> / ||d_x||^2 when <d_x, d_g> >= 1e-12, otherwise halves the
/// previous accepted curvature.
double bb_init_step(const Vector& d_x, const Vector& d_g, double l_prev, double l_min,
                    double l_max);

/// Feasible starting point for the MBA driver.
///
/// Without a hint this is A^+ b. With a hint, a feasible hint is returned as is;
/// for the least-squares model an infeasible hint h is pulled radially toward
/// A^+ b onto the constraint boundary, A^+ b + sigma (h - A^+ b) / ||A h - b||.
/// Throws InfeasibleStart if the result violates q <= feas_tol.
Vector feasible_start(const ConstraintModel& model, const std::optional<Vector>& hint,
                      double feas_tol = 1e-10);

/// Noiseless l1/l2 minimization over {x : A x = b}.
RunResult run_algorithm1(const SensingMatrix& a, const Vector& b, const Vector& x0,
                         const SolverConfig& cfg);

/// Moving-balls approximation for min ||x||_1/||x|| (or ||x||_1) s.t. q(x) <= 0.
RunResult run_mba(const ConstraintModel& model, Objective objective, const Vector& x0,
                  const SolverConfig& cfg);

/// Distance from 0 to the Clarke-criticality inclusion set at a feasible x != 0.
///
/// With q(x) < -active_tol the multiplier is forced to 0. Otherwise the
/// residual is minimized over lambda in [0, 1e6] by golden-section search.
/// active_tol defaults to default_active_tol(model, feas_tol).
/// max(feas_tol, 1e-8 * max(1, budget)) with budget sigma^2 (least squares,
/// robust CS) or sigma (Lorentzian): the constraint counts as active when q
/// is zero relative to the size of its constant term.
double default_active_tol(const ConstraintModel& model, double feas_tol);

double criticality_residual(const ConstraintModel& model, const Vector& x,
                            double feas_tol = 1e-10,
                            std::optional<double> active_tol = std::nullopt);

}  // namespace l1l2
