#pragma once

#include "l1l2/diagnostics.hpp"
#include "l1l2/drivers.hpp"
#include "l1l2/instances.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace l1l2 {

/// mba_ratio:  ratio MBA from A^+ b
/// mba_l1:     plain-l1 MBA from A^+ b
/// algorithm1: noiseless driver on {A x = b} from A^+ b
/// two_stage:  plain-l1 MBA at warm_tol, feasible_start blend, then ratio MBA
enum class Pipeline { mba_ratio, mba_l1, algorithm1, two_stage };

std::string_view to_string(Pipeline pipeline);
Pipeline pipeline_from_string(std::string_view name);

struct PipelineOutcome {
  RunStatus status = RunStatus::max_iters;
  std::string error;  // nonempty if a stage threw
  Vector x_final;
  std::optional<Vector> x_warm;
  double rec_err = 0.0;
  double residual = 0.0;
  double criticality = 0.0;
  int iterations = 0;
  double warm_rec_err = 0.0;  // two_stage only
  double warm_residual = 0.0;
  int warm_iterations = 0;
  RunStatus warm_status = RunStatus::converged;
  double t_warm = 0.0;
  double t_main = 0.0;
  std::optional<IterateTrace> trace;
  std::optional<IterateTrace> warm_trace;
  TraceAudit audit;       // main stage
  TraceAudit warm_audit;  // warm stage
};

/// Runs one pipeline on an instance. Solver errors are caught and reported
/// through status/error rather than thrown. Traces are always recorded so the
/// per-iteration guarantees can be audited.
PipelineOutcome run_pipeline(const ProblemInstance& instance, Pipeline pipeline,
                             const SolverConfig& config, double warm_tol);

struct BenchPlan {
  Family family = Family::robust_cs;
  std::vector<GenSpec> cells;  // seed field ignored
  std::vector<std::uint64_t> seeds;
  Pipeline pipeline = Pipeline::mba_ratio;
  SolverConfig config;
  double warm_tol = 1e-6;
  int jobs = 1;

  void validate() const;
};

struct BenchRow {
  std::size_t cell = 0;
  GenSpec spec;  // with the seed filled in
  RunStatus status = RunStatus::max_iters;
  std::string error;
  double rec_err = 0.0;
  double warm_rec_err = 0.0;
  double residual = 0.0;
  double criticality = 0.0;
  int iterations = 0;
  int warm_iterations = 0;
  int descent_violations = 0;
  int feasibility_violations = 0;
  double t_gen = 0.0;
  double t_warm = 0.0;
  double t_main = 0.0;

  bool failed() const { return !error.empty(); }
};

struct CellAggregate {
  GenSpec spec;
  int runs = 0;
  int failures = 0;
  double mean_rec_err = 0.0;
  double median_rec_err = 0.0;
  double mean_warm_rec_err = 0.0;
  double median_warm_rec_err = 0.0;
  double mean_residual = 0.0;
  double mean_t_gen = 0.0;
  double mean_t_warm = 0.0;
  double mean_t_main = 0.0;
};

struct BenchReport {
  std::vector<BenchRow> rows;  // (cell, seed) order
  std::vector<CellAggregate> cells;
};

/// Executes every (cell, seed) pair, on plan.jobs worker threads. Row order and
/// contents do not depend on scheduling.
BenchReport run_bench(const BenchPlan& plan);

/// Recomputes the per-cell aggregates from rows (failed rows are excluded).
std::vector<CellAggregate> aggregate(const BenchPlan& plan, const std::vector<BenchRow>& rows);

double median(std::vector<double> values);

void write_rows_csv(std::ostream& os, const BenchReport& report);
void write_aggregate_csv(std::ostream& os, const BenchReport& report);
void print_table(std::ostream& os, const BenchReport& report, Pipeline pipeline);

/// Cells of the standard ladders: (2560i, 720i, 80i, 10i) for robust_cs and
/// (2560i, 720i, 80i) for cauchy.
GenSpec scaled_cell(Family family, int scale);

}  // namespace l1l2
