#include "l1l2/bench.hpp"

#include "l1l2/error.hpp"
#include "l1l2/subsolvers.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <iomanip>
#include <ostream>
#include <thread>

namespace l1l2 {

std::string_view to_string(Pipeline pipeline) {
  switch (pipeline) {
    case Pipeline::mba_ratio: return "mba_ratio";
    case Pipeline::mba_l1: return "mba_l1";
    case Pipeline::algorithm1: return "algorithm1";
    case Pipeline::two_stage: return "two_stage";
  }
  return "unknown";
}

Pipeline pipeline_from_string(std::string_view name) {
  if (name == "mba_ratio" || name == "mba-ratio") return Pipeline::mba_ratio;
  if (name == "mba_l1" || name == "mba-l1") return Pipeline::mba_l1;
  if (name == "algorithm1") return Pipeline::algorithm1;
  if (name == "two_stage" || name == "two-stage") return Pipeline::two_stage;
  throw InvalidParameter("unknown pipeline '" + std::string(name) + "'");
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

void finish(PipelineOutcome& out, const ProblemInstance& inst, RunResult run) {
  out.status = run.status;
  out.iterations = run.iterations;
  out.x_final = std::move(run.x_final);
  out.trace = std::move(run.trace);
  out.rec_err = rec_err(out.x_final, inst.x_orig);
  out.residual = residual_metric(inst.model, out.x_final);
}

}  // namespace

PipelineOutcome run_pipeline(const ProblemInstance& inst, Pipeline pipeline,
                             const SolverConfig& config, double warm_tol) {
  PipelineOutcome out;
  SolverConfig cfg = config;
  cfg.record_trace = true;
  const ConstraintModel& model = inst.model;
  try {
    switch (pipeline) {
      case Pipeline::mba_ratio:
      case Pipeline::mba_l1: {
        const auto start = Clock::now();
        const Vector x0 = feasible_start(model, std::nullopt, cfg.feas_tol);
        const auto objective =
            pipeline == Pipeline::mba_ratio ? Objective::ratio_l1_l2 : Objective::plain_l1;
        RunResult run = run_mba(model, objective, x0, cfg);
        out.criticality = run.criticality_residual;
        finish(out, inst, std::move(run));
        out.audit = audit_trace(*out.trace, objective, cfg.alpha, cfg.feas_tol);
        out.t_main = seconds_since(start);
        break;
      }
      case Pipeline::algorithm1: {
        const auto start = Clock::now();
        const Vector x0 = least_norm_solution(model.matrix(), model.b());
        RunResult run = run_algorithm1(model.matrix(), model.b(), x0, cfg);
        finish(out, inst, std::move(run));
        out.criticality = criticality_residual(model, out.x_final, cfg.feas_tol);
        out.audit = audit_trace(*out.trace, Objective::ratio_l1_l2, cfg.alpha, cfg.feas_tol,
                                1e-10, false);
        out.t_main = seconds_since(start);
        break;
      }
      case Pipeline::two_stage: {
        auto start = Clock::now();
        SolverConfig warm_cfg = cfg;
        warm_cfg.tol = warm_tol;
        RunResult warm = run_mba(model, Objective::plain_l1,
                                 feasible_start(model, std::nullopt, cfg.feas_tol), warm_cfg);
        out.warm_status = warm.status;
        out.warm_iterations = warm.iterations;
        out.warm_rec_err = rec_err(warm.x_final, inst.x_orig);
        out.warm_residual = residual_metric(model, warm.x_final);
        out.warm_audit = audit_trace(*warm.trace, Objective::plain_l1, cfg.alpha, cfg.feas_tol);
        out.warm_trace = std::move(warm.trace);
        out.x_warm = warm.x_final;
        out.t_warm = seconds_since(start);

        start = Clock::now();
        const Vector x0 = feasible_start(model, warm.x_final, cfg.feas_tol);
        RunResult run = run_mba(model, Objective::ratio_l1_l2, x0, cfg);
        out.criticality = run.criticality_residual;
        finish(out, inst, std::move(run));
        out.audit = audit_trace(*out.trace, Objective::ratio_l1_l2, cfg.alpha, cfg.feas_tol);
        out.t_main = seconds_since(start);
        break;
      }
    }
  } catch (const Error& e) {
    out.status = RunStatus::subsolver_failure;
    out.error = e.what();
  }
  return out;
}

void BenchPlan::validate() const {
  if (cells.empty()) throw InvalidParameter("bench plan has no cells");
  if (seeds.empty()) throw InvalidParameter("bench plan has no seeds");
  if (jobs <= 0) throw InvalidParameter("jobs must be positive");
  if (!(warm_tol > 0.0)) throw InvalidParameter("warm_tol must be positive");
  config.validate();
  for (const auto& c : cells) {
    if (c.family != family) throw InvalidParameter("bench cell family differs from plan family");
    c.validate();
  }
}

GenSpec scaled_cell(Family family, int scale) {
  if (scale <= 0) throw InvalidParameter("scale index must be positive");
  GenSpec spec;
  spec.family = family;
  spec.n = 2560 * scale;
  spec.k = 80 * scale;
  if (family == Family::robust_cs) {
    spec.p = 720 * scale;
    spec.iota = 10 * scale;
  } else if (family == Family::cauchy) {
    spec.m = 720 * scale;
  } else {
    throw InvalidParameter("scale ladders exist for robust_cs and cauchy only");
  }
  return spec;
}

double median(std::vector<double> values) {
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(values.begin(), values.end());
  const auto mid = values.size() / 2;
  return values.size() % 2 == 1 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);
}

std::vector<CellAggregate> aggregate(const BenchPlan& plan, const std::vector<BenchRow>& rows) {
  std::vector<CellAggregate> out(plan.cells.size());
  for (std::size_t c = 0; c < plan.cells.size(); ++c) {
    CellAggregate& agg = out[c];
    agg.spec = plan.cells[c];
    std::vector<double> errs;
    std::vector<double> warm_errs;
    for (const auto& row : rows) {
      if (row.cell != c) continue;
      ++agg.runs;
      if (row.failed()) {
        ++agg.failures;
        continue;
      }
      errs.push_back(row.rec_err);
      warm_errs.push_back(row.warm_rec_err);
      agg.mean_rec_err += row.rec_err;
      agg.mean_warm_rec_err += row.warm_rec_err;
      agg.mean_residual += row.residual;
      agg.mean_t_gen += row.t_gen;
      agg.mean_t_warm += row.t_warm;
      agg.mean_t_main += row.t_main;
    }
    const double ok = static_cast<double>(errs.size());
    if (ok > 0) {
      agg.mean_rec_err /= ok;
      agg.mean_warm_rec_err /= ok;
      agg.mean_residual /= ok;
      agg.mean_t_gen /= ok;
      agg.mean_t_warm /= ok;
      agg.mean_t_main /= ok;
    }
    agg.median_rec_err = median(errs);
    agg.median_warm_rec_err = median(warm_errs);
  }
  return out;
}

BenchReport run_bench(const BenchPlan& plan) {
  plan.validate();
  BenchReport report;
  const std::size_t total = plan.cells.size() * plan.seeds.size();
  report.rows.resize(total);

  auto run_one = [&](std::size_t index) {
    const std::size_t c = index / plan.seeds.size();
    BenchRow& row = report.rows[index];
    row.cell = c;
    row.spec = plan.cells[c];
    row.spec.seed = plan.seeds[index % plan.seeds.size()];
    const auto start = Clock::now();
    std::optional<ProblemInstance> inst;
    try {
      inst.emplace(generate(row.spec));
    } catch (const Error& e) {
      row.status = RunStatus::subsolver_failure;
      row.error = std::string("generation failed: ") + e.what();
      return;
    }
    row.t_gen = seconds_since(start);
    PipelineOutcome out = run_pipeline(*inst, plan.pipeline, plan.config, plan.warm_tol);
    row.status = out.status;
    row.error = out.error;
    row.rec_err = out.rec_err;
    row.warm_rec_err = out.warm_rec_err;
    row.residual = out.residual;
    row.criticality = out.criticality;
    row.iterations = out.iterations;
    row.warm_iterations = out.warm_iterations;
    row.descent_violations = out.audit.descent_violations + out.warm_audit.descent_violations;
    row.feasibility_violations =
        out.audit.feasibility_violations + out.warm_audit.feasibility_violations;
    row.t_warm = out.t_warm;
    row.t_main = out.t_main;
  };

  const int workers = std::min<int>(plan.jobs, static_cast<int>(total));
  if (workers <= 1) {
    for (std::size_t i = 0; i < total; ++i) run_one(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < total; i = next++) run_one(i);
      });
    }
    for (auto& t : pool) t.join();
  }
  report.cells = aggregate(plan, report.rows);
  return report;
}

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_params(std::ostream& os, const GenSpec& s) {
  os << to_string(s.family) << ',' << s.n << ',' << s.rows() << ',' << s.p << ',' << s.iota << ','
     << s.k << ',' << num(s.F) << ',' << num(s.D);
}

constexpr const char* kParamHeader = "family,n,m,p,iota,k,F,D";

}  // namespace

void write_rows_csv(std::ostream& os, const BenchReport& report) {
  os << kParamHeader
     << ",seed,rec_err,residual,iters,status,t_gen,t_warm,t_main,warm_rec_err,warm_iters,"
        "criticality,descent_violations,feasibility_violations,error\n";
  for (const auto& r : report.rows) {
    write_params(os, r.spec);
    std::string err = r.error;
    std::replace(err.begin(), err.end(), ',', ';');
    std::replace(err.begin(), err.end(), '\n', ' ');
    os << ',' << r.spec.seed << ',' << num(r.rec_err) << ',' << num(r.residual) << ','
       << r.iterations << ',' << to_string(r.status) << ',' << num(r.t_gen) << ','
       << num(r.t_warm) << ',' << num(r.t_main) << ',' << num(r.warm_rec_err) << ','
       << r.warm_iterations << ',' << num(r.criticality) << ',' << r.descent_violations << ','
       << r.feasibility_violations << ',' << err << '\n';
  }
}

void write_aggregate_csv(std::ostream& os, const BenchReport& report) {
  os << kParamHeader
     << ",runs,failures,mean_rec_err,median_rec_err,mean_warm_rec_err,median_warm_rec_err,"
        "mean_residual,mean_t_gen,mean_t_warm,mean_t_main\n";
  for (const auto& c : report.cells) {
    write_params(os, c.spec);
    os << ',' << c.runs << ',' << c.failures << ',' << num(c.mean_rec_err) << ','
       << num(c.median_rec_err) << ',' << num(c.mean_warm_rec_err) << ','
       << num(c.median_warm_rec_err) << ',' << num(c.mean_residual) << ','
       << num(c.mean_t_gen) << ',' << num(c.mean_t_warm) << ',' << num(c.mean_t_main) << '\n';
  }
}

void print_table(std::ostream& os, const BenchReport& report, Pipeline pipeline) {
  const bool two_stage = pipeline == Pipeline::two_stage;
  os << std::setw(7) << "n" << std::setw(6) << "m" << std::setw(5) << "k" << std::setw(6)
     << "runs" << std::setw(6) << "fail";
  if (two_stage) os << std::setw(10) << "t_warm";
  os << std::setw(10) << "t_main";
  if (two_stage) os << std::setw(12) << "RecErr(l1)";
  os << std::setw(12) << "RecErr" << std::setw(12) << "median" << std::setw(12) << "Residual"
     << '\n';
  os << std::scientific << std::setprecision(1);
  for (const auto& c : report.cells) {
    os << std::setw(7) << c.spec.n << std::setw(6) << c.spec.rows() << std::setw(5) << c.spec.k
       << std::setw(6) << c.runs << std::setw(6) << c.failures;
    os << std::fixed << std::setprecision(2);
    if (two_stage) os << std::setw(10) << c.mean_t_warm;
    os << std::setw(10) << c.mean_t_main;
    os << std::scientific << std::setprecision(1);
    if (two_stage) os << std::setw(12) << c.mean_warm_rec_err;
    os << std::setw(12) << c.mean_rec_err << std::setw(12) << c.median_rec_err << std::setw(12)
       << c.mean_residual << '\n';
  }
  os << std::defaultfloat;
}

}  // namespace l1l2
