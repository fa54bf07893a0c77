// Command-line harness: gen, solve, bench, check.
//
// Exit codes: 0 success, 1 runtime or solver failure, 2 usage error.

#include "l1l2/bench.hpp"
#include "l1l2/diagnostics.hpp"
#include "l1l2/error.hpp"
#include "l1l2/serialize.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

using namespace l1l2;

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct GenArgs {
  std::string family;
  std::optional<int> n, m, p, k, iota;
  std::optional<double> F, D, gamma;
  std::uint64_t seed = 1;
  std::string out;
};

struct SolverArgs {
  std::string config_path;
  std::optional<double> tol, alpha, sub_tol, feas_tol;
  std::optional<int> max_iters;
};

void add_solver_flags(CLI::App* cmd, SolverArgs& s) {
  cmd->add_option("--config", s.config_path, "JSON file with SolverConfig fields");
  cmd->add_option("--tol", s.tol, "outer termination tolerance");
  cmd->add_option("--alpha", s.alpha, "proximal weight");
  cmd->add_option("--sub-tol", s.sub_tol, "subproblem tolerance");
  cmd->add_option("--feas-tol", s.feas_tol, "feasibility tolerance");
  cmd->add_option("--max-iters", s.max_iters, "outer iteration cap");
}

SolverConfig build_config(const SolverArgs& s, double default_tol) {
  SolverConfig cfg;
  cfg.tol = default_tol;
  if (!s.config_path.empty()) cfg = solver_config_from_json(read_json_file(s.config_path));
  if (s.tol) cfg.tol = *s.tol;
  if (s.alpha) cfg.alpha = *s.alpha;
  if (s.sub_tol) cfg.sub_tol = *s.sub_tol;
  if (s.feas_tol) cfg.feas_tol = *s.feas_tol;
  if (s.max_iters) cfg.max_outer_iters = *s.max_iters;
  cfg.validate();
  return cfg;
}

// Default termination tolerance per family: 1e-8 for badly scaled, else 1e-6.
double default_tol(Family family) { return family == Family::badly_scaled ? 1e-8 : 1e-6; }

template <typename T>
T need(const std::optional<T>& v, const char* flag, const std::string& family) {
  if (!v) throw UsageError(std::string("missing ") + flag + " for family " + family);
  return *v;
}

GenSpec spec_from_args(const GenArgs& g) {
  GenSpec spec;
  try {
    spec.family = family_from_string(g.family);
  } catch (const InvalidParameter& e) {
    throw UsageError(e.what());
  }
  spec.n = need(g.n, "--n", g.family);
  spec.k = need(g.k, "--k", g.family);
  spec.seed = g.seed;
  switch (spec.family) {
    case Family::robust_cs:
      spec.p = need(g.p, "--p", g.family);
      spec.iota = need(g.iota, "--iota", g.family);
      break;
    case Family::cauchy:
      spec.m = need(g.m, "--m", g.family);
      if (g.gamma) spec.gamma = *g.gamma;
      break;
    case Family::badly_scaled:
      spec.m = need(g.m, "--m", g.family);
      spec.F = need(g.F, "--F", g.family);
      spec.D = need(g.D, "--D", g.family);
      break;
  }
  return spec;
}

int cmd_gen(const GenArgs& g) {
  const GenSpec spec = spec_from_args(g);
  const ProblemInstance inst = generate(spec);
  if (!g.out.empty()) write_json_file(g.out, to_json(inst));
  std::printf("family=%s n=%lld m=%lld k=%d sigma=%.6e q(x_orig)=%.6e",
              std::string(to_string(spec.family)).c_str(),
              static_cast<long long>(inst.model.dim()),
              static_cast<long long>(inst.model.matrix().rows()), spec.k, inst.model.sigma(),
              q_value(inst.model, inst.x_orig));
  if (const auto* rcs = std::get_if<RobustCS>(&inst.model.variant())) std::printf(" r=%d", rcs->outliers);
  if (const auto* lor = std::get_if<Lorentzian>(&inst.model.variant())) std::printf(" gamma=%g", lor->gamma);
  std::printf("\n");
  return kExitOk;
}

struct SolveArgs {
  std::string instance;
  std::string pipeline = "mba_ratio";
  std::optional<double> warm_tol;
  bool trace = false;
  std::string out;
  SolverArgs solver;
};

int cmd_solve(const SolveArgs& a) {
  const ProblemInstance inst = instance_from_json(read_json_file(a.instance));
  Pipeline pipeline;
  try {
    pipeline = pipeline_from_string(a.pipeline);
  } catch (const InvalidParameter& e) {
    throw UsageError(e.what());
  }
  SolverConfig cfg = build_config(a.solver, default_tol(inst.spec.family));
  cfg.record_trace = a.trace;
  const double warm_tol = a.warm_tol.value_or(cfg.tol);
  const PipelineOutcome out = run_pipeline(inst, pipeline, cfg, warm_tol);
  if (!a.out.empty()) write_json_file(a.out, result_to_json(out, pipeline, cfg, warm_tol));

  if (pipeline == Pipeline::two_stage && out.warm_iterations > 0) {
    std::printf("warm: RecErr=%.3e Residual=%.3e iterations=%d status=%s time=%.3fs\n",
                out.warm_rec_err, out.warm_residual, out.warm_iterations,
                std::string(to_string(out.warm_status)).c_str(), out.t_warm);
  }
  if (!out.error.empty()) {
    std::fprintf(stderr, "error: %s\n", out.error.c_str());
    return kExitFailure;
  }
  std::printf("RecErr=%.3e Residual=%.3e iterations=%d status=%s criticality=%.3e time=%.3fs\n",
              out.rec_err, out.residual, out.iterations,
              std::string(to_string(out.status)).c_str(), out.criticality, out.t_main);
  return kExitOk;
}

struct BenchArgs {
  std::string plan_path;
  std::string family;
  std::vector<int> scales;
  std::optional<int> n, m, p, iota;
  std::vector<int> k;
  std::vector<double> F, D;
  int seed_count = 20;
  std::uint64_t first_seed = 1;
  std::vector<std::uint64_t> seed_list;
  std::string pipeline = "mba_ratio";
  std::optional<double> warm_tol;
  int jobs = 1;
  std::string csv;
  std::string agg_csv;
  SolverArgs solver;
};

BenchPlan plan_from_args(const BenchArgs& a) {
  if (!a.plan_path.empty()) return plan_from_json(read_json_file(a.plan_path));
  if (a.family.empty()) throw UsageError("bench needs --plan or a family");
  BenchPlan plan;
  try {
    plan.family = family_from_string(a.family);
    plan.pipeline = pipeline_from_string(a.pipeline);
  } catch (const InvalidParameter& e) {
    throw UsageError(e.what());
  }
  if (!a.scales.empty()) {
    for (int s : a.scales) plan.cells.push_back(scaled_cell(plan.family, s));
  } else if (plan.family == Family::badly_scaled) {
    const std::vector<int> ks = a.k.empty() ? std::vector<int>{8} : a.k;
    const std::vector<double> Fs = a.F.empty() ? std::vector<double>{5.0} : a.F;
    const std::vector<double> Ds = a.D.empty() ? std::vector<double>{2.0} : a.D;
    for (int k : ks) {
      for (double F : Fs) {
        for (double D : Ds) {
          GenSpec s;
          s.family = plan.family;
          s.n = a.n.value_or(1024);
          s.m = a.m.value_or(64);
          s.k = k;
          s.F = F;
          s.D = D;
          plan.cells.push_back(s);
        }
      }
    }
  } else {
    GenArgs g;
    g.family = a.family;
    g.n = a.n;
    g.m = a.m;
    g.p = a.p;
    g.iota = a.iota;
    if (!a.k.empty()) g.k = a.k.front();
    plan.cells.push_back(spec_from_args(g));
  }
  if (!a.seed_list.empty()) {
    plan.seeds = a.seed_list;
  } else {
    for (int s = 0; s < a.seed_count; ++s) plan.seeds.push_back(a.first_seed + static_cast<std::uint64_t>(s));
  }
  plan.config = build_config(a.solver, default_tol(plan.family));
  plan.warm_tol = a.warm_tol.value_or(plan.config.tol);
  plan.jobs = a.jobs;
  try {
    plan.validate();
  } catch (const InvalidParameter& e) {
    throw UsageError(e.what());
  }
  return plan;
}

int cmd_bench(const BenchArgs& a) {
  const BenchPlan plan = plan_from_args(a);
  const BenchReport report = run_bench(plan);
  if (!a.csv.empty()) {
    std::ofstream os(a.csv, std::ios::binary);
    if (!os) throw Error("cannot write " + a.csv);
    write_rows_csv(os, report);
  }
  if (!a.agg_csv.empty()) {
    std::ofstream os(a.agg_csv, std::ios::binary);
    if (!os) throw Error("cannot write " + a.agg_csv);
    write_aggregate_csv(os, report);
  }
  if (a.csv.empty() && a.agg_csv.empty()) write_rows_csv(std::cout, report);
  print_table(std::cerr, report, plan.pipeline);
  return kExitOk;
}

struct CheckArgs {
  std::string instance;
  std::string result;
  double criticality_bound = 1e-3;
};

int cmd_check(const CheckArgs& a) {
  const ProblemInstance inst = instance_from_json(read_json_file(a.instance));
  int failures = 0;
  auto report = [&failures](const std::string& name, bool ok, const std::string& detail) {
    std::printf("[%s] %s: %s\n", ok ? "PASS" : "FAIL", name.c_str(), detail.c_str());
    if (!ok) ++failures;
  };
  char buf[256];

  const double q0 = q_value(inst.model, Vector::Zero(inst.model.dim()));
  std::snprintf(buf, sizeof buf, "q(0) = %.3e", q0);
  report("origin infeasible", q0 > 0.0, buf);
  const double q_orig = q_value(inst.model, inst.x_orig);
  std::snprintf(buf, sizeof buf, "q(x_orig) = %.3e", q_orig);
  report("ground truth feasible", q_orig <= 0.0, buf);
  const auto nnz = (inst.x_orig.array() != 0.0).count();
  std::snprintf(buf, sizeof buf, "%lld nonzeros, k = %d", static_cast<long long>(nnz), inst.spec.k);
  report("ground truth sparsity", nnz == inst.spec.k, buf);
  if (inst.spec.family != Family::badly_scaled) {
    const Matrix& A = inst.model.matrix().entries();
    const double dev = (A.colwise().norm().array() - 1.0).abs().maxCoeff();
    std::snprintf(buf, sizeof buf, "max | ||a_j|| - 1 | = %.3e", dev);
    report("unit columns", dev <= 1e-12, buf);
  }

  if (!a.result.empty()) {
    const nlohmann::json res = read_json_file(a.result);
    const SolverConfig cfg = solver_config_from_json(res.at("run_config").at("config"));
    const Pipeline pipeline = pipeline_from_string(res.at("run_config").at("pipeline").get<std::string>());
    const Vector x = vector_from_json(res.at("x_final"));
    const double q = q_value(inst.model, x);
    std::snprintf(buf, sizeof buf, "q(x_final) = %.3e", q);
    report("final feasibility", pipeline == Pipeline::algorithm1 || q <= cfg.feas_tol, buf);
    const double err = rec_err(x, inst.x_orig);
    const double stored = res.at("metrics").at("rec_err").get<double>();
    std::snprintf(buf, sizeof buf, "recomputed %.6e, stored %.6e", err, stored);
    report("RecErr consistent", err == stored, buf);
    if (pipeline != Pipeline::algorithm1) {
      const double crit = criticality_residual(inst.model, x, cfg.feas_tol);
      std::snprintf(buf, sizeof buf, "%.3e (bound %.1e)", crit, a.criticality_bound);
      report("criticality", crit <= a.criticality_bound, buf);
    }
    if (res.contains("trace")) {
      const IterateTrace trace = trace_from_json(res.at("trace"));
      const auto objective = pipeline == Pipeline::mba_l1 ? Objective::plain_l1 : Objective::ratio_l1_l2;
      const TraceAudit audit = audit_trace(trace, objective, cfg.alpha, cfg.feas_tol, 1e-10,
                                           pipeline != Pipeline::algorithm1);
      std::snprintf(buf, sizeof buf, "%d violations over %zu iterates (worst gap %.3e)",
                    audit.descent_violations, trace.entries.size(), audit.worst_descent_gap);
      report("sufficient descent", audit.descent_violations == 0, buf);
      std::snprintf(buf, sizeof buf, "%d violations (worst q %.3e)", audit.feasibility_violations,
                    audit.worst_q);
      report("iterate feasibility", audit.feasibility_violations == 0, buf);
      std::snprintf(buf, sizeof buf, "%d increases", audit.monotonicity_violations);
      report("monotone objective", audit.monotonicity_violations == 0, buf);
    }
  }
  return failures == 0 ? kExitOk : kExitFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"l1/l2 sparse recovery: instance generation, solvers and benchmarks"};
  app.require_subcommand(1);

  GenArgs gen;
  auto* gen_cmd = app.add_subcommand("gen", "generate a problem instance");
  gen_cmd->add_option("family", gen.family, "robust-cs | cauchy | badly-scaled")->required();
  gen_cmd->add_option("--n", gen.n, "signal length")->required();
  gen_cmd->add_option("--m", gen.m, "rows (cauchy, badly-scaled)");
  gen_cmd->add_option("--p", gen.p, "clean rows (robust-cs)");
  gen_cmd->add_option("--iota", gen.iota, "outlier rows (robust-cs)");
  gen_cmd->add_option("--k", gen.k, "sparsity");
  gen_cmd->add_option("--F", gen.F, "frequency parameter (badly-scaled)");
  gen_cmd->add_option("--D", gen.D, "dynamic range exponent (badly-scaled)");
  gen_cmd->add_option("--gamma", gen.gamma, "Lorentzian scale (cauchy)");
  gen_cmd->add_option("--seed", gen.seed, "64-bit seed");
  gen_cmd->add_option("--out", gen.out, "instance file to write");

  SolveArgs solve;
  auto* solve_cmd = app.add_subcommand("solve", "run a pipeline on an instance file");
  solve_cmd->add_option("--instance", solve.instance, "instance file")->required();
  solve_cmd->add_option("--pipeline", solve.pipeline,
                        "mba_ratio | mba_l1 | algorithm1 | two_stage");
  solve_cmd->add_option("--warm-tol", solve.warm_tol, "warm-stage tolerance (two_stage)");
  solve_cmd->add_flag("--trace", solve.trace, "store the iterate trace in the result file");
  solve_cmd->add_option("--out", solve.out, "result file to write");
  add_solver_flags(solve_cmd, solve.solver);

  BenchArgs bench;
  auto* bench_cmd = app.add_subcommand("bench", "run seed batches and aggregate");
  bench_cmd->add_option("--plan", bench.plan_path, "JSON bench plan");
  bench_cmd->add_option("family", bench.family, "robust-cs | cauchy | badly-scaled");
  bench_cmd->add_option("--scale", bench.scales, "ladder indices i (robust-cs, cauchy)");
  bench_cmd->add_option("--n", bench.n);
  bench_cmd->add_option("--m", bench.m);
  bench_cmd->add_option("--p", bench.p);
  bench_cmd->add_option("--iota", bench.iota);
  bench_cmd->add_option("--k", bench.k, "sparsity (list for badly-scaled)");
  bench_cmd->add_option("--F", bench.F, "list of F (badly-scaled)");
  bench_cmd->add_option("--D", bench.D, "list of D (badly-scaled)");
  bench_cmd->add_option("--seeds", bench.seed_count, "number of seeds per cell");
  bench_cmd->add_option("--first-seed", bench.first_seed);
  bench_cmd->add_option("--seed-list", bench.seed_list, "explicit seeds");
  bench_cmd->add_option("--pipeline", bench.pipeline);
  bench_cmd->add_option("--warm-tol", bench.warm_tol);
  bench_cmd->add_option("--jobs", bench.jobs, "worker threads");
  bench_cmd->add_option("--csv", bench.csv, "per-run CSV");
  bench_cmd->add_option("--agg-csv", bench.agg_csv, "per-cell aggregate CSV");
  add_solver_flags(bench_cmd, bench.solver);

  CheckArgs check;
  auto* check_cmd = app.add_subcommand("check", "verify instance and result invariants");
  check_cmd->add_option("--instance", check.instance)->required();
  check_cmd->add_option("--result", check.result);
  check_cmd->add_option("--criticality-bound", check.criticality_bound);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (gen_cmd->parsed()) return cmd_gen(gen);
    if (solve_cmd->parsed()) return cmd_solve(solve);
    if (bench_cmd->parsed()) return cmd_bench(bench);
    if (check_cmd->parsed()) return cmd_check(check);
  } catch (const UsageError& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitFailure;
  }
  return kExitUsage;
}
