#pragma once

#include "l1l2/bench.hpp"
#include "l1l2/drivers.hpp"
#include "l1l2/instances.hpp"

#include <json.hpp>

#include <filesystem>

namespace l1l2 {

inline constexpr int kFormatVersion = 1;

nlohmann::json to_json(const Vector& v);
Vector vector_from_json(const nlohmann::json& j);

nlohmann::json to_json(const GenSpec& spec);
GenSpec gen_spec_from_json(const nlohmann::json& j);

/// Field names mirror SolverConfig; missing fields keep their defaults.
nlohmann::json to_json(const SolverConfig& cfg);
SolverConfig solver_config_from_json(const nlohmann::json& j);

/// {format_version, gen_spec, matrix, b, x_orig, model, noise_record}
nlohmann::json to_json(const ProblemInstance& inst);
ProblemInstance instance_from_json(const nlohmann::json& j);

nlohmann::json to_json(const IterateTrace& trace);
IterateTrace trace_from_json(const nlohmann::json& j);

/// Result document: the instance envelope's format_version plus
/// {run_config, status, metrics, x_final, trace?}.
nlohmann::json result_to_json(const PipelineOutcome& out, Pipeline pipeline,
                              const SolverConfig& cfg, double warm_tol);

/// {family, cells: [gen_spec...] | scales: [i...], seeds: [...] | seed_count, pipeline, config, warm_tol, jobs}
BenchPlan plan_from_json(const nlohmann::json& j);
nlohmann::json to_json(const BenchPlan& plan);

nlohmann::json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const nlohmann::json& j);

}  // namespace l1l2
