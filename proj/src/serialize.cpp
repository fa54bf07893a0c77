#include "l1l2/serialize.hpp"

#include "l1l2/error.hpp"

#include <fstream>
#include <string>

namespace l1l2 {

using nlohmann::json;

json to_json(const Vector& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

Vector vector_from_json(const json& j) {
  if (!j.is_array()) throw InvalidParameter("expected a JSON array of numbers");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  return v;
}

json to_json(const GenSpec& s) {
  return {{"family", to_string(s.family)},
          {"n", s.n},
          {"m", s.m},
          {"p", s.p},
          {"iota", s.iota},
          {"k", s.k},
          {"gamma", s.gamma},
          {"sigma_factor", s.sigma_factor},
          {"noise_scale", s.noise_scale},
          {"F", s.F},
          {"D", s.D},
          {"seed", s.seed}};
}

GenSpec gen_spec_from_json(const json& j) {
  GenSpec s;
  s.family = family_from_string(j.at("family").get<std::string>());
  s.n = j.value("n", s.n);
  s.m = j.value("m", s.m);
  s.p = j.value("p", s.p);
  s.iota = j.value("iota", s.iota);
  s.k = j.value("k", s.k);
  s.gamma = j.value("gamma", s.gamma);
  s.sigma_factor = j.value("sigma_factor", s.sigma_factor);
  s.noise_scale = j.value("noise_scale", s.noise_scale);
  s.F = j.value("F", s.F);
  s.D = j.value("D", s.D);
  s.seed = j.value("seed", s.seed);
  return s;
}

json to_json(const SolverConfig& c) {
  return {{"alpha", c.alpha},       {"l_min", c.l_min},
          {"l_max", c.l_max},       {"tol", c.tol},
          {"max_outer_iters", c.max_outer_iters},
          {"sub_tol", c.sub_tol},   {"sub_max_iter", c.sub_max_iter},
          {"feas_tol", c.feas_tol}, {"record_trace", c.record_trace}};
}

SolverConfig solver_config_from_json(const json& j) {
  static const char* known[] = {"alpha",   "l_min",        "l_max",    "tol",
                                "max_outer_iters", "sub_tol", "sub_max_iter", "feas_tol",
                                "record_trace", "record_iterates"};
  for (const auto& [key, _] : j.items()) {
    if (std::find(std::begin(known), std::end(known), key) == std::end(known)) {
      throw InvalidParameter("unknown solver config field '" + key + "'");
    }
  }
  SolverConfig c;
  c.alpha = j.value("alpha", c.alpha);
  c.l_min = j.value("l_min", c.l_min);
  c.l_max = j.value("l_max", c.l_max);
  c.tol = j.value("tol", c.tol);
  c.max_outer_iters = j.value("max_outer_iters", c.max_outer_iters);
  c.sub_tol = j.value("sub_tol", c.sub_tol);
  c.sub_max_iter = j.value("sub_max_iter", c.sub_max_iter);
  c.feas_tol = j.value("feas_tol", c.feas_tol);
  c.record_trace = j.value("record_trace", c.record_trace);
  c.record_iterates = j.value("record_iterates", c.record_iterates);
  c.validate();
  return c;
}

json to_json(const ProblemInstance& inst) {
  const Matrix& a = inst.model.matrix().entries();
  json matrix = json::array();
  for (Eigen::Index i = 0; i < a.rows(); ++i) matrix.push_back(to_json(Vector(a.row(i).transpose())));

  json model = {{"kind", to_string(inst.model.kind())}, {"sigma", inst.model.sigma()}};
  if (const auto* lor = std::get_if<Lorentzian>(&inst.model.variant())) {
    model["gamma"] = lor->gamma;
  }
  if (const auto* rcs = std::get_if<RobustCS>(&inst.model.variant())) {
    model["r"] = rcs->outliers;
  }

  json noise = {{"epsilon", to_json(inst.noise.epsilon)},
                {"rank_attempts", inst.noise.rank_attempts}};
  if (inst.noise.outliers.size() > 0) noise["z"] = to_json(inst.noise.outliers);
  if (inst.noise.w.size() > 0) noise["w"] = to_json(inst.noise.w);

  return {{"format_version", kFormatVersion},
          {"kind", "instance"},
          {"gen_spec", to_json(inst.spec)},
          {"matrix", std::move(matrix)},
          {"b", to_json(inst.model.b())},
          {"x_orig", to_json(inst.x_orig)},
          {"model", std::move(model)},
          {"noise_record", std::move(noise)}};
}

ProblemInstance instance_from_json(const json& j) {
  if (j.value("format_version", 0) != kFormatVersion) {
    throw InvalidParameter("unsupported instance format_version");
  }
  const json& rows = j.at("matrix");
  if (!rows.is_array() || rows.empty()) throw InvalidParameter("instance matrix is empty");
  const auto m = static_cast<Eigen::Index>(rows.size());
  const auto n = static_cast<Eigen::Index>(rows[0].size());
  Matrix a(m, n);
  for (Eigen::Index i = 0; i < m; ++i) {
    const Vector row = vector_from_json(rows[static_cast<std::size_t>(i)]);
    if (row.size() != n) throw InvalidParameter("instance matrix rows differ in length");
    a.row(i) = row.transpose();
  }
  auto sensing = std::make_shared<const SensingMatrix>(std::move(a));
  Vector b = vector_from_json(j.at("b"));

  const json& mj = j.at("model");
  const std::string kind = mj.at("kind").get<std::string>();
  const double sigma = mj.at("sigma").get<double>();
  std::optional<ConstraintModel> model;
  if (kind == "least_squares") {
    model = ConstraintModel::least_squares(sensing, std::move(b), sigma);
  } else if (kind == "lorentzian") {
    model = ConstraintModel::lorentzian(sensing, std::move(b), sigma, mj.at("gamma").get<double>());
  } else if (kind == "robust_cs") {
    model = ConstraintModel::robust_cs(sensing, std::move(b), sigma, mj.at("r").get<int>());
  } else {
    throw InvalidParameter("unknown model kind '" + kind + "'");
  }

  NoiseRecord noise;
  const json& nj = j.at("noise_record");
  noise.epsilon = vector_from_json(nj.at("epsilon"));
  if (nj.contains("z")) noise.outliers = vector_from_json(nj.at("z"));
  if (nj.contains("w")) noise.w = vector_from_json(nj.at("w"));
  noise.rank_attempts = nj.value("rank_attempts", 1);

  Vector x_orig = vector_from_json(j.at("x_orig"));
  if (x_orig.size() != n) throw DimensionMismatch("x_orig length differs from columns of A");
  return {std::move(*model), std::move(x_orig), gen_spec_from_json(j.at("gen_spec")),
          std::move(noise)};
}

json to_json(const IterateTrace& trace) {
  json arr = json::array();
  for (const auto& e : trace.entries) {
    arr.push_back({{"omega", e.omega},
                   {"step_norm", e.step_norm},
                   {"x_norm", e.x_norm},
                   {"l_bar", e.l_bar},
                   {"inner_doublings", e.inner_doublings},
                   {"q", e.q},
                   {"wall_time", e.wall_time}});
  }
  return arr;
}

IterateTrace trace_from_json(const json& j) {
  IterateTrace trace;
  for (const auto& e : j) {
    trace.entries.push_back({e.at("omega").get<double>(), e.at("step_norm").get<double>(),
                             e.at("x_norm").get<double>(), e.at("l_bar").get<double>(),
                             e.at("inner_doublings").get<int>(), e.at("q").get<double>(),
                             e.at("wall_time").get<double>()});
  }
  return trace;
}

json result_to_json(const PipelineOutcome& out, Pipeline pipeline, const SolverConfig& cfg,
                    double warm_tol) {
  json metrics = {{"rec_err", out.rec_err},
                  {"residual", out.residual},
                  {"iterations", out.iterations},
                  {"criticality", out.criticality},
                  {"t_warm", out.t_warm},
                  {"t_main", out.t_main},
                  {"descent_violations", out.audit.descent_violations},
                  {"feasibility_violations", out.audit.feasibility_violations}};
  if (pipeline == Pipeline::two_stage) {
    metrics["warm_rec_err"] = out.warm_rec_err;
    metrics["warm_residual"] = out.warm_residual;
    metrics["warm_iterations"] = out.warm_iterations;
    metrics["warm_status"] = to_string(out.warm_status);
  }
  json run_config = {{"pipeline", to_string(pipeline)},
                     {"config", to_json(cfg)},
                     {"warm_tol", warm_tol}};
  json doc = {{"format_version", kFormatVersion},
              {"kind", "result"},
              {"run_config", std::move(run_config)},
              {"status", to_string(out.status)},
              {"metrics", std::move(metrics)},
              {"x_final", to_json(out.x_final)}};
  if (!out.error.empty()) doc["error"] = out.error;
  if (out.x_warm) doc["x_warm"] = to_json(*out.x_warm);
  if (cfg.record_trace && out.trace) doc["trace"] = to_json(*out.trace);
  if (cfg.record_trace && out.warm_trace) doc["warm_trace"] = to_json(*out.warm_trace);
  return doc;
}

BenchPlan plan_from_json(const json& j) {
  BenchPlan plan;
  plan.family = family_from_string(j.at("family").get<std::string>());
  if (j.contains("cells")) {
    for (const auto& c : j.at("cells")) {
      json cell = c;
      if (!cell.contains("family")) cell["family"] = to_string(plan.family);
      plan.cells.push_back(gen_spec_from_json(cell));
    }
  }
  if (j.contains("scales")) {
    for (const auto& s : j.at("scales")) plan.cells.push_back(scaled_cell(plan.family, s.get<int>()));
  }
  if (j.contains("seeds")) {
    plan.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
  } else if (j.contains("seed_count")) {
    const auto count = j.at("seed_count").get<std::uint64_t>();
    const auto first = j.value("first_seed", std::uint64_t{1});
    for (std::uint64_t s = 0; s < count; ++s) plan.seeds.push_back(first + s);
  }
  if (j.contains("pipeline")) plan.pipeline = pipeline_from_string(j.at("pipeline").get<std::string>());
  if (j.contains("config")) plan.config = solver_config_from_json(j.at("config"));
  plan.warm_tol = j.value("warm_tol", plan.warm_tol);
  plan.jobs = j.value("jobs", plan.jobs);
  plan.validate();
  return plan;
}

json to_json(const BenchPlan& plan) {
  json cells = json::array();
  for (const auto& c : plan.cells) cells.push_back(to_json(c));
  return {{"family", to_string(plan.family)}, {"cells", std::move(cells)},
          {"seeds", plan.seeds},              {"pipeline", to_string(plan.pipeline)},
          {"config", to_json(plan.config)},   {"warm_tol", plan.warm_tol},
          {"jobs", plan.jobs}};
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path.string() + "' for reading");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw InvalidParameter("malformed JSON in '" + path.string() + "': " + e.what());
  }
}

void write_json_file(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  out << j.dump(1) << '\n';
  if (!out) throw Error("failed writing '" + path.string() + "'");
}

}  // namespace l1l2
