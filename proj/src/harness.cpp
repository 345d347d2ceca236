#include "wcsafe/harness.hpp"

#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "wcsafe/errors.hpp"

namespace wcsafe {

nlohmann::json matrix_to_json(const Matrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (int i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const nlohmann::json& j, const std::string& key) {
  if (!j.is_array() || j.empty() || !j.front().is_array())
    throw ConfigError(key, "expected a nested array of rows");
  const int rows = static_cast<int>(j.size());
  const int cols = static_cast<int>(j.front().size());
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    if (static_cast<int>(j[i].size()) != cols) throw ConfigError(key, "ragged rows");
    for (int c = 0; c < cols; ++c) m(i, c) = j[i][c].get<double>();
  }
  return m;
}

namespace {

Vec vec_from_json(const nlohmann::json& j, const std::string& key) {
  if (!j.is_array()) throw ConfigError(key, "expected an array");
  Vec v;
  for (const auto& x : j) v.push_back(x.get<double>());
  return v;
}

SchemeConfig parse_scheme(const std::string& name) {
  if (name == "worst-case") return {Sampling::WorstCase, true};
  if (name == "worst-case-w.t.") return {Sampling::WorstCase, false};
  if (name == "random") return {Sampling::Random, true};
  if (name == "random-w.t.") return {Sampling::Random, false};
  throw ConfigError("sampling.scheme", "unknown scheme '" + name + "'");
}

// Environment-specific synthesis weights chosen so the certified envelope
// is recoverable by the model-based policy on the nonlinear plant.
void apply_weight_defaults(RunConfig& cfg) {
  if (cfg.synthesis.state_weight_diag.empty()) {
    if (cfg.environment == "cartpole") {
      cfg.synthesis.state_weight_diag = {2.0, 0.5, 10.0, 0.5};
    } else if (cfg.environment == "quadrotor") {
      cfg.synthesis.state_weight_diag = {20.0, 5.0, 40.0, 1.0, 1.0, 0.2};
    }
  }
  if (cfg.synthesis.input_weight_diag.empty()) {
    if (cfg.environment == "cartpole") {
      cfg.synthesis.input_weight_diag = {0.05};
    } else if (cfg.environment == "quadrotor") {
      cfg.synthesis.input_weight_diag = {0.1, 0.1};
    }
  }
}

}  // namespace

RunConfig parse_config(const nlohmann::json& j) {
  RunConfig cfg;
  cfg.environment = j.value("environment", cfg.environment);
  if (cfg.environment != "cartpole" && cfg.environment != "quadrotor" &&
      cfg.environment != "linear")
    throw ConfigError("environment", "must be cartpole, quadrotor, or linear");
  cfg.seed = j.value("seed", cfg.seed);
  cfg.output_dir = j.value("output_dir", cfg.output_dir);
  cfg.envelope_phi = j.value("envelope_phi", cfg.envelope_phi);
  if (!(cfg.envelope_phi > 0.0)) throw ConfigError("envelope_phi", "must be positive");
  cfg.max_steps = j.value("max_steps", cfg.max_steps);
  if (cfg.max_steps < 1) throw ConfigError("max_steps", "must be >= 1");

  if (j.contains("model")) {
    const auto& jm = j.at("model");
    if (jm.contains("a")) cfg.model.a = matrix_from_json(jm.at("a"), "model.a");
    if (jm.contains("b")) cfg.model.b = matrix_from_json(jm.at("b"), "model.b");
    if (jm.contains("action_limit")) cfg.model.action_limit = jm.at("action_limit").get<double>();
    if (cfg.model.a.has_value() != cfg.model.b.has_value())
      throw ConfigError("model", "a and b must be supplied together");
  }
  if (cfg.environment == "linear") {
    if (!cfg.model.a || !cfg.model.b)
      throw ConfigError("model", "linear environment needs explicit a and b");
    if (!cfg.model.action_limit)
      throw ConfigError("model.action_limit", "required for the linear environment");
  }

  if (j.contains("safety")) {
    const auto& js = j.at("safety");
    if (js.contains("d")) cfg.safety.d = matrix_from_json(js.at("d"), "safety.d");
    if (js.contains("v")) cfg.safety.v = vec_from_json(js.at("v"), "safety.v");
    if (js.contains("upper")) cfg.safety.upper = vec_from_json(js.at("upper"), "safety.upper");
    if (js.contains("lower")) cfg.safety.lower = vec_from_json(js.at("lower"), "safety.lower");
    const bool any = cfg.safety.d || cfg.safety.v || cfg.safety.upper || cfg.safety.lower;
    const bool all = cfg.safety.d && cfg.safety.v && cfg.safety.upper && cfg.safety.lower;
    if (any && !all) throw ConfigError("safety", "d, v, upper, lower must be supplied together");
  }
  if (cfg.environment == "linear" && !cfg.safety.d)
    throw ConfigError("safety", "linear environment needs an explicit safety set");

  if (j.contains("synthesis")) {
    const auto& js = j.at("synthesis");
    cfg.synthesis.alpha = js.value("alpha", cfg.synthesis.alpha);
    if (js.contains("state_weight"))
      cfg.synthesis.state_weight_diag = vec_from_json(js.at("state_weight"), "synthesis.state_weight");
    if (js.contains("input_weight"))
      cfg.synthesis.input_weight_diag = vec_from_json(js.at("input_weight"), "synthesis.input_weight");
    if (js.contains("f_gain") && !js.at("f_gain").is_null())
      cfg.synthesis.f_gain = matrix_from_json(js.at("f_gain"), "synthesis.f_gain");
    if (js.contains("p") && !js.at("p").is_null())
      cfg.synthesis.p = matrix_from_json(js.at("p"), "synthesis.p");
  }
  if (!(cfg.synthesis.alpha > 0.0 && cfg.synthesis.alpha < 1.0))
    throw ConfigError("synthesis.alpha", "must lie in (0, 1)");
  apply_weight_defaults(cfg);

  if (j.contains("sampling")) {
    const auto& js = j.at("sampling");
    cfg.sampling.scheme = parse_scheme(js.value("scheme", std::string("worst-case")));
    cfg.sampling.period = js.value("period", cfg.sampling.period);
    if (js.contains("q")) {
      cfg.sampling.q.clear();
      for (const auto& x : js.at("q")) cfg.sampling.q.push_back(x.get<int>());
    }
    cfg.sampling.phi = js.value("phi", cfg.envelope_phi);
    if (js.contains("intervals")) {
      std::vector<std::pair<double, double>> iv;
      for (const auto& pair : js.at("intervals")) {
        if (!pair.is_array() || pair.size() != 2)
          throw ConfigError("sampling.intervals", "each entry must be [low, high]");
        iv.emplace_back(pair[0].get<double>(), pair[1].get<double>());
      }
      cfg.sampling.intervals = std::move(iv);
    }
    if (js.contains("episodes")) cfg.sampling.episodes = js.at("episodes").get<int>();
  } else {
    cfg.sampling.phi = cfg.envelope_phi;
  }
  if (cfg.sampling.period < 1) throw ConfigError("sampling.period", "must be >= 1");
  for (int q : cfg.sampling.q)
    if (q < 1) throw ConfigError("sampling.q", "entries must be >= 1");

  if (j.contains("disturbance")) {
    const auto& jd = j.at("disturbance");
    const std::string kind = jd.value("kind", std::string("none"));
    if (kind == "none") {
      cfg.disturbance.kind = DisturbanceSpec::Kind::None;
    } else if (kind == "friction") {
      cfg.disturbance.kind = DisturbanceSpec::Kind::Friction;
    } else {
      throw ConfigError("disturbance.kind", "must be none or friction");
    }
    cfg.disturbance.max_magnitude = jd.value("max_magnitude", 0.0);
    if (cfg.disturbance.max_magnitude < 0.0)
      throw ConfigError("disturbance.max_magnitude", "must be >= 0");
    cfg.disturbance.seed = jd.value("seed", cfg.seed);
  } else {
    cfg.disturbance.seed = cfg.seed;
  }

  if (j.contains("agent")) cfg.agent = j.at("agent").get<AgentConfig>();
  cfg.agent.seed = j.contains("agent") && j.at("agent").contains("seed") ? cfg.agent.seed
                                                                         : cfg.seed;

  if (j.contains("eval")) {
    const auto& je = j.at("eval");
    if (je.contains("plane")) {
      if (!je.at("plane").is_array() || je.at("plane").size() != 2)
        throw ConfigError("eval.plane", "must be a pair of state indices");
      cfg.eval.plane_i = je.at("plane")[0].get<int>();
      cfg.eval.plane_j = je.at("plane")[1].get<int>();
    }
    cfg.eval.resolution = je.value("resolution", cfg.eval.resolution);
    cfg.eval.horizon = je.value("horizon", cfg.eval.horizon);
    cfg.eval.seed = je.value("seed", cfg.seed);
    cfg.eval.workers = je.value("workers", cfg.eval.workers);
  } else {
    cfg.eval.seed = cfg.seed;
  }
  if (cfg.eval.resolution < 2) throw ConfigError("eval.resolution", "must be >= 2");
  if (cfg.eval.horizon < 1) throw ConfigError("eval.horizon", "must be >= 1");
  if (cfg.environment == "quadrotor" && !(j.contains("eval") && j.at("eval").contains("plane"))) {
    cfg.eval.plane_i = 0;
    cfg.eval.plane_j = 1;
  }

  const int state_dim = cfg.environment == "cartpole"    ? 4
                        : cfg.environment == "quadrotor" ? 6
                                                         : cfg.model.a->rows();
  if (!(j.contains("sampling") && j.at("sampling").contains("q")))
    cfg.sampling.q.assign(static_cast<std::size_t>(state_dim) - 1, 5);
  if (static_cast<int>(cfg.sampling.q.size()) != state_dim - 1)
    throw ConfigError("sampling.q", "must have state_dim - 1 entries (state_dim = " +
                                        std::to_string(state_dim) + ")");
  if (cfg.eval.plane_i < 0 || cfg.eval.plane_i >= state_dim || cfg.eval.plane_j < 0 ||
      cfg.eval.plane_j >= state_dim || cfg.eval.plane_i == cfg.eval.plane_j)
    throw ConfigError("eval.plane", "indices must be distinct and within the state dimension");
  if (cfg.sampling.intervals &&
      static_cast<int>(cfg.sampling.intervals->size()) != state_dim)
    throw ConfigError("sampling.intervals", "must have state_dim entries");

  if (!(j.contains("agent") && j.at("agent").contains("action_bound")))
    cfg.agent.action_bound = make_environment(cfg)->action_limit();
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config file '" + path + "' is not valid JSON: " + e.what());
  }
  return parse_config(j);
}

nlohmann::json effective_config(const RunConfig& cfg) {
  nlohmann::json j;
  j["environment"] = cfg.environment;
  j["seed"] = cfg.seed;
  j["output_dir"] = cfg.output_dir;
  j["envelope_phi"] = cfg.envelope_phi;
  j["max_steps"] = cfg.max_steps;
  if (cfg.model.a) {
    j["model"]["a"] = matrix_to_json(*cfg.model.a);
    j["model"]["b"] = matrix_to_json(*cfg.model.b);
  }
  if (cfg.model.action_limit) j["model"]["action_limit"] = *cfg.model.action_limit;
  if (cfg.safety.d) {
    j["safety"]["d"] = matrix_to_json(*cfg.safety.d);
    j["safety"]["v"] = *cfg.safety.v;
    j["safety"]["upper"] = *cfg.safety.upper;
    j["safety"]["lower"] = *cfg.safety.lower;
  }
  j["synthesis"]["alpha"] = cfg.synthesis.alpha;
  j["synthesis"]["state_weight"] = cfg.synthesis.state_weight_diag;
  j["synthesis"]["input_weight"] = cfg.synthesis.input_weight_diag;
  if (cfg.synthesis.f_gain) j["synthesis"]["f_gain"] = matrix_to_json(*cfg.synthesis.f_gain);
  if (cfg.synthesis.p) j["synthesis"]["p"] = matrix_to_json(*cfg.synthesis.p);
  j["sampling"]["scheme"] = cfg.sampling.scheme.name();
  j["sampling"]["period"] = cfg.sampling.period;
  j["sampling"]["q"] = cfg.sampling.q;
  j["sampling"]["phi"] = cfg.sampling.phi;
  if (cfg.sampling.intervals) {
    nlohmann::json iv = nlohmann::json::array();
    for (const auto& [lo, hi] : *cfg.sampling.intervals) iv.push_back({lo, hi});
    j["sampling"]["intervals"] = std::move(iv);
  }
  if (cfg.sampling.episodes) j["sampling"]["episodes"] = *cfg.sampling.episodes;
  j["disturbance"]["kind"] =
      cfg.disturbance.kind == DisturbanceSpec::Kind::None ? "none" : "friction";
  j["disturbance"]["max_magnitude"] = cfg.disturbance.max_magnitude;
  j["disturbance"]["seed"] = cfg.disturbance.seed;
  j["agent"] = cfg.agent;
  j["eval"]["plane"] = {cfg.eval.plane_i, cfg.eval.plane_j};
  j["eval"]["resolution"] = cfg.eval.resolution;
  j["eval"]["horizon"] = cfg.eval.horizon;
  j["eval"]["seed"] = cfg.eval.seed;
  j["eval"]["workers"] = cfg.eval.workers;
  return j;
}

std::string config_hash(const RunConfig& cfg) {
  const std::string dump = effective_config(cfg).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : dump) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream out;
  out << std::hex << std::setw(16) << std::setfill('0') << h;
  return out.str();
}

std::unique_ptr<Environment> make_environment(const RunConfig& cfg) {
  EpisodeConfig ep;
  ep.max_steps = cfg.max_steps;
  ep.terminate_on_violation = cfg.sampling.scheme.termination;
  ep.disturbance = cfg.disturbance;
  if (cfg.environment == "cartpole") return std::make_unique<CartPoleEnv>(ep);
  if (cfg.environment == "quadrotor") return std::make_unique<PlanarQuadrotorEnv>(ep);
  // linear
  LinearModel model(*cfg.model.a, *cfg.model.b);
  SafetySet set(*cfg.safety.d, *cfg.safety.v, *cfg.safety.upper, *cfg.safety.lower);
  if (set.state_dim() != model.state_dim())
    throw ConfigError("safety.d", "columns must match model.a dimension");
  return std::make_unique<LinearPlantEnv>(model, set, *cfg.model.action_limit, ep);
}

SynthesisResult synthesize_from_config(const RunConfig& cfg) {
  const std::unique_ptr<Environment> env = make_environment(cfg);
  LinearModel model = cfg.model.a ? LinearModel(*cfg.model.a, *cfg.model.b) : env->linearize();
  SafetySet set = cfg.safety.d
                      ? SafetySet(*cfg.safety.d, *cfg.safety.v, *cfg.safety.upper,
                                  *cfg.safety.lower)
                      : env->safety_spec().first;
  if (set.state_dim() != model.state_dim())
    throw ConfigError("safety.d", "columns must match the model state dimension");

  Matrix f = [&] {
    if (cfg.synthesis.f_gain) {
      if (cfg.synthesis.f_gain->rows() != model.action_dim() ||
          cfg.synthesis.f_gain->cols() != model.state_dim())
        throw ConfigError("synthesis.f_gain", "must be action_dim x state_dim");
      return *cfg.synthesis.f_gain;
    }
    if (static_cast<int>(cfg.synthesis.state_weight_diag.size()) != model.state_dim())
      throw ConfigError("synthesis.state_weight", "must have state_dim entries");
    if (static_cast<int>(cfg.synthesis.input_weight_diag.size()) != model.action_dim())
      throw ConfigError("synthesis.input_weight", "must have action_dim entries");
    return dlqr_gain(model, SymmetricMatrix::diag(cfg.synthesis.state_weight_diag),
                     SymmetricMatrix::diag(cfg.synthesis.input_weight_diag));
  }();

  const SymmetricMatrix p = [&] {
    if (cfg.synthesis.p) return SymmetricMatrix(*cfg.synthesis.p);
    return lyapunov_p(model.a + model.b * f, cfg.synthesis.alpha, set, cfg.envelope_phi);
  }();

  Certificate cert = build_certificate(model, f, p, cfg.synthesis.alpha);
  SafetyEnvelope envelope(cert.p, cfg.envelope_phi);
  const bool contained = set.symmetric() ? envelope_contained_in_set(envelope, set) : false;
  return SynthesisResult{std::move(model), std::move(set), std::move(cert),
                         std::move(envelope), contained};
}

nlohmann::json certificate_report(const SynthesisResult& synth) {
  const CertificateMargins margins = certificate_margins(synth.cert);
  return {{"alpha", synth.cert.alpha},
          {"f_gain", matrix_to_json(synth.cert.f_gain)},
          {"p", matrix_to_json(synth.cert.p.mat())},
          {"h", matrix_to_json(synth.cert.h.mat())},
          {"a_bar", matrix_to_json(synth.cert.a_bar)},
          {"h_min_eigenvalue", margins.h_min_eigenvalue},
          {"gap_min_eigenvalue", margins.gap_min_eigenvalue},
          {"envelope_phi", synth.envelope.phi},
          {"envelope_contained_in_set", synth.contained}};
}

std::vector<ReportRow> summarize_runs(const std::vector<RunRecord>& records) {
  std::vector<ReportRow> rows;
  for (const RunRecord& r : records) {
    rows.push_back(ReportRow{r.scheme, r.episodes.size(), r.failed_episodes(), failure_rate(r)});
  }
  return rows;
}

void write_report_table(const std::vector<ReportRow>& rows, std::ostream& out) {
  out << "scheme              EPs Num  Failed Eps  Failure rate\n";
  for (const ReportRow& r : rows) {
    std::ostringstream line;
    line << r.scheme;
    while (line.str().size() < 20) line << ' ';
    line << r.episodes;
    while (line.str().size() < 29) line << ' ';
    line << r.failed;
    while (line.str().size() < 41) line << ' ';
    line << std::fixed << std::setprecision(2) << 100.0 * r.rate << "%";
    out << line.str() << "\n";
  }
}

void write_reward_curve_csv(const RunRecord& record, std::ostream& out) {
  out << "episode,return,steps,violation\n";
  out.precision(17);
  for (const EpisodeRecord& e : record.episodes) {
    out << e.index << "," << e.episodic_return << "," << e.steps << ","
        << (e.violation ? 1 : 0) << "\n";
  }
}

}  // namespace wcsafe
