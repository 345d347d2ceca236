#pragma once

#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "wcsafe/control.hpp"
#include "wcsafe/env.hpp"
#include "wcsafe/learner.hpp"
#include "wcsafe/sampler.hpp"
#include "wcsafe/trainer.hpp"

#include <json.hpp>

namespace wcsafe {

struct SamplingConfig {
  SchemeConfig scheme;
  int period = 2;
  std::vector<int> q{5, 5, 5};
  double phi = 1.0;
  /// Uniform-draw intervals for the random scheme; defaults to the safety
  /// box of the environment.
  std::optional<std::vector<std::pair<double, double>>> intervals;
  /// Episode budget for the random scheme; defaults to the matched
  /// worst-case episode count.
  std::optional<int> episodes;
};

struct SynthesisConfig {
  double alpha = 0.8;
  Vec state_weight_diag;  // per-environment defaults when empty
  Vec input_weight_diag;
  std::optional<Matrix> f_gain;           // precomputed gain, validated not synthesized
  std::optional<Matrix> p;                // precomputed envelope shape
};

struct EvalConfig {
  int plane_i = 0;
  int plane_j = 2;
  int resolution = 41;
  int horizon = 500;
  std::uint64_t seed = 1;
  int workers = 0;  // 0 = hardware concurrency
};

struct ModelConfig {
  std::optional<Matrix> a;  // explicit (A, B) instead of the env linearization
  std::optional<Matrix> b;
  std::optional<double> action_limit;  // required for environment = "linear"
};

struct SafetyConfig {
  std::optional<Matrix> d;
  std::optional<Vec> v;
  std::optional<Vec> upper;
  std::optional<Vec> lower;
};

struct RunConfig {
  std::string environment = "cartpole";
  std::uint64_t seed = 1;
  std::string output_dir = "runs/out";
  ModelConfig model;
  SafetyConfig safety;
  SynthesisConfig synthesis;
  double envelope_phi = 1.0;
  SamplingConfig sampling;
  int max_steps = 500;
  DisturbanceSpec disturbance;
  AgentConfig agent;
  EvalConfig eval;
};

/// Parses a config JSON, filling defaults and validating dimensions.
/// Throws ConfigError naming the offending key.
RunConfig parse_config(const nlohmann::json& j);
RunConfig load_config(const std::string& path);

/// Full JSON with every default materialized, so runs are self-describing;
/// round-trips losslessly through parse_config.
nlohmann::json effective_config(const RunConfig& cfg);

/// FNV-1a hash of the effective config dump, as a hex string.
std::string config_hash(const RunConfig& cfg);

/// Builds the configured environment (termination flag comes from the
/// sampling scheme).
std::unique_ptr<Environment> make_environment(const RunConfig& cfg);

struct SynthesisResult {
  LinearModel model;
  SafetySet set;
  Certificate cert;
  SafetyEnvelope envelope;
  bool contained;  // envelope fits inside the safety set
};

/// Model + safety set from the config (explicit matrices or the env
/// linearization), F from DLQR unless supplied, P from the scaled Lyapunov
/// solution unless supplied, everything validated through
/// build_certificate.
SynthesisResult synthesize_from_config(const RunConfig& cfg);

nlohmann::json certificate_report(const SynthesisResult& synth);

// Matrix/vector JSON helpers (row-major nested arrays).
nlohmann::json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const nlohmann::json& j, const std::string& key);

struct ReportRow {
  std::string scheme;
  std::size_t episodes = 0;
  int failed = 0;
  double rate = 0.0;
};

std::vector<ReportRow> summarize_runs(const std::vector<RunRecord>& records);
void write_report_table(const std::vector<ReportRow>& rows, std::ostream& out);

/// Columns: episode, return, steps, violation.
void write_reward_curve_csv(const RunRecord& record, std::ostream& out);

}  // namespace wcsafe
