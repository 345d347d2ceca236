#include "wcsafe/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "wcsafe/errors.hpp"
#include "wcsafe/evaluator.hpp"
#include "wcsafe/harness.hpp"

namespace wcsafe {

namespace {

namespace fs = std::filesystem;

void write_text(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write '" + path.string() + "'");
  out << text;
}

template <typename WriteFn>
void write_stream(const fs::path& path, const WriteFn& fn) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write '" + path.string() + "'");
  fn(out);
}

fs::path out_dir(const RunConfig& cfg, const std::string& override_dir) {
  if (!override_dir.empty()) return override_dir;
  if (const char* env = std::getenv("WCSAFE_OUTPUT_DIR"); env && *env) {
    return fs::path(env) / cfg.output_dir;
  }
  return cfg.output_dir;
}

void emit_effective_config(const RunConfig& cfg, const fs::path& dir) {
  nlohmann::json j = effective_config(cfg);
  j["config_hash"] = config_hash(cfg);
  write_text(dir / "effective_config.json", j.dump(2) + "\n");
}

std::string scheme_tag(const SchemeConfig& scheme) {
  std::string tag = scheme.name();
  for (char& c : tag)
    if (c == '.') c = '_';
  return tag;
}

int run_synthesize(const std::string& config_path, const std::string& override_dir) {
  const RunConfig cfg = load_config(config_path);
  const SynthesisResult synth = synthesize_from_config(cfg);
  const CertificateMargins margins = certificate_margins(synth.cert);
  std::cout << "certificate valid\n"
            << "  min eig(H)            = " << margins.h_min_eigenvalue << "\n"
            << "  min eig(alpha P - H)  = " << margins.gap_min_eigenvalue << "\n"
            << "  envelope contained in safety set: " << (synth.contained ? "yes" : "no")
            << "\n";
  const fs::path dir = out_dir(cfg, override_dir);
  nlohmann::json report = certificate_report(synth);
  report["config_hash"] = config_hash(cfg);
  report["seed"] = cfg.seed;
  write_text(dir / "certificate.json", report.dump(2) + "\n");
  emit_effective_config(cfg, dir);
  std::cout << "wrote " << (dir / "certificate.json").string() << "\n";
  return 0;
}

int run_sample(const std::string& config_path, const std::string& override_dir) {
  const RunConfig cfg = load_config(config_path);
  const SynthesisResult synth = synthesize_from_config(cfg);
  const AngleGridSpec spec(synth.model.state_dim(), cfg.sampling.q, cfg.sampling.phi,
                           cfg.sampling.period);
  const WorstCaseGrid grid = generate_grid(synth.envelope, spec);
  std::cout << "episodes: " << episode_count(spec) << "\n";
  std::cout << "grid points per period: " << grid.points.size() << "\n";
  const fs::path dir = out_dir(cfg, override_dir);
  write_stream(dir / "grid.csv", [&](std::ostream& out) { write_grid_csv(grid, out); });
  emit_effective_config(cfg, dir);
  std::cout << "wrote " << (dir / "grid.csv").string() << "\n";
  return 0;
}

struct TrainOutputs {
  RunRecord record;
  fs::path record_path;
  fs::path checkpoint_path;
};

TrainOutputs train_once(const RunConfig& cfg, const fs::path& dir) {
  const SynthesisResult synth = synthesize_from_config(cfg);
  std::unique_ptr<Environment> env = make_environment(cfg);

  AgentConfig agent_cfg = cfg.agent;
  DdpgAgent agent(env->state_dim(), env->action_dim(), agent_cfg);

  RunRecord record;
  if (cfg.sampling.scheme.sampling == Sampling::WorstCase) {
    const AngleGridSpec spec(env->state_dim(), cfg.sampling.q, cfg.sampling.phi,
                             cfg.sampling.period);
    const WorstCaseGrid grid = generate_grid(synth.envelope, spec);
    record = run_curriculum(*env, agent, synth.cert, grid);
  } else {
    std::vector<std::pair<double, double>> intervals;
    if (cfg.sampling.intervals) {
      intervals = *cfg.sampling.intervals;
    } else {
      for (int i = 0; i < synth.set.rows(); ++i) {
        const double b = std::min(synth.set.upper[i], -synth.set.lower[i]);
        intervals.emplace_back(-b, b);
      }
    }
    const int episodes = cfg.sampling.episodes.value_or(static_cast<int>(episode_count(
        AngleGridSpec(env->state_dim(), cfg.sampling.q, cfg.sampling.phi, cfg.sampling.period))));
    Rng rng = Rng(cfg.seed).split(0xB0D1ED);
    record = run_random_baseline(*env, agent, synth.cert, intervals, episodes, rng);
  }
  record.config_hash = config_hash(cfg);

  const std::string tag = scheme_tag(cfg.sampling.scheme) + "_seed" + std::to_string(cfg.seed);
  TrainOutputs outs{std::move(record), dir / ("runrecord_" + tag + ".json"),
                    dir / ("checkpoint_" + tag + ".json")};
  write_text(outs.record_path, run_record_to_json(outs.record).dump(2) + "\n");
  write_stream(dir / ("episodes_" + tag + ".csv"),
               [&](std::ostream& out) { write_episode_csv(outs.record, out); });
  write_stream(dir / ("reward_curve_" + tag + ".csv"),
               [&](std::ostream& out) { write_reward_curve_csv(outs.record, out); });
  write_text(outs.checkpoint_path, agent.checkpoint(outs.record.config_hash).dump() + "\n");
  emit_effective_config(cfg, dir);
  return outs;
}

int run_train(const std::string& config_path, const std::string& scheme_override,
              std::optional<std::uint64_t> seed_override, const std::string& override_dir) {
  RunConfig cfg = load_config(config_path);
  if (!scheme_override.empty()) {
    nlohmann::json patched = effective_config(cfg);
    patched["sampling"]["scheme"] = scheme_override;
    cfg = parse_config(patched);
  }
  if (seed_override) {
    nlohmann::json patched = effective_config(cfg);
    patched["seed"] = *seed_override;
    patched["agent"].erase("seed");
    patched["disturbance"].erase("seed");
    patched["eval"].erase("seed");
    cfg = parse_config(patched);
  }
  const fs::path dir = out_dir(cfg, override_dir);
  const TrainOutputs outs = train_once(cfg, dir);
  std::cout << "scheme: " << outs.record.scheme << "\n"
            << "episodes: " << outs.record.episodes.size() << "\n"
            << "failed episodes: " << outs.record.failed_episodes() << "\n"
            << "failure rate: " << failure_rate(outs.record) << "\n"
            << "wrote " << outs.record_path.string() << "\n";
  return 0;
}

int run_eval(const std::string& config_path, const std::string& checkpoint_path,
             const std::string& override_dir, const std::string& trajectory_from,
             const std::string& trajectory_out) {
  const RunConfig cfg = load_config(config_path);
  const SynthesisResult synth = synthesize_from_config(cfg);

  PolicyFn policy;
  std::optional<DdpgAgent> agent;
  std::string scheme = "certificate-only";
  if (!checkpoint_path.empty()) {
    std::ifstream in(checkpoint_path);
    if (!in) throw ConfigError("cannot open checkpoint '" + checkpoint_path + "'");
    nlohmann::json j;
    in >> j;
    agent.emplace(DdpgAgent::restore(j));
    if (agent->state_dim() != synth.model.state_dim())
      throw ConfigError("checkpoint", "state dimension does not match the config");
    policy = [&a = *agent](const Vec& s) { return a.policy_action(s); };
    scheme = j.value("config_hash", std::string());
  } else {
    const int m = synth.model.action_dim();
    policy = [m](const Vec&) { return Vec(m, 0.0); };
  }

  const std::unique_ptr<Environment> proto = make_environment(cfg);
  const fs::path dir = out_dir(cfg, override_dir);

  if (!trajectory_from.empty()) {
    Vec s0;
    std::stringstream ss(trajectory_from);
    std::string field;
    while (std::getline(ss, field, ',')) s0.push_back(std::stod(field));
    const fs::path path = trajectory_out.empty() ? dir / "trajectory.csv" : fs::path(trajectory_out);
    std::unique_ptr<Environment> env = proto->clone();
    EpisodeConfig ep = env->episode_config();
    ep.terminate_on_violation = false;
    ep.max_steps = cfg.eval.horizon + 1;
    env->set_episode_config(ep);
    write_stream(path, [&](std::ostream& out) {
      rollout_csv(*env, policy, synth.cert, s0, cfg.eval.horizon, out);
    });
    std::cout << "wrote " << path.string() << "\n";
    return 0;
  }

  EvalReport report =
      sweep_safety_area(*proto, policy, synth.cert, synth.envelope,
                        {cfg.eval.plane_i, cfg.eval.plane_j}, cfg.eval.resolution,
                        cfg.eval.horizon, cfg.eval.seed, cfg.eval.workers);
  report.scheme = scheme;
  report.config_hash = config_hash(cfg);
  std::cout << "IE " << report.ie_count << " (" << report.ie_fraction << ")  EE "
            << report.ee_count << " (" << report.ee_fraction << ")  Fail " << report.fail_count
            << "\n";
  write_text(dir / "eval_report.json", eval_report_to_json(report).dump(2) + "\n");
  write_stream(dir / "eval_grid.csv", [&](std::ostream& out) { write_eval_csv(report, out); });
  write_stream(dir / "safety_area.svg",
               [&](std::ostream& out) { write_eval_svg(report, &synth.envelope, out); });
  emit_effective_config(cfg, dir);
  std::cout << "wrote " << (dir / "eval_report.json").string() << "\n";
  return 0;
}

int run_report(const std::vector<std::string>& record_paths,
               const std::vector<std::string>& eval_csvs, const std::string& override_dir) {
  std::vector<RunRecord> records;
  for (const std::string& path : record_paths) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open run record '" + path + "'");
    nlohmann::json j;
    in >> j;
    RunRecord r = run_record_from_json(j);
    const double recomputed = failure_rate(r);
    const double recorded = j.at("failure_rate").get<double>();
    if (std::abs(recomputed - recorded) > 1e-12)
      throw ConfigError("run record '" + path + "' failure_rate does not match its episodes");
    records.push_back(std::move(r));
  }
  std::vector<ReportRow> rows = summarize_runs(records);
  write_report_table(rows, std::cout);

  const fs::path dir = override_dir.empty() ? fs::path("runs/report") : fs::path(override_dir);
  nlohmann::json jrows = nlohmann::json::array();
  for (const ReportRow& r : rows) {
    jrows.push_back({{"scheme", r.scheme},
                     {"episodes", r.episodes},
                     {"failed", r.failed},
                     {"failure_rate", r.rate}});
  }
  write_text(dir / "report.json", nlohmann::json{{"rows", jrows}}.dump(2) + "\n");

  int svg_index = 0;
  for (const std::string& path : eval_csvs) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open eval csv '" + path + "'");
    const EvalReport report = read_eval_csv(in);
    // A bare CSV carries no envelope information; points only.
    write_stream(dir / ("safety_area_" + std::to_string(svg_index++) + ".svg"),
                 [&](std::ostream& out) { write_eval_svg(report, nullptr, out); });
  }
  return 0;
}

}  // namespace

int cli_main(const std::vector<std::string>& args) {
  CLI::App app{"physics-model-guided worst-case sampling toolkit"};
  app.require_subcommand(1);

  std::string config_path, override_dir, scheme_override, checkpoint_path;
  std::string trajectory_from, trajectory_out;
  std::optional<std::uint64_t> seed_override;
  std::vector<std::string> record_paths, eval_csvs;

  CLI::App* synth = app.add_subcommand("synthesize", "build and validate the safety certificate");
  synth->add_option("--config", config_path, "config JSON path")->required();
  synth->add_option("--out", override_dir, "output directory override");

  CLI::App* sample = app.add_subcommand("sample", "emit the worst-case grid CSV");
  sample->add_option("--config", config_path, "config JSON path")->required();
  sample->add_option("--out", override_dir, "output directory override");

  CLI::App* train = app.add_subcommand("train", "run a training scheme");
  train->add_option("--config", config_path, "config JSON path")->required();
  train->add_option("--scheme", scheme_override,
                    "worst-case | random | worst-case-w.t. | random-w.t.");
  train->add_option("--seed", seed_override, "seed override");
  train->add_option("--out", override_dir, "output directory override");

  CLI::App* eval = app.add_subcommand("eval", "sweep the safety area with a frozen policy");
  eval->add_option("--config", config_path, "config JSON path")->required();
  eval->add_option("--checkpoint", checkpoint_path, "policy checkpoint (omit for a_drl = 0)");
  eval->add_option("--out", override_dir, "output directory override");
  eval->add_option("--trajectory-from", trajectory_from,
                   "comma-separated initial state: log one rollout instead of sweeping");
  eval->add_option("--trajectory-out", trajectory_out, "trajectory CSV path");

  CLI::App* report = app.add_subcommand("report", "aggregate run records into a summary table");
  report->add_option("--run", record_paths, "run record JSON paths")->required();
  report->add_option("--eval-csv", eval_csvs, "eval grid CSVs to re-render as SVG");
  report->add_option("--out", override_dir, "output directory override");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (synth->parsed()) return run_synthesize(config_path, override_dir);
    if (sample->parsed()) return run_sample(config_path, override_dir);
    if (train->parsed()) return run_train(config_path, scheme_override, seed_override, override_dir);
    if (eval->parsed())
      return run_eval(config_path, checkpoint_path, override_dir, trajectory_from, trajectory_out);
    if (report->parsed()) return run_report(record_paths, eval_csvs, override_dir);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

}  // namespace wcsafe
