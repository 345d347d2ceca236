#include "wcsafe/trainer.hpp"

#include <ostream>

#include "wcsafe/errors.hpp"

namespace wcsafe {

std::string SchemeConfig::name() const {
  std::string base = sampling == Sampling::WorstCase ? "worst-case" : "random";
  return termination ? base : base + "-w.t.";
}

int RunRecord::failed_episodes() const {
  int n = 0;
  for (const EpisodeRecord& e : episodes) n += e.violation ? 1 : 0;
  return n;
}

double failure_rate(const RunRecord& record) {
  if (record.episodes.empty()) throw DimensionError("failure_rate: record has no episodes");
  return static_cast<double>(record.failed_episodes()) /
         static_cast<double>(record.episodes.size());
}

namespace {

EpisodeRecord run_episode(Environment& env, DdpgAgent& agent, const Certificate& cert,
                          const Vec& s0) {
  EpisodeRecord rec;
  rec.initial_state = s0;
  env.set_state(s0);
  Vec s = s0;
  while (true) {
    const Vec a_drl = agent.act(s, /*explore=*/true);
    const Vec a = residual_action(cert, s, a_drl);
    const StepResult sr = env.step(a);
    const double reward =
        sr.blown_up ? 0.0 : safety_reward(cert, s, sr.next);
    rec.violation = rec.violation || sr.violation;
    rec.blown_up = rec.blown_up || sr.blown_up;
    rec.episodic_return += reward;
    ++rec.steps;
    // A hard termination is a true absorbing stop; a step-cap cut is not.
    Transition t{s, a_drl, reward, sr.blown_up ? s : sr.next, sr.hard_termination || sr.blown_up};
    agent.observe_and_update(t);
    if (sr.terminated) break;
    s = sr.next;
  }
  return rec;
}

}  // namespace

RunRecord run_curriculum(Environment& env, DdpgAgent& agent, const Certificate& cert,
                         const WorstCaseGrid& grid) {
  if (grid.spec.n != env.state_dim())
    throw DimensionError("run_curriculum: grid and environment dimensions differ");
  RunRecord record;
  record.scheme = SchemeConfig{Sampling::WorstCase, env.episode_config().terminate_on_violation}
                      .name();
  record.termination = env.episode_config().terminate_on_violation;
  record.environment = env.name();
  record.seed = agent.config().seed;
  int index = 0;
  for (int period = 0; period < grid.spec.period; ++period) {
    for (std::size_t g = 0; g < grid.points.size(); ++g) {
      EpisodeRecord rec = run_episode(env, agent, cert, grid.points[g]);
      rec.index = index++;
      rec.period = period;
      rec.grid_index = static_cast<int>(g);
      record.episodes.push_back(std::move(rec));
    }
  }
  return record;
}

RunRecord run_random_baseline(Environment& env, DdpgAgent& agent, const Certificate& cert,
                              const std::vector<std::pair<double, double>>& intervals,
                              int n_episodes, Rng& rng) {
  if (static_cast<int>(intervals.size()) != env.state_dim())
    throw DimensionError("run_random_baseline: interval count must match state dimension");
  if (n_episodes < 1) throw DimensionError("run_random_baseline: need at least one episode");
  RunRecord record;
  record.scheme =
      SchemeConfig{Sampling::Random, env.episode_config().terminate_on_violation}.name();
  record.termination = env.episode_config().terminate_on_violation;
  record.environment = env.name();
  record.seed = agent.config().seed;
  for (int i = 0; i < n_episodes; ++i) {
    EpisodeRecord rec = run_episode(env, agent, cert, random_initial_condition(intervals, rng));
    rec.index = i;
    rec.period = -1;
    rec.grid_index = -1;
    record.episodes.push_back(std::move(rec));
  }
  return record;
}

nlohmann::json run_record_to_json(const RunRecord& record) {
  nlohmann::json eps = nlohmann::json::array();
  for (const EpisodeRecord& e : record.episodes) {
    eps.push_back({{"index", e.index},
                   {"period", e.period},
                   {"grid_index", e.grid_index},
                   {"initial_state", e.initial_state},
                   {"steps", e.steps},
                   {"violation", e.violation},
                   {"blown_up", e.blown_up},
                   {"return", e.episodic_return}});
  }
  return {{"schema_version", 1},
          {"scheme", record.scheme},
          {"termination", record.termination},
          {"environment", record.environment},
          {"seed", record.seed},
          {"config_hash", record.config_hash},
          {"episode_count", record.episodes.size()},
          {"failed_episodes", record.failed_episodes()},
          {"failure_rate", failure_rate(record)},
          {"episodes", eps}};
}

RunRecord run_record_from_json(const nlohmann::json& j) {
  RunRecord r;
  r.scheme = j.at("scheme").get<std::string>();
  r.termination = j.at("termination").get<bool>();
  r.environment = j.at("environment").get<std::string>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.config_hash = j.at("config_hash").get<std::string>();
  for (const auto& je : j.at("episodes")) {
    EpisodeRecord e;
    e.index = je.at("index").get<int>();
    e.period = je.at("period").get<int>();
    e.grid_index = je.at("grid_index").get<int>();
    e.initial_state = je.at("initial_state").get<Vec>();
    e.steps = je.at("steps").get<int>();
    e.violation = je.at("violation").get<bool>();
    e.blown_up = je.at("blown_up").get<bool>();
    e.episodic_return = je.at("return").get<double>();
    r.episodes.push_back(std::move(e));
  }
  return r;
}

void write_episode_csv(const RunRecord& record, std::ostream& out) {
  const std::size_t n = record.episodes.empty() ? 0 : record.episodes[0].initial_state.size();
  out << "episode,period,grid_index,steps,violation,blown_up,return";
  for (std::size_t j = 1; j <= n; ++j) out << ",s0_" << j;
  out << "\n";
  out.precision(17);
  for (const EpisodeRecord& e : record.episodes) {
    out << e.index << "," << e.period << "," << e.grid_index << "," << e.steps << ","
        << (e.violation ? 1 : 0) << "," << (e.blown_up ? 1 : 0) << "," << e.episodic_return;
    for (double x : e.initial_state) out << "," << x;
    out << "\n";
  }
}

}  // namespace wcsafe
