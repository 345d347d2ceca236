#pragma once

#include <string>
#include <vector>

#include "wcsafe/control.hpp"
#include "wcsafe/env.hpp"
#include "wcsafe/learner.hpp"
#include "wcsafe/sampler.hpp"

#include <json.hpp>

namespace wcsafe {

enum class Sampling { WorstCase, Random };

/// Scheme naming follows the four training regimes: worst-case / random,
/// each with or without the episode termination flag ("-w.t." = without
/// termination).
struct SchemeConfig {
  Sampling sampling = Sampling::WorstCase;
  bool termination = true;

  std::string name() const;
};

struct EpisodeRecord {
  int index = 0;
  int period = 0;       // curriculum period (0-based); -1 for random scheme
  int grid_index = -1;  // index into the grid; -1 for random scheme
  Vec initial_state;
  int steps = 0;
  bool violation = false;
  bool blown_up = false;
  double episodic_return = 0.0;
};

struct RunRecord {
  std::string scheme;
  bool termination = true;
  std::string environment;
  std::uint64_t seed = 0;
  std::string config_hash;
  std::vector<EpisodeRecord> episodes;

  int failed_episodes() const;
};

/// failed episodes / total episodes.
double failure_rate(const RunRecord& record);

/// Runs the periodic worst-case curriculum: for each of `period` passes the
/// grid is visited in generation order, each episode starting exactly at
/// the grid point, rolling out the residual policy under the
/// safety-embedded reward and training the agent online every step.
RunRecord run_curriculum(Environment& env, DdpgAgent& agent, const Certificate& cert,
                         const WorstCaseGrid& grid);

/// Same loop with uniformly sampled initial conditions (matched episode
/// budget for fair comparison).
RunRecord run_random_baseline(Environment& env, DdpgAgent& agent, const Certificate& cert,
                              const std::vector<std::pair<double, double>>& intervals,
                              int n_episodes, Rng& rng);

nlohmann::json run_record_to_json(const RunRecord& record);
RunRecord run_record_from_json(const nlohmann::json& j);

/// Columns: episode, period, grid_index, steps, violation, blown_up,
/// return, then the initial-state components.
void write_episode_csv(const RunRecord& record, std::ostream& out);

}  // namespace wcsafe
