#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "wcsafe/control.hpp"
#include "wcsafe/env.hpp"
#include "wcsafe/safety.hpp"

#include <json.hpp>

namespace wcsafe {

/// Post-training probe labels: IE = starts and stays inside the envelope,
/// EE = stays inside the safety set while visiting its envelope
/// complement, Fail = leaves the safety set (or blows up).
enum class ProbeLabel { IE, EE, Fail };

const char* to_string(ProbeLabel label);
ProbeLabel probe_label_from_string(const std::string& s);

/// The learned a_drl component; the residual F s term is added internally.
using PolicyFn = std::function<Vec(const Vec&)>;

/// Rolls out horizon steps from s0 under the residual policy and labels
/// the probe. Throws if s0 lies outside the safety set (invalid probe).
ProbeLabel classify_ie_ee(Environment& env, const PolicyFn& policy, const Certificate& cert,
                          const SafetyEnvelope& envelope, const Vec& s0, int horizon);

struct EvalReport {
  int plane_i = 0;
  int plane_j = 1;
  int resolution = 0;
  int horizon = 0;
  bool off_plane_zeroed = true;  // off-plane state components pinned to zero
  Vec axis_i;                    // probe coordinates along plane_i
  Vec axis_j;
  std::vector<ProbeLabel> labels;  // row-major: labels[a * resolution + b]
  int ie_count = 0;
  int ee_count = 0;
  int fail_count = 0;
  double ie_fraction = 0.0;
  double ee_fraction = 0.0;
  std::string scheme;
  std::string config_hash;
  std::uint64_t seed = 0;
};

/// Evaluates classify_ie_ee over a regular grid on the chosen 2-D slice of
/// the safety box (other components zero). Rollouts are distributed over a
/// worker pool; each probe gets a disturbance stream split from eval_seed
/// by its grid index, so results are deterministic regardless of
/// scheduling.
EvalReport sweep_safety_area(const Environment& proto, const PolicyFn& policy,
                             const Certificate& cert, const SafetyEnvelope& envelope,
                             std::pair<int, int> plane, int resolution, int horizon,
                             std::uint64_t eval_seed, int workers = 0);

nlohmann::json eval_report_to_json(const EvalReport& report);

/// Columns: i, j, then the two axis coordinates, then the label.
void write_eval_csv(const EvalReport& report, std::ostream& out);
EvalReport read_eval_csv(std::istream& in);

/// SVG scatter of the labeled grid with the safety box drawn over it; when
/// an envelope is supplied its slice on the probe plane is drawn too.
void write_eval_svg(const EvalReport& report, const SafetyEnvelope* envelope,
                    std::ostream& out);

/// Trajectory log: step, state components, action components, reward,
/// violation flag.
void rollout_csv(Environment& env, const PolicyFn& policy, const Certificate& cert,
                 const Vec& s0, int steps, std::ostream& out);

}  // namespace wcsafe
