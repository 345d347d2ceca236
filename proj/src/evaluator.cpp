#include "wcsafe/evaluator.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>
#include <thread>

#include "wcsafe/errors.hpp"
#include "wcsafe/rng.hpp"
#include "wcsafe/sampler.hpp"

namespace wcsafe {

const char* to_string(ProbeLabel label) {
  switch (label) {
    case ProbeLabel::IE: return "IE";
    case ProbeLabel::EE: return "EE";
    case ProbeLabel::Fail: return "Fail";
  }
  return "?";
}

ProbeLabel probe_label_from_string(const std::string& s) {
  if (s == "IE") return ProbeLabel::IE;
  if (s == "EE") return ProbeLabel::EE;
  if (s == "Fail") return ProbeLabel::Fail;
  throw ConfigError("unknown probe label '" + s + "'");
}

namespace {

// Membership with the runtime boundary tolerance, so grid points generated
// exactly on the boundary count as inside.
bool in_envelope(const SafetyEnvelope& envelope, const Vec& s) {
  return lyapunov_value(envelope, s) <= envelope.phi + kBoundaryTolRuntime;
}

}  // namespace

ProbeLabel classify_ie_ee(Environment& env, const PolicyFn& policy, const Certificate& cert,
                          const SafetyEnvelope& envelope, const Vec& s0, int horizon) {
  if (horizon < 1) throw DimensionError("classify_ie_ee: horizon must be >= 1");
  const SafetySet set = env.safety_spec().first;
  if (!set.contains(s0))
    throw DimensionError("classify_ie_ee: initial state outside the safety set");

  env.set_state(s0);
  bool stayed_in_envelope = in_envelope(envelope, s0);
  bool visited_complement = !stayed_in_envelope;
  Vec s = s0;
  for (int k = 0; k < horizon; ++k) {
    const Vec a = residual_action(cert, s, policy(s));
    const StepResult sr = env.step(a);
    if (sr.blown_up || !set.contains(sr.next)) return ProbeLabel::Fail;
    const bool inside = in_envelope(envelope, sr.next);
    stayed_in_envelope = stayed_in_envelope && inside;
    visited_complement = visited_complement || !inside;
    s = sr.next;
  }
  if (stayed_in_envelope) return ProbeLabel::IE;
  (void)visited_complement;  // implied true here: some state was in X \ Omega
  return ProbeLabel::EE;
}

EvalReport sweep_safety_area(const Environment& proto, const PolicyFn& policy,
                             const Certificate& cert, const SafetyEnvelope& envelope,
                             std::pair<int, int> plane, int resolution, int horizon,
                             std::uint64_t eval_seed, int workers) {
  if (resolution < 2) throw DimensionError("sweep_safety_area: resolution must be >= 2");
  const SafetySet set = proto.safety_spec().first;
  const auto axis_bound = [&](int idx) {
    for (int r = 0; r < set.rows(); ++r) {
      const Vec row = set.d.row(r);
      bool unit = row[idx] == 1.0;
      for (int j = 0; j < set.state_dim() && unit; ++j)
        if (j != idx && row[j] != 0.0) unit = false;
      if (unit) return std::min(set.upper[r], -set.lower[r]);
    }
    throw ConfigError("eval.plane", "no axis-aligned safety row for state index " +
                                        std::to_string(idx));
  };
  const double bi = axis_bound(plane.first);
  const double bj = axis_bound(plane.second);

  EvalReport report;
  report.plane_i = plane.first;
  report.plane_j = plane.second;
  report.resolution = resolution;
  report.horizon = horizon;
  report.seed = eval_seed;
  report.axis_i.resize(resolution);
  report.axis_j.resize(resolution);
  for (int k = 0; k < resolution; ++k) {
    report.axis_i[k] = -bi + 2.0 * bi * k / (resolution - 1);
    report.axis_j[k] = -bj + 2.0 * bj * k / (resolution - 1);
  }

  const int total = resolution * resolution;
  report.labels.assign(total, ProbeLabel::Fail);

  int pool = workers > 0 ? workers : static_cast<int>(std::thread::hardware_concurrency());
  pool = std::max(1, std::min(pool, total));

  std::atomic<int> cursor{0};
  const Rng base(eval_seed);
  const auto worker = [&]() {
    std::unique_ptr<Environment> env = proto.clone();
    EpisodeConfig cfg = env->episode_config();
    cfg.terminate_on_violation = false;
    cfg.max_steps = horizon + 1;
    env->set_episode_config(cfg);
    while (true) {
      const int idx = cursor.fetch_add(1);
      if (idx >= total) break;
      const int a = idx / resolution;
      const int b = idx % resolution;
      Vec s0(proto.state_dim(), 0.0);
      s0[plane.first] = report.axis_i[a];
      s0[plane.second] = report.axis_j[b];
      env->reseed(base.split(static_cast<std::uint64_t>(idx)).seed());
      report.labels[idx] = classify_ie_ee(*env, policy, cert, envelope, s0, horizon);
    }
  };

  std::vector<std::thread> threads;
  threads.reserve(pool);
  for (int t = 0; t < pool; ++t) threads.emplace_back(worker);
  for (auto& th : threads) th.join();

  for (ProbeLabel l : report.labels) {
    report.ie_count += l == ProbeLabel::IE;
    report.ee_count += l == ProbeLabel::EE;
    report.fail_count += l == ProbeLabel::Fail;
  }
  report.ie_fraction = static_cast<double>(report.ie_count) / total;
  report.ee_fraction = static_cast<double>(report.ee_count) / total;
  return report;
}

nlohmann::json eval_report_to_json(const EvalReport& report) {
  return {{"schema_version", 1},
          {"plane", {report.plane_i, report.plane_j}},
          {"resolution", report.resolution},
          {"horizon", report.horizon},
          {"off_plane_zeroed", report.off_plane_zeroed},
          {"ie_count", report.ie_count},
          {"ee_count", report.ee_count},
          {"fail_count", report.fail_count},
          {"ie_fraction", report.ie_fraction},
          {"ee_fraction", report.ee_fraction},
          {"scheme", report.scheme},
          {"config_hash", report.config_hash},
          {"seed", report.seed}};
}

void write_eval_csv(const EvalReport& report, std::ostream& out) {
  out << "i,j,axis_i,axis_j,label\n";
  out.precision(17);
  for (int a = 0; a < report.resolution; ++a) {
    for (int b = 0; b < report.resolution; ++b) {
      out << a << "," << b << "," << report.axis_i[a] << "," << report.axis_j[b] << ","
          << to_string(report.labels[a * report.resolution + b]) << "\n";
    }
  }
}

EvalReport read_eval_csv(std::istream& in) {
  EvalReport report;
  std::string line;
  if (!std::getline(in, line) || line.rfind("i,j,", 0) != 0)
    throw ConfigError("eval csv: missing header");
  struct Row {
    int a, b;
    double x, y;
    ProbeLabel label;
  };
  std::vector<Row> rows;
  int max_a = -1;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string field;
    Row r{};
    std::getline(ss, field, ',');
    r.a = std::stoi(field);
    std::getline(ss, field, ',');
    r.b = std::stoi(field);
    std::getline(ss, field, ',');
    r.x = std::stod(field);
    std::getline(ss, field, ',');
    r.y = std::stod(field);
    std::getline(ss, field, ',');
    r.label = probe_label_from_string(field);
    max_a = std::max(max_a, std::max(r.a, r.b));
    rows.push_back(r);
  }
  report.resolution = max_a + 1;
  if (rows.size() != static_cast<std::size_t>(report.resolution) * report.resolution)
    throw ConfigError("eval csv: row count does not form a square grid");
  report.axis_i.assign(report.resolution, 0.0);
  report.axis_j.assign(report.resolution, 0.0);
  report.labels.assign(rows.size(), ProbeLabel::Fail);
  for (const Row& r : rows) {
    report.axis_i[r.a] = r.x;
    report.axis_j[r.b] = r.y;
    report.labels[r.a * report.resolution + r.b] = r.label;
    report.ie_count += r.label == ProbeLabel::IE;
    report.ee_count += r.label == ProbeLabel::EE;
    report.fail_count += r.label == ProbeLabel::Fail;
  }
  report.ie_fraction = static_cast<double>(report.ie_count) / rows.size();
  report.ee_fraction = static_cast<double>(report.ee_count) / rows.size();
  return report;
}

void write_eval_svg(const EvalReport& report, const SafetyEnvelope* envelope,
                    std::ostream& out) {
  const double size = 640.0;
  const double margin = 40.0;
  const double bi = std::max(std::abs(report.axis_i.front()), std::abs(report.axis_i.back()));
  const double bj = std::max(std::abs(report.axis_j.front()), std::abs(report.axis_j.back()));
  const auto px = [&](double x) { return margin + (x + bi) / (2.0 * bi) * (size - 2 * margin); };
  const auto py = [&](double y) { return size - margin - (y + bj) / (2.0 * bj) * (size - 2 * margin); };

  out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << size << "' height='" << size
      << "' viewBox='0 0 " << size << " " << size << "'>\n";
  out << "<rect width='100%' height='100%' fill='white'/>\n";
  out << "<rect x='" << px(-bi) << "' y='" << py(bj) << "' width='" << px(bi) - px(-bi)
      << "' height='" << py(-bj) - py(bj) << "' fill='none' stroke='#444' stroke-width='1.5'/>\n";

  for (int a = 0; a < report.resolution; ++a) {
    for (int b = 0; b < report.resolution; ++b) {
      const char* color = "#d62728";
      switch (report.labels[a * report.resolution + b]) {
        case ProbeLabel::IE: color = "#1f77b4"; break;
        case ProbeLabel::EE: color = "#2ca02c"; break;
        case ProbeLabel::Fail: color = "#d62728"; break;
      }
      out << "<circle cx='" << px(report.axis_i[a]) << "' cy='" << py(report.axis_j[b])
          << "' r='3' fill='" << color << "'/>\n";
    }
  }

  if (envelope != nullptr) {
    // Envelope slice on the probe plane: the 2x2 sub-quadric boundary.
    Matrix sub(2, 2);
    sub(0, 0) = envelope->p(report.plane_i, report.plane_i);
    sub(0, 1) = envelope->p(report.plane_i, report.plane_j);
    sub(1, 0) = sub(0, 1);
    sub(1, 1) = envelope->p(report.plane_j, report.plane_j);
    const EigenDecomposition sub_eig = eigendecompose(SymmetricMatrix(sub));
    out << "<polyline fill='none' stroke='#111' stroke-width='2' points='";
    const int arc = 256;
    for (int k = 0; k <= arc; ++k) {
      const double theta = 2.0 * std::numbers::pi * k / arc;
      const Vec pt = boundary_point(sub_eig, envelope->phi, Vec{theta});
      out << px(pt[0]) << "," << py(pt[1]) << " ";
    }
    out << "'/>\n";
  }
  out << "<text x='" << margin << "' y='" << margin - 12 << "' font-size='14'>IE "
      << report.ie_count << " | EE " << report.ee_count << " | Fail " << report.fail_count
      << " (s" << report.plane_i + 1 << ", s" << report.plane_j + 1 << ")</text>\n";
  out << "</svg>\n";
}

void rollout_csv(Environment& env, const PolicyFn& policy, const Certificate& cert,
                 const Vec& s0, int steps, std::ostream& out) {
  out << "step";
  for (int i = 1; i <= env.state_dim(); ++i) out << ",s" << i;
  for (int i = 1; i <= env.action_dim(); ++i) out << ",a" << i;
  out << ",reward,violation\n";
  out.precision(17);
  env.set_state(s0);
  Vec s = s0;
  for (int k = 0; k < steps; ++k) {
    const Vec a = residual_action(cert, s, policy(s));
    const StepResult sr = env.step(a);
    const double reward = sr.blown_up ? 0.0 : safety_reward(cert, s, sr.next);
    out << k;
    for (double x : s) out << "," << x;
    for (double x : a) out << "," << x;
    out << "," << reward << "," << (sr.violation ? 1 : 0) << "\n";
    if (sr.blown_up) break;
    s = sr.next;
  }
}

}  // namespace wcsafe
