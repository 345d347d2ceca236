#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>

#include "oracles.hpp"
#include "wcsafe/errors.hpp"
#include "wcsafe/harness.hpp"
#include "wcsafe/trainer.hpp"

using namespace wcsafe;

namespace {

struct LinearFixture {
  LinearModel model;
  SafetySet set;
  Certificate cert;
  SafetyEnvelope envelope;

  static LinearFixture make(bool termination, int max_steps = 500) {
    CartPoleEnv cart;
    const LinearModel model = cart.linearize();
    const SafetySet set = cart.safety_spec().first;
    const Matrix f = dlqr_gain(model, SymmetricMatrix::diag({2.0, 0.5, 10.0, 0.5}),
                               SymmetricMatrix::diag({0.05}));
    const SymmetricMatrix p = lyapunov_p(model.a + model.b * f, 0.8, set);
    Certificate cert = build_certificate(model, f, p, 0.8);
    SafetyEnvelope envelope(cert.p);
    return LinearFixture{model, set, std::move(cert), std::move(envelope), termination,
                         max_steps};
  }

  LinearFixture(LinearModel m, SafetySet s, Certificate c, SafetyEnvelope e, bool termination,
                int max_steps)
      : model(std::move(m)), set(std::move(s)), cert(std::move(c)), envelope(std::move(e)) {
    cfg.max_steps = max_steps;
    cfg.terminate_on_violation = termination;
  }

  LinearPlantEnv env() const { return LinearPlantEnv(model, set, 15.0, cfg); }

  EpisodeConfig cfg;
};

AgentConfig passive_agent_config() {
  // high warmup: the agent never updates, a_drl stays identically zero
  AgentConfig cfg;
  cfg.warmup = 1 << 30;
  cfg.noise_sigma_start = 0.0;
  cfg.noise_sigma_end = 0.0;
  cfg.seed = 1;
  return cfg;
}

}  // namespace

TEST_CASE("curriculum episode budget matches the formula for (2-5)") {
  const LinearFixture fix = LinearFixture::make(true);
  LinearPlantEnv env = fix.env();
  DdpgAgent agent(4, 1, passive_agent_config());
  const WorstCaseGrid grid = generate_grid(fix.envelope, AngleGridSpec(4, {5, 5, 5}, 1.0, 2));
  const RunRecord rec = run_curriculum(env, agent, fix.cert, grid);
  CHECK(rec.episodes.size() == 170);
  CHECK(rec.scheme == "worst-case");
}

TEST_CASE("no-op agent on the exact linear plant never fails") {
  const LinearFixture fix = LinearFixture::make(true);
  LinearPlantEnv env = fix.env();
  DdpgAgent agent(4, 1, passive_agent_config());
  const WorstCaseGrid grid = generate_grid(fix.envelope, AngleGridSpec(4, {5, 5, 5}, 1.0, 1));
  const RunRecord rec = run_curriculum(env, agent, fix.cert, grid);
  CHECK(rec.failed_episodes() == 0);
  CHECK(failure_rate(rec) == 0.0);
  for (const EpisodeRecord& e : rec.episodes) CHECK(e.steps == 500);
}

TEST_CASE("single trivial episode") {
  const LinearModel model(Matrix{{0.5, 0.0}, {0.0, 0.5}}, Matrix{{0.1}, {0.1}});
  const SafetySet set = SafetySet::box({2.0, 2.0});
  const SymmetricMatrix p = lyapunov_p(model.a, 0.9, set);
  const Certificate cert = build_certificate(model, Matrix(1, 2), p, 0.9);
  EpisodeConfig cfg;
  cfg.max_steps = 50;
  LinearPlantEnv env(model, set, 1.0, cfg);
  DdpgAgent agent(2, 1, passive_agent_config());
  const WorstCaseGrid grid = generate_grid(SafetyEnvelope(p), AngleGridSpec(2, {1}));
  const RunRecord rec = run_curriculum(env, agent, cert, grid);
  REQUIRE(rec.episodes.size() == 1);
  // theta_1 = 0 boundary point
  const auto d = eigendecompose(p);
  CHECK(rec.episodes[0].initial_state == boundary_point(d, 1.0, {0.0}));
}

TEST_CASE("grid-order fidelity is bitwise") {
  const LinearFixture fix = LinearFixture::make(true, 20);
  LinearPlantEnv env = fix.env();
  DdpgAgent agent(4, 1, passive_agent_config());
  const WorstCaseGrid grid = generate_grid(fix.envelope, AngleGridSpec(4, {3, 3, 3}, 1.0, 2));
  const RunRecord rec = run_curriculum(env, agent, fix.cert, grid);
  REQUIRE(rec.episodes.size() == 2 * grid.points.size());
  for (std::size_t i = 0; i < rec.episodes.size(); ++i) {
    const EpisodeRecord& e = rec.episodes[i];
    CHECK(e.period == static_cast<int>(i / grid.points.size()));
    CHECK(e.grid_index == static_cast<int>(i % grid.points.size()));
    REQUIRE(e.initial_state == grid.points[e.grid_index]);
  }
}

TEST_CASE("random baseline budget parity and degenerate intervals") {
  const LinearFixture fix = LinearFixture::make(true, 50);
  DdpgAgent agent(4, 1, passive_agent_config());

  SUBCASE("matched (2-3) budget") {
    LinearPlantEnv env = fix.env();
    Rng rng(3);
    const std::vector<std::pair<double, double>> iv{
        {-0.9, 0.9}, {-3.0, 3.0}, {-0.8, 0.8}, {-4.5, 4.5}};
    const RunRecord rec = run_random_baseline(env, agent, fix.cert, iv, 30, rng);
    CHECK(rec.episodes.size() == 30);
    CHECK(rec.scheme == "random");
  }
  SUBCASE("degenerate all-zero intervals start at the origin and never fail") {
    LinearPlantEnv env = fix.env();
    Rng rng(3);
    const std::vector<std::pair<double, double>> iv(4, {0.0, 0.0});
    const RunRecord rec = run_random_baseline(env, agent, fix.cert, iv, 5, rng);
    CHECK(rec.failed_episodes() == 0);
    for (const EpisodeRecord& e : rec.episodes) CHECK(e.initial_state == Vec(4, 0.0));
  }
  SUBCASE("fixed seed replays the identical initial-state sequence") {
    LinearPlantEnv env1 = fix.env();
    LinearPlantEnv env2 = fix.env();
    DdpgAgent a1(4, 1, passive_agent_config());
    DdpgAgent a2(4, 1, passive_agent_config());
    Rng r1(9), r2(9);
    const std::vector<std::pair<double, double>> iv{
        {-0.9, 0.9}, {-3.0, 3.0}, {-0.8, 0.8}, {-4.5, 4.5}};
    const RunRecord rec1 = run_random_baseline(env1, a1, fix.cert, iv, 10, r1);
    const RunRecord rec2 = run_random_baseline(env2, a2, fix.cert, iv, 10, r2);
    for (std::size_t i = 0; i < rec1.episodes.size(); ++i)
      REQUIRE(rec1.episodes[i].initial_state == rec2.episodes[i].initial_state);
  }
}

TEST_CASE("termination disabled runs every episode to the step cap") {
  const LinearFixture fix = LinearFixture::make(false, 40);
  LinearPlantEnv env = fix.env();
  DdpgAgent agent(4, 1, passive_agent_config());
  Rng rng(5);
  const std::vector<std::pair<double, double>> iv{
      {-0.9, 0.9}, {-3.0, 3.0}, {-0.8, 0.8}, {-4.5, 4.5}};
  const RunRecord rec = run_random_baseline(env, agent, fix.cert, iv, 20, rng);
  CHECK(rec.scheme == "random-w.t.");
  CHECK(rec.failed_episodes() > 0);  // many random cart-pole box states are doomed
  for (const EpisodeRecord& e : rec.episodes) CHECK(e.steps == 40);
}

TEST_CASE("failure_rate arithmetic") {
  RunRecord rec;
  rec.episodes.resize(30);
  CHECK(failure_rate(rec) == 0.0);
  for (int i = 0; i < 3; ++i) rec.episodes[i].violation = true;
  CHECK(failure_rate(rec) == doctest::Approx(0.10));
  for (EpisodeRecord& e : rec.episodes) e.violation = true;
  CHECK(failure_rate(rec) == 1.0);
  RunRecord empty;
  CHECK_THROWS_AS(failure_rate(empty), DimensionError);
}

TEST_CASE("run record serialization round-trips") {
  const LinearFixture fix = LinearFixture::make(true, 30);
  LinearPlantEnv env = fix.env();
  DdpgAgent agent(4, 1, passive_agent_config());
  const WorstCaseGrid grid = generate_grid(fix.envelope, AngleGridSpec(4, {3, 3, 3}));
  RunRecord rec = run_curriculum(env, agent, fix.cert, grid);
  rec.config_hash = "cafe";
  const nlohmann::json j = run_record_to_json(rec);
  const RunRecord back = run_record_from_json(nlohmann::json::parse(j.dump()));
  REQUIRE(back.episodes.size() == rec.episodes.size());
  CHECK(back.scheme == rec.scheme);
  CHECK(back.config_hash == rec.config_hash);
  for (std::size_t i = 0; i < rec.episodes.size(); ++i) {
    CHECK(back.episodes[i].initial_state == rec.episodes[i].initial_state);
    CHECK(back.episodes[i].episodic_return == rec.episodes[i].episodic_return);
    CHECK(back.episodes[i].steps == rec.episodes[i].steps);
  }

  std::ostringstream csv;
  write_episode_csv(rec, csv);
  CHECK(csv.str().find("episode,period,grid_index") == 0);
}
