#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "wcsafe/errors.hpp"
#include "wcsafe/learner.hpp"

using namespace wcsafe;

namespace {

LossFn quadratic_loss(const std::vector<Vec>& targets) {
  LossFn loss;
  loss.value = [targets](const Vec& out, int i) {
    double acc = 0.0;
    for (std::size_t k = 0; k < out.size(); ++k) {
      const double d = out[k] - targets[i][k];
      acc += d * d;
    }
    return acc;
  };
  loss.grad = [targets](const Vec& out, int i) {
    Vec g(out.size());
    for (std::size_t k = 0; k < out.size(); ++k) g[k] = 2.0 * (out[k] - targets[i][k]);
    return g;
  };
  return loss;
}

std::vector<Vec> random_batch(int count, int dim, Rng& rng, double span = 1.0) {
  std::vector<Vec> batch(count, Vec(dim));
  for (Vec& v : batch)
    for (double& x : v) x = rng.uniform(-span, span);
  return batch;
}

}  // namespace

TEST_CASE("gradient check is near-exact for a linear net with quadratic loss") {
  Rng rng(1);
  const Mlp net({3, 2}, Mlp::Output::Identity, 1.0, rng);
  const auto inputs = random_batch(4, 3, rng);
  const auto targets = random_batch(4, 2, rng);
  CHECK(gradient_check(net, inputs, quadratic_loss(targets)) <= 1e-8);
}

TEST_CASE("gradient check passes for the default shapes") {
  Rng rng(2);
  SUBCASE("two-hidden-layer actor") {
    const Mlp actor({4, 64, 64, 1}, Mlp::Output::TanhScaled, 15.0, rng);
    const auto inputs = random_batch(4, 4, rng);
    const auto targets = random_batch(4, 1, rng);
    CHECK(gradient_check(actor, inputs, quadratic_loss(targets)) <= 1e-4);
  }
  SUBCASE("two-hidden-layer critic") {
    const Mlp critic({5, 64, 64, 1}, Mlp::Output::Identity, 1.0, rng);
    const auto inputs = random_batch(4, 5, rng);
    const auto targets = random_batch(4, 1, rng);
    CHECK(gradient_check(critic, inputs, quadratic_loss(targets)) <= 1e-4);
  }
}

TEST_CASE("gradient check stays finite on a zero-input batch") {
  Rng rng(3);
  const Mlp net({4, 16, 2}, Mlp::Output::TanhScaled, 2.0, rng);
  const std::vector<Vec> inputs(3, Vec(4, 0.0));
  const auto targets = random_batch(3, 2, rng);
  const double err = gradient_check(net, inputs, quadratic_loss(targets));
  CHECK(std::isfinite(err));
  CHECK(err <= 1e-4);
}

TEST_CASE("fresh actor with zero final layer outputs zero") {
  AgentConfig cfg;
  cfg.action_bound = 15.0;
  cfg.seed = 9;
  DdpgAgent agent(4, 1, cfg);
  Rng rng(4);
  for (int trial = 0; trial < 100; ++trial) {
    Vec s(4);
    for (double& x : s) x = rng.uniform(-2.0, 2.0);
    CHECK(agent.act(s, false) == Vec{0.0});
  }
}

TEST_CASE("act is deterministic without exploration and bounded always") {
  AgentConfig cfg;
  cfg.action_bound = 2.5;
  cfg.seed = 10;
  DdpgAgent agent(3, 2, cfg);
  Rng rng(5);
  const Vec probe{0.3, -0.7, 1.1};
  CHECK(agent.act(probe, false) == agent.act(probe, false));
  for (int trial = 0; trial < 10000; ++trial) {
    Vec s(3);
    for (double& x : s) x = rng.uniform(-50.0, 50.0);
    const Vec a = agent.act(s, trial % 2 == 0);
    for (double x : a) CHECK(std::abs(x) <= 2.5);
  }
}

TEST_CASE("replay buffer evicts FIFO and keeps order") {
  ReplayBuffer buf(5);
  for (int i = 0; i < 8; ++i) {
    Transition t;
    t.s = {static_cast<double>(i)};
    t.a = {0.0};
    t.s_next = {0.0};
    buf.push(t);
  }
  REQUIRE(buf.size() == 5);
  // items 0..2 evicted; remaining are 3..7 oldest-first
  for (int i = 0; i < 5; ++i) CHECK(buf[i].s[0] == doctest::Approx(3.0 + i));
}

namespace {

Transition make_transition(Rng& rng, int n, int m) {
  Transition t;
  t.s.resize(n);
  t.a.resize(m);
  t.s_next.resize(n);
  for (double& x : t.s) x = rng.uniform(-1.0, 1.0);
  for (double& x : t.a) x = rng.uniform(-1.0, 1.0);
  for (double& x : t.s_next) x = rng.uniform(-1.0, 1.0);
  t.r = rng.uniform(-1.0, 1.0);
  t.done = rng.uniform() < 0.05;
  return t;
}

}  // namespace

TEST_CASE("target update extremes") {
  AgentConfig cfg;
  cfg.batch_size = 4;
  cfg.warmup = 4;
  cfg.seed = 11;

  SUBCASE("tau = 1 copies the online weights after one update") {
    cfg.tau = 1.0;
    DdpgAgent agent(2, 1, cfg);
    Rng rng(6);
    for (int i = 0; i < 5; ++i) agent.observe_and_update(make_transition(rng, 2, 1));
    for (int l = 0; l < agent.critic().layer_count(); ++l) {
      CHECK(agent.critic_target().layers()[l].w == agent.critic().layers()[l].w);
      CHECK(agent.actor_target().layers()[l].w == agent.actor().layers()[l].w);
    }
  }
  SUBCASE("tau ~ 0 leaves the targets at their initial values") {
    cfg.tau = 1e-300;  // effectively zero while satisfying tau > 0
    DdpgAgent agent(2, 1, cfg);
    const Mlp initial_critic_target = agent.critic_target();
    Rng rng(6);
    for (int i = 0; i < 5; ++i) agent.observe_and_update(make_transition(rng, 2, 1));
    bool online_moved = false;
    for (int l = 0; l < agent.critic().layer_count(); ++l) {
      if (agent.critic().layers()[l].w != initial_critic_target.layers()[l].w)
        online_moved = true;
      for (std::size_t i = 0; i < agent.critic_target().layers()[l].w.size(); ++i) {
        CHECK(agent.critic_target().layers()[l].w[i] ==
              doctest::Approx(initial_critic_target.layers()[l].w[i]).epsilon(1e-12));
      }
    }
    CHECK(online_moved);
  }
}

TEST_CASE("training is bit-deterministic under a fixed seed") {
  AgentConfig cfg;
  cfg.batch_size = 8;
  cfg.warmup = 16;
  cfg.seed = 1234;

  DdpgAgent a(3, 1, cfg);
  DdpgAgent b(3, 1, cfg);
  Rng stream_a(77), stream_b(77);
  for (int i = 0; i < 100; ++i) {
    const Transition ta = make_transition(stream_a, 3, 1);
    const Transition tb = make_transition(stream_b, 3, 1);
    a.observe_and_update(ta);
    b.observe_and_update(tb);
  }
  for (int l = 0; l < a.actor().layer_count(); ++l) {
    REQUIRE(a.actor().layers()[l].w == b.actor().layers()[l].w);
    REQUIRE(a.critic().layers()[l].w == b.critic().layers()[l].w);
    REQUIRE(a.actor_target().layers()[l].w == b.actor_target().layers()[l].w);
  }
}

TEST_CASE("checkpoint round-trips the weights exactly") {
  AgentConfig cfg;
  cfg.batch_size = 4;
  cfg.warmup = 4;
  cfg.seed = 5;
  DdpgAgent agent(2, 1, cfg);
  Rng rng(8);
  for (int i = 0; i < 20; ++i) agent.observe_and_update(make_transition(rng, 2, 1));

  const nlohmann::json j = agent.checkpoint("deadbeef");
  const nlohmann::json reparsed = nlohmann::json::parse(j.dump());
  const DdpgAgent restored = DdpgAgent::restore(reparsed);
  const Vec probe{0.25, -0.5};
  CHECK(restored.policy_action(probe) == agent.policy_action(probe));
  CHECK(reparsed.at("config_hash") == "deadbeef");
}

TEST_CASE("agent config validation") {
  AgentConfig cfg;
  cfg.discount = 1.5;
  CHECK_THROWS_AS(DdpgAgent(2, 1, cfg), ConfigError);
  cfg = AgentConfig{};
  cfg.warmup = 1;
  cfg.batch_size = 8;
  CHECK_THROWS_AS(DdpgAgent(2, 1, cfg), ConfigError);
}
