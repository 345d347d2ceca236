#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "wcsafe/env.hpp"
#include "wcsafe/errors.hpp"

using namespace wcsafe;

TEST_CASE("matrix exponential of zero and of a rotation generator") {
  CHECK((matrix_exponential(Matrix(3, 3)) - Matrix::identity(3)).max_norm() <= 1e-14);

  // exp of [[0, -t], [t, 0]] is the rotation by t
  const double t = 0.7;
  const Matrix e = matrix_exponential(Matrix{{0.0, -t}, {t, 0.0}});
  CHECK(e(0, 0) == doctest::Approx(std::cos(t)).epsilon(1e-12));
  CHECK(e(1, 0) == doctest::Approx(std::sin(t)).epsilon(1e-12));
}

TEST_CASE("cart-pole equilibrium is a fixed point") {
  CartPoleEnv env;
  env.set_state({0.0, 0.0, 0.0, 0.0});
  const StepResult r = env.step({0.0});
  CHECK(max_norm(r.next) <= 1e-12);
  CHECK_FALSE(r.violation);
  CHECK_FALSE(r.terminated);
}

TEST_CASE("cart-pole position violation terminates") {
  EpisodeConfig cfg;
  cfg.terminate_on_violation = true;
  CartPoleEnv env(cfg);
  env.set_state({0.95, 0.0, 0.0, 0.0});
  const StepResult r = env.step({0.0});
  CHECK(r.violation);
  CHECK(r.terminated);

  // without the termination flag the episode keeps running
  cfg.terminate_on_violation = false;
  CartPoleEnv env2(cfg);
  env2.set_state({0.95, 0.0, 0.0, 0.0});
  const StepResult r2 = env2.step({0.0});
  CHECK(r2.violation);
  CHECK_FALSE(r2.terminated);
}

TEST_CASE("small-angle cart-pole tracks its linearization") {
  CartPoleEnv env;
  const LinearModel lin = env.linearize();
  const Vec s0{0.005, -0.004, 0.008, 0.002};
  env.set_state(s0);
  Vec s_lin = s0;
  double max_dev = 0.0;
  for (int k = 0; k < 10; ++k) {
    const double a = 0.002 * (k % 3 - 1);
    const StepResult r = env.step({a});
    s_lin = add(lin.a * s_lin, lin.b * Vec{a});
    max_dev = std::max(max_dev, max_norm(sub(r.next, s_lin)));
  }
  CHECK(max_dev <= 1e-3);
}

TEST_CASE("finite-difference jacobians match linearize at the equilibrium") {
  CartPoleEnv env;
  const LinearModel lin = env.linearize();
  const auto fd = oracles::finite_difference_step_jacobians(env, Vec(4, 0.0), Vec{0.0});
  CHECK((fd.a - lin.a).max_norm() <= 1e-6);
  CHECK((fd.b - lin.b).max_norm() <= 1e-6);

  PlanarQuadrotorEnv quad;
  const LinearModel qlin = quad.linearize();
  const auto qfd = oracles::finite_difference_step_jacobians(quad, Vec(6, 0.0), Vec(2, 0.0));
  CHECK((qfd.a - qlin.a).max_norm() <= 1e-6);
  CHECK((qfd.b - qlin.b).max_norm() <= 1e-6);
}

TEST_CASE("gravity-off massless-pole limit is a double integrator in (x, v)") {
  CartPoleParams params;
  params.gravity = 0.0;
  params.pole_mass = 0.0;
  const CartPoleEnv env({}, params);
  const LinearModel lin = env.linearize();
  const double dt = params.timestep;
  CHECK(lin.a(0, 0) == doctest::Approx(1.0));
  CHECK(lin.a(0, 1) == doctest::Approx(dt));
  CHECK(lin.a(1, 1) == doctest::Approx(1.0));
  CHECK(lin.a(0, 2) == doctest::Approx(0.0));
  CHECK(lin.a(1, 2) == doctest::Approx(0.0));
  CHECK(lin.b(1, 0) == doctest::Approx(dt / params.cart_mass).epsilon(1e-9));
  CHECK(lin.b(0, 0) == doctest::Approx(0.5 * dt * dt / params.cart_mass).epsilon(1e-9));
}

TEST_CASE("closed-loop spectral radius below one after dlqr") {
  CartPoleEnv env;
  const LinearModel lin = env.linearize();
  const Matrix f = dlqr_gain(lin, SymmetricMatrix::diag({2.0, 0.5, 10.0, 0.5}),
                             SymmetricMatrix::diag({0.05}));
  CHECK(oracles::spectral_radius(lin.a + lin.b * f) < 1.0);
}

TEST_CASE("unforced frictionless cart-pole conserves energy") {
  CartPoleEnv env;
  env.set_state({0.0, 0.3, 0.4, -0.5});
  const double e0 = oracles::cartpole_energy(env.params(), env.state());
  double max_drift = 0.0;
  EpisodeConfig cfg;
  cfg.max_steps = 1000;
  cfg.terminate_on_violation = false;
  env.set_episode_config(cfg);
  env.set_state({0.0, 0.3, 0.4, -0.5});
  for (int k = 0; k < 500; ++k) {
    env.step({0.0});
    const double e = oracles::cartpole_energy(env.params(), env.state());
    max_drift = std::max(max_drift, std::abs(e - e0));
  }
  CHECK(max_drift <= 1e-6 * std::abs(e0));
}

TEST_CASE("deterministic trajectories for identical seeds") {
  EpisodeConfig cfg;
  cfg.disturbance = {DisturbanceSpec::Kind::Friction, 1.0, 77};
  cfg.terminate_on_violation = false;
  CartPoleEnv a(cfg), b(cfg);
  a.set_state({0.1, 0.0, -0.1, 0.2});
  b.set_state({0.1, 0.0, -0.1, 0.2});
  for (int k = 0; k < 100; ++k) {
    const double u = 2.0 * std::sin(0.1 * k);
    const StepResult ra = a.step({u});
    const StepResult rb = b.step({u});
    REQUIRE(ra.next == rb.next);
  }
}

TEST_CASE("friction disturbance redraws per episode") {
  EpisodeConfig cfg;
  cfg.disturbance = {DisturbanceSpec::Kind::Friction, 1.0, 5};
  cfg.terminate_on_violation = false;
  CartPoleEnv env(cfg);

  env.set_state({0.0, 1.0, 0.0, 0.0});
  const Vec first = env.step({0.0}).next;
  env.set_state({0.0, 1.0, 0.0, 0.0});
  const Vec second = env.step({0.0}).next;
  CHECK(first != second);  // different friction draw

  CartPoleEnv replay(cfg);
  replay.set_state({0.0, 1.0, 0.0, 0.0});
  CHECK(replay.step({0.0}).next == first);
}

TEST_CASE("set_state is exact and resets the step counter") {
  CartPoleEnv env;
  const Vec s{0.123456789, -0.987654321, 0.5, -1.5};
  env.set_state(s);
  CHECK(env.state() == s);
  env.step({1.0});
  env.step({1.0});
  CHECK(env.steps_taken() == 2);
  env.set_state(s);
  CHECK(env.steps_taken() == 0);
  CHECK(env.state() == s);
}

TEST_CASE("safety specs match the documented bounds") {
  CartPoleEnv cart;
  const auto [cart_set, cart_ref] = cart.safety_spec();
  CHECK(cart_set.upper == Vec{0.9, 3.0, 0.8, 4.5});
  CHECK(cart_set.lower == Vec{-0.9, -3.0, -0.8, -4.5});
  CHECK(cart_set.symmetric());
  CHECK(cart_ref == Vec(4, 0.0));

  PlanarQuadrotorEnv quad;
  const auto [quad_set, quad_ref] = quad.safety_spec();
  CHECK(quad_set.upper == Vec{0.5, 0.8, 0.8, 1.0, 10.0, 45.0});
  CHECK(quad_set.symmetric());
  CHECK(quad_ref == Vec{2.0, 4.0, 0.0, 0.0, 0.0, 0.0});
}

TEST_CASE("quadrotor hover is a fixed point and termination rows are positional") {
  PlanarQuadrotorEnv env;
  env.set_state(Vec(6, 0.0));
  const StepResult r = env.step(Vec(2, 0.0));
  CHECK(max_norm(r.next) <= 1e-12);

  env.set_state({0.55, 0.0, 0.0, 0.0, 0.0, 0.0});
  const StepResult r2 = env.step(Vec(2, 0.0));
  CHECK(r2.violation);
  CHECK(r2.terminated);
}

TEST_CASE("linear plant steps exactly and stops at the cap") {
  const LinearModel model(Matrix{{0.5, 0.0}, {0.0, 2.0}}, Matrix{{1.0}, {0.0}});
  EpisodeConfig cfg;
  cfg.max_steps = 3;
  cfg.terminate_on_violation = false;
  LinearPlantEnv env(model, SafetySet::box({10.0, 10.0}), 5.0, cfg);
  env.set_state({1.0, 1.0});
  StepResult r = env.step({0.25});
  CHECK(r.next == Vec{0.75, 2.0});
  r = env.step({0.0});
  CHECK(r.next == Vec{0.375, 4.0});
  CHECK_FALSE(r.terminated);
  r = env.step({0.0});
  CHECK(r.terminated);  // step cap
}

TEST_CASE("step rejects wrong action size and set_state rejects bad states") {
  CartPoleEnv env;
  CHECK_THROWS_AS(env.step({0.0, 1.0}), DimensionError);
  CHECK_THROWS_AS(env.set_state({0.0, 0.0, 0.0}), DimensionError);
  CHECK_THROWS_AS(env.set_state({0.0, 0.0, 0.0, std::nan("")}), DimensionError);
}
