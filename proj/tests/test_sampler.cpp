#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "wcsafe/errors.hpp"
#include "wcsafe/sampler.hpp"

using namespace wcsafe;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST_CASE("boundary_point sphere case") {
  const auto d = eigendecompose(SymmetricMatrix::identity(3));
  const Vec s = boundary_point(d, 1.0, {0.0, kPi / 2.0});
  CHECK(s[0] == doctest::Approx(0.0));
  CHECK(s[1] == doctest::Approx(1.0));
  CHECK(s[2] == doctest::Approx(0.0));
}

TEST_CASE("boundary_point diag(4,1) with ascending eigenvalue order") {
  const auto d = eigendecompose(SymmetricMatrix::diag({4.0, 1.0}));
  REQUIRE(d.eigenvalues[0] == doctest::Approx(1.0));
  const Vec s = boundary_point(d, 1.0, {kPi / 2.0});
  CHECK(s[0] == doctest::Approx(0.0));
  CHECK(s[1] == doctest::Approx(1.0));
  CHECK(SymmetricMatrix::diag({4.0, 1.0}).quad_form(s) == doctest::Approx(1.0));
}

TEST_CASE("boundary_point lies on the unit hypersphere for identity P") {
  Rng rng(2);
  for (int n = 2; n <= 6; ++n) {
    const auto d = eigendecompose(SymmetricMatrix::identity(n));
    for (int trial = 0; trial < 20; ++trial) {
      Vec thetas(n - 1);
      for (double& t : thetas) t = rng.uniform(0.0, 2.0 * kPi);
      CHECK(norm2(boundary_point(d, 1.0, thetas)) == doctest::Approx(1.0));
    }
  }
}

TEST_CASE("boundary residual property over random spd matrices") {
  Rng rng(9);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 2 + static_cast<int>(rng.uniform_index(5));
    const SymmetricMatrix p = oracles::random_spd(n, rng);
    const auto d = eigendecompose(p);
    const double phi = rng.uniform(0.25, 4.0);
    for (int k = 0; k < 100; ++k) {
      Vec thetas(n - 1);
      for (double& t : thetas) t = rng.uniform(0.0, 2.0 * kPi);
      const Vec s = boundary_point(d, phi, thetas);
      REQUIRE(std::abs(p.quad_form(s) - phi) <= 1e-9 * phi);
    }
  }
}

TEST_CASE("zero final angle makes earlier angles irrelevant") {
  Rng rng(13);
  const SymmetricMatrix p = oracles::random_spd(5, rng);
  const auto d = eigendecompose(p);
  Vec reference;
  for (int trial = 0; trial < 10; ++trial) {
    Vec thetas(4);
    for (int i = 0; i < 3; ++i) thetas[i] = rng.uniform(0.0, 2.0 * kPi);
    thetas[3] = 0.0;
    const Vec s = boundary_point(d, 1.0, thetas);
    if (trial == 0) {
      reference = s;
    } else {
      CHECK(s == reference);
    }
  }
}

TEST_CASE("boundary_point input validation") {
  const auto d = eigendecompose(SymmetricMatrix::identity(3));
  CHECK_THROWS_AS(boundary_point(d, 0.0, {0.0, 0.0}), DimensionError);
  CHECK_THROWS_AS(boundary_point(d, 1.0, {0.0}), DimensionError);
  auto bad = d;
  bad.eigenvalues[0] = -1.0;
  CHECK_THROWS_AS(boundary_point(bad, 1.0, {0.0, 0.0}), DimensionError);
}

TEST_CASE("generate_grid counts match the episode formula") {
  const SafetyEnvelope env4(SymmetricMatrix::identity(4));

  const WorstCaseGrid g5 = generate_grid(env4, AngleGridSpec(4, {5, 5, 5}));
  CHECK(g5.points.size() == 85);
  CHECK(episode_count(AngleGridSpec(4, {5, 5, 5}, 1.0, 2)) == 170);

  const WorstCaseGrid g3 = generate_grid(env4, AngleGridSpec(4, {3, 3, 3}));
  CHECK(g3.points.size() == 15);
  CHECK(episode_count(AngleGridSpec(4, {3, 3, 3}, 1.0, 2)) == 30);

  CHECK(episode_count(AngleGridSpec(4, {4, 4, 4}, 1.0, 2)) == 80);
}

TEST_CASE("generate_grid circle case") {
  const SafetyEnvelope env(SymmetricMatrix::identity(2));
  const WorstCaseGrid g = generate_grid(env, AngleGridSpec(2, {4}));
  REQUIRE(g.points.size() == 4);
  // theta_1 in {0, pi/2, pi, 3pi/2}: s = (sin t, cos t)
  CHECK(g.points[0][0] == doctest::Approx(0.0));
  CHECK(g.points[0][1] == doctest::Approx(1.0));
  CHECK(g.points[1][0] == doctest::Approx(1.0));
  CHECK(g.points[1][1] == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(g.points[2][1] == doctest::Approx(-1.0));
  CHECK(g.points[3][0] == doctest::Approx(-1.0));
}

TEST_CASE("episode_count trivial cases") {
  CHECK(episode_count(AngleGridSpec(2, {7})) == 7);
  CHECK(episode_count(AngleGridSpec(2, {7}, 1.0, 3)) == 21);
  // q_i = 1 leaves only the zero-angle point per theta_1
  CHECK(episode_count(AngleGridSpec(4, {5, 1, 1})) == 5);
}

TEST_CASE("count identity grid vs formula") {
  Rng rng(29);
  const SafetyEnvelope env3(oracles::random_spd(3, rng));
  const SafetyEnvelope env4(oracles::random_spd(4, rng));
  for (int q1 = 2; q1 <= 5; ++q1) {
    for (int q2 = 2; q2 <= 5; ++q2) {
      const AngleGridSpec s3(3, {q1, q2}, 1.0, 2);
      CHECK(static_cast<long long>(generate_grid(env3, s3).points.size()) * s3.period ==
            episode_count(s3));
      const AngleGridSpec s4(4, {q1, q2, q1}, 1.0, 3);
      CHECK(static_cast<long long>(generate_grid(env4, s4).points.size()) * s4.period ==
            episode_count(s4));
    }
  }
}

TEST_CASE("per-theta1 block emits the zero-angle point first") {
  const SafetyEnvelope env(SymmetricMatrix::identity(3));
  const auto d = eigendecompose(env.p);
  const WorstCaseGrid g = generate_grid(env, AngleGridSpec(3, {4, 3}));
  REQUIRE(g.points.size() == 4 * 2 + 4);
  // block layout per theta_1: [zero point, then q2-1 = 2 inner points]
  for (int i = 0; i < 4; ++i) {
    const double theta1 = 2.0 * kPi * i / 4;
    CHECK(g.points[i * 3] == boundary_point(d, 1.0, {theta1, 0.0}));
    CHECK(g.points[i * 3 + 1] == boundary_point(d, 1.0, {theta1, 2.0 * kPi / 3}));
    CHECK(g.points[i * 3 + 2] == boundary_point(d, 1.0, {theta1, 4.0 * kPi / 3}));
  }
}

TEST_CASE("generate_grid is bit-identical across runs") {
  Rng rng(37);
  const SafetyEnvelope env(oracles::random_spd(4, rng));
  const AngleGridSpec spec(4, {5, 4, 3}, 1.0, 2);
  const WorstCaseGrid a = generate_grid(env, spec);
  const WorstCaseGrid b = generate_grid(env, spec);
  REQUIRE(a.points.size() == b.points.size());
  for (std::size_t i = 0; i < a.points.size(); ++i) CHECK(a.points[i] == b.points[i]);
}

TEST_CASE("random_initial_condition") {
  Rng rng(41);
  SUBCASE("degenerate intervals give the fixed point") {
    const Vec s = random_initial_condition({{0.0, 0.0}, {0.0, 0.0}}, rng);
    CHECK(s == Vec{0.0, 0.0});
  }
  SUBCASE("cart-pole intervals stay in range") {
    const std::vector<std::pair<double, double>> iv{
        {-0.9, 0.9}, {-3.0, 3.0}, {-0.8, 0.8}, {-4.5, 4.5}};
    for (int trial = 0; trial < 1000; ++trial) {
      const Vec s = random_initial_condition(iv, rng);
      for (std::size_t i = 0; i < iv.size(); ++i) {
        CHECK(s[i] >= iv[i].first);
        CHECK(s[i] <= iv[i].second);
      }
    }
  }
  SUBCASE("fixed seed replays the same sequence") {
    const std::vector<std::pair<double, double>> iv{{-1.0, 1.0}, {-2.0, 2.0}};
    Rng r1(99), r2(99);
    const Vec a1 = random_initial_condition(iv, r1);
    const Vec a2 = random_initial_condition(iv, r1);
    CHECK(a1 != a2);
    CHECK(a1 == random_initial_condition(iv, r2));
    CHECK(a2 == random_initial_condition(iv, r2));
  }
  SUBCASE("empty interval rejected") {
    CHECK_THROWS_AS(random_initial_condition({{1.0, -1.0}}, rng), DimensionError);
  }
}
