#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <utility>

#include "wcsafe/control.hpp"
#include "wcsafe/linalg.hpp"
#include "wcsafe/rng.hpp"
#include "wcsafe/safety.hpp"

namespace wcsafe {

/// Per-episode disturbance model. `Friction` draws one magnitude uniformly
/// from [0, max_magnitude] at each reset and applies it as a force opposing
/// each velocity coordinate.
struct DisturbanceSpec {
  enum class Kind { None, Friction };
  Kind kind = Kind::None;
  double max_magnitude = 0.0;
  std::uint64_t seed = 0;
};

struct EpisodeConfig {
  int max_steps = 500;
  bool terminate_on_violation = true;
  DisturbanceSpec disturbance;
};

struct StepResult {
  Vec next;
  bool terminated = false;  // episode over: hard termination, step cap, or blow-up
  bool violation = false;   // safety-set constraint failed at the new state
  bool blown_up = false;    // non-finite state, reported distinctly from violation
  bool hard_termination = false;  // the env-specific stop flag fired
};

/// A simulated plant: nonlinear step dynamics plus the linear-model
/// knowledge (A, B) and the safety-set geometry used for training and
/// evaluation. Instances own mutable state; clones are independent.
class Environment {
 public:
  virtual ~Environment() = default;

  virtual std::string name() const = 0;
  virtual int state_dim() const = 0;
  virtual int action_dim() const = 0;
  /// Symmetric per-component actuator saturation bound.
  virtual double action_limit() const = 0;

  virtual const Vec& state() const = 0;

  /// Sets the simulator state exactly, resets the step counter, and
  /// redraws the per-episode disturbance.
  virtual void set_state(const Vec& s) = 0;

  /// Saturates the action, advances one control timestep, and reports
  /// violation/termination flags.
  virtual StepResult step(const Vec& action) = 0;

  /// Analytic Jacobian linearization at the equilibrium, discretized with
  /// the exact matrix exponential at the simulation timestep.
  virtual LinearModel linearize() const = 0;

  /// Safety set in error coordinates plus the reference point it is
  /// centered on.
  virtual std::pair<SafetySet, Vec> safety_spec() const = 0;

  virtual const EpisodeConfig& episode_config() const = 0;
  virtual void set_episode_config(const EpisodeConfig& cfg) = 0;

  /// Reseeds the disturbance stream (used for per-probe determinism).
  virtual void reseed(std::uint64_t seed) = 0;

  virtual std::unique_ptr<Environment> clone() const = 0;

  /// Steps taken since the last set_state.
  virtual int steps_taken() const = 0;
};

struct CartPoleParams {
  double cart_mass = 1.0;     // kg
  double pole_mass = 0.1;     // kg
  double half_length = 0.5;   // m
  double gravity = 9.8;       // m/s^2
  double timestep = 0.02;     // s
  double force_limit = 15.0;  // N
  int substeps = 8;           // RK4 substeps per control timestep
};

/// Inverted pendulum on a cart; state (x, v, theta, omega), theta measured
/// from upright. Hard termination at |x| >= 0.9 or |theta| >= 0.8.
class CartPoleEnv final : public Environment {
 public:
  explicit CartPoleEnv(const EpisodeConfig& cfg = {}, const CartPoleParams& params = {});

  std::string name() const override { return "cartpole"; }
  int state_dim() const override { return 4; }
  int action_dim() const override { return 1; }
  double action_limit() const override { return params_.force_limit; }
  const Vec& state() const override { return state_; }
  void set_state(const Vec& s) override;
  StepResult step(const Vec& action) override;
  LinearModel linearize() const override;
  std::pair<SafetySet, Vec> safety_spec() const override;
  const EpisodeConfig& episode_config() const override { return cfg_; }
  void set_episode_config(const EpisodeConfig& cfg) override;
  void reseed(std::uint64_t seed) override;
  std::unique_ptr<Environment> clone() const override;
  int steps_taken() const override { return steps_; }

  const CartPoleParams& params() const { return params_; }

 private:
  Vec derivative(const Vec& s, double force) const;

  EpisodeConfig cfg_;
  CartPoleParams params_;
  Vec state_{0.0, 0.0, 0.0, 0.0};
  int steps_ = 0;
  Rng rng_;
  double episode_friction_ = 0.0;
};

struct PlanarQuadrotorParams {
  double mass = 0.5;       // kg
  double inertia = 0.01;   // kg m^2
  double arm = 0.15;       // m
  double gravity = 9.8;    // m/s^2
  double timestep = 0.02;  // s
  int substeps = 8;
};

/// Planar birotor tracking a hover waypoint; state is the tracking error
/// (x, z, theta, vx, vz, vtheta) and the action is the two rotor-thrust
/// deviations from hover. Hard termination when a position/attitude row
/// exceeds its bound.
class PlanarQuadrotorEnv final : public Environment {
 public:
  explicit PlanarQuadrotorEnv(const EpisodeConfig& cfg = {},
                              const PlanarQuadrotorParams& params = {});

  std::string name() const override { return "quadrotor"; }
  int state_dim() const override { return 6; }
  int action_dim() const override { return 2; }
  double action_limit() const override { return 0.5 * params_.mass * params_.gravity; }
  const Vec& state() const override { return state_; }
  void set_state(const Vec& s) override;
  StepResult step(const Vec& action) override;
  LinearModel linearize() const override;
  std::pair<SafetySet, Vec> safety_spec() const override;
  const EpisodeConfig& episode_config() const override { return cfg_; }
  void set_episode_config(const EpisodeConfig& cfg) override;
  void reseed(std::uint64_t seed) override;
  std::unique_ptr<Environment> clone() const override;
  int steps_taken() const override { return steps_; }

  const PlanarQuadrotorParams& params() const { return params_; }

 private:
  Vec derivative(const Vec& s, const Vec& thrust_delta) const;

  EpisodeConfig cfg_;
  PlanarQuadrotorParams params_;
  Vec state_ = Vec(6, 0.0);
  int steps_ = 0;
  Rng rng_;
  double episode_friction_ = 0.0;
};

/// Exact discrete linear plant s(k+1) = A s(k) + B a(k) with no mismatch;
/// used for certificate-invariance checks. Hard termination when any
/// safety row is violated.
class LinearPlantEnv final : public Environment {
 public:
  LinearPlantEnv(LinearModel model, SafetySet set, double action_limit,
                 const EpisodeConfig& cfg = {});

  std::string name() const override { return "linear"; }
  int state_dim() const override { return model_.state_dim(); }
  int action_dim() const override { return model_.action_dim(); }
  double action_limit() const override { return action_limit_; }
  const Vec& state() const override { return state_; }
  void set_state(const Vec& s) override;
  StepResult step(const Vec& action) override;
  LinearModel linearize() const override { return model_; }
  std::pair<SafetySet, Vec> safety_spec() const override;
  const EpisodeConfig& episode_config() const override { return cfg_; }
  void set_episode_config(const EpisodeConfig& cfg) override { cfg_ = cfg; }
  void reseed(std::uint64_t) override {}
  std::unique_ptr<Environment> clone() const override;
  int steps_taken() const override { return steps_; }

 private:
  LinearModel model_;
  SafetySet set_;
  double action_limit_;
  EpisodeConfig cfg_;
  Vec state_;
  int steps_ = 0;
};

/// Matrix exponential by scaling and squaring with a Taylor series summed
/// to 1e-12 relative tolerance.
Matrix matrix_exponential(const Matrix& m);

/// Zero-order-hold discretization of (A_c, B_c) at timestep dt via the
/// augmented-matrix exponential.
LinearModel discretize_exact(const Matrix& a_c, const Matrix& b_c, double dt);

}  // namespace wcsafe
