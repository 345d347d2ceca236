#include "wcsafe/env.hpp"

#include <algorithm>
#include <cmath>

#include "wcsafe/errors.hpp"

namespace wcsafe {

namespace {

double saturate(double x, double limit) { return std::clamp(x, -limit, limit); }

double sign(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

/// Classical RK4 over a fixed number of substeps.
template <typename Deriv>
Vec rk4(const Vec& s0, double dt, int substeps, const Deriv& f) {
  Vec s = s0;
  const double h = dt / substeps;
  const int n = static_cast<int>(s.size());
  Vec k1(n), k2(n), k3(n), k4(n), tmp(n);
  for (int step = 0; step < substeps; ++step) {
    k1 = f(s);
    for (int i = 0; i < n; ++i) tmp[i] = s[i] + 0.5 * h * k1[i];
    k2 = f(tmp);
    for (int i = 0; i < n; ++i) tmp[i] = s[i] + 0.5 * h * k2[i];
    k3 = f(tmp);
    for (int i = 0; i < n; ++i) tmp[i] = s[i] + h * k3[i];
    k4 = f(tmp);
    for (int i = 0; i < n; ++i) s[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  }
  return s;
}

StepResult finish_step(Vec next, int steps, const EpisodeConfig& cfg, const SafetySet& set,
                       bool hard_term) {
  StepResult r;
  r.blown_up = !all_finite(next);
  r.violation = r.blown_up ? true : !set.contains(next);
  r.hard_termination = hard_term;
  r.terminated = r.blown_up || steps >= cfg.max_steps ||
                 (cfg.terminate_on_violation && hard_term);
  r.next = std::move(next);
  return r;
}

}  // namespace

Matrix matrix_exponential(const Matrix& m) {
  if (m.rows() != m.cols()) throw DimensionError("matrix_exponential: matrix not square");
  const int n = m.rows();
  int squarings = 0;
  double norm = m.max_norm();
  while (norm > 0.5) {
    norm *= 0.5;
    ++squarings;
  }
  const Matrix a = m * std::pow(0.5, squarings);

  Matrix result = Matrix::identity(n);
  Matrix term = Matrix::identity(n);
  for (int k = 1; k <= 60; ++k) {
    term = term * a * (1.0 / k);
    result = result + term;
    if (term.max_norm() <= 1e-12 * std::max(1.0, result.max_norm()) && k >= 4) break;
  }
  for (int i = 0; i < squarings; ++i) result = result * result;
  return result;
}

LinearModel discretize_exact(const Matrix& a_c, const Matrix& b_c, double dt) {
  const int n = a_c.rows();
  const int m = b_c.cols();
  Matrix aug(n + m, n + m);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) aug(i, j) = a_c(i, j) * dt;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j) aug(i, n + j) = b_c(i, j) * dt;
  const Matrix e = matrix_exponential(aug);
  Matrix a_d(n, n), b_d(n, m);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a_d(i, j) = e(i, j);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j) b_d(i, j) = e(i, n + j);
  return LinearModel(a_d, b_d);
}

// ---------------------------------------------------------------------------
// Cart-pole

CartPoleEnv::CartPoleEnv(const EpisodeConfig& cfg, const CartPoleParams& params)
    : cfg_(cfg), params_(params), rng_(cfg.disturbance.seed) {}

void CartPoleEnv::set_state(const Vec& s) {
  if (s.size() != 4) throw DimensionError("CartPoleEnv::set_state: state must have 4 entries");
  if (!all_finite(s)) throw DimensionError("CartPoleEnv::set_state: non-finite state");
  state_ = s;
  steps_ = 0;
  episode_friction_ = cfg_.disturbance.kind == DisturbanceSpec::Kind::Friction
                          ? rng_.uniform(0.0, cfg_.disturbance.max_magnitude)
                          : 0.0;
}

Vec CartPoleEnv::derivative(const Vec& s, double force) const {
  const double theta = s[2];
  const double omega = s[3];
  const double mc = params_.cart_mass;
  const double mp = params_.pole_mass;
  const double l = params_.half_length;
  const double g = params_.gravity;
  const double total = mc + mp;

  const double sin_t = std::sin(theta);
  const double cos_t = std::cos(theta);
  const double f_eff = force - episode_friction_ * sign(s[1]);

  const double tmp = (-f_eff - mp * l * omega * omega * sin_t) / total;
  const double denom = l * (4.0 / 3.0 - mp * cos_t * cos_t / total);
  const double omega_dot = (g * sin_t + cos_t * tmp) / denom;
  const double v_dot = (f_eff + mp * l * (omega * omega * sin_t - omega_dot * cos_t)) / total;

  return Vec{s[1], v_dot, omega, omega_dot};
}

StepResult CartPoleEnv::step(const Vec& action) {
  if (action.size() != 1) throw DimensionError("CartPoleEnv::step: action must have 1 entry");
  if (!all_finite(state_) || !all_finite(action))
    throw NumericBlowupError("CartPoleEnv::step: non-finite state or action");
  const double force = saturate(action[0], params_.force_limit);
  Vec next = rk4(state_, params_.timestep, params_.substeps,
                 [&](const Vec& s) { return derivative(s, force); });
  ++steps_;
  const bool hard = std::abs(next[0]) >= 0.9 || std::abs(next[2]) >= 0.8;
  StepResult r = finish_step(std::move(next), steps_, cfg_, safety_spec().first, hard);
  state_ = r.blown_up ? state_ : r.next;
  return r;
}

LinearModel CartPoleEnv::linearize() const {
  const double mc = params_.cart_mass;
  const double mp = params_.pole_mass;
  const double l = params_.half_length;
  const double g = params_.gravity;
  const double total = mc + mp;
  const double denom = l * (4.0 / 3.0 - mp / total);

  const double dwdot_dtheta = g / denom;
  const double dwdot_df = -1.0 / (total * denom);
  const double dvdot_dtheta = -mp * l * dwdot_dtheta / total;
  const double dvdot_df = (1.0 - mp * l * dwdot_df) / total;

  Matrix a_c(4, 4);
  a_c(0, 1) = 1.0;
  a_c(1, 2) = dvdot_dtheta;
  a_c(2, 3) = 1.0;
  a_c(3, 2) = dwdot_dtheta;
  Matrix b_c(4, 1);
  b_c(1, 0) = dvdot_df;
  b_c(3, 0) = dwdot_df;
  return discretize_exact(a_c, b_c, params_.timestep);
}

std::pair<SafetySet, Vec> CartPoleEnv::safety_spec() const {
  return {SafetySet::box({0.9, 3.0, 0.8, 4.5}), Vec(4, 0.0)};
}

void CartPoleEnv::set_episode_config(const EpisodeConfig& cfg) {
  cfg_ = cfg;
  rng_ = Rng(cfg.disturbance.seed);
}

void CartPoleEnv::reseed(std::uint64_t seed) { rng_ = Rng(seed); }

std::unique_ptr<Environment> CartPoleEnv::clone() const {
  return std::make_unique<CartPoleEnv>(*this);
}

// ---------------------------------------------------------------------------
// Planar quadrotor

PlanarQuadrotorEnv::PlanarQuadrotorEnv(const EpisodeConfig& cfg,
                                       const PlanarQuadrotorParams& params)
    : cfg_(cfg), params_(params), rng_(cfg.disturbance.seed) {}

void PlanarQuadrotorEnv::set_state(const Vec& s) {
  if (s.size() != 6)
    throw DimensionError("PlanarQuadrotorEnv::set_state: state must have 6 entries");
  if (!all_finite(s)) throw DimensionError("PlanarQuadrotorEnv::set_state: non-finite state");
  state_ = s;
  steps_ = 0;
  episode_friction_ = cfg_.disturbance.kind == DisturbanceSpec::Kind::Friction
                          ? rng_.uniform(0.0, cfg_.disturbance.max_magnitude)
                          : 0.0;
}

Vec PlanarQuadrotorEnv::derivative(const Vec& s, const Vec& thrust_delta) const {
  const double theta = s[2];
  const double m = params_.mass;
  const double g = params_.gravity;
  const double hover = 0.5 * m * g;
  const double t1 = hover + thrust_delta[0];
  const double t2 = hover + thrust_delta[1];
  const double thrust = t1 + t2;
  const double torque = params_.arm * (t1 - t2);

  const double fx = -episode_friction_ * sign(s[3]);
  const double fz = -episode_friction_ * sign(s[4]);

  Vec d(6);
  d[0] = s[3];
  d[1] = s[4];
  d[2] = s[5];
  d[3] = (-thrust * std::sin(theta) + fx) / m;
  d[4] = (thrust * std::cos(theta) + fz) / m - g;
  d[5] = torque / params_.inertia;
  return d;
}

StepResult PlanarQuadrotorEnv::step(const Vec& action) {
  if (action.size() != 2)
    throw DimensionError("PlanarQuadrotorEnv::step: action must have 2 entries");
  if (!all_finite(state_) || !all_finite(action))
    throw NumericBlowupError("PlanarQuadrotorEnv::step: non-finite state or action");
  const double limit = action_limit();
  const Vec thrust_delta{saturate(action[0], limit), saturate(action[1], limit)};
  Vec next = rk4(state_, params_.timestep, params_.substeps,
                 [&](const Vec& s) { return derivative(s, thrust_delta); });
  ++steps_;
  const bool hard =
      std::abs(next[0]) >= 0.5 || std::abs(next[1]) >= 0.8 || std::abs(next[2]) >= 0.8;
  StepResult r = finish_step(std::move(next), steps_, cfg_, safety_spec().first, hard);
  state_ = r.blown_up ? state_ : r.next;
  return r;
}

LinearModel PlanarQuadrotorEnv::linearize() const {
  const double m = params_.mass;
  Matrix a_c(6, 6);
  a_c(0, 3) = 1.0;
  a_c(1, 4) = 1.0;
  a_c(2, 5) = 1.0;
  a_c(3, 2) = -params_.gravity;
  Matrix b_c(6, 2);
  b_c(4, 0) = 1.0 / m;
  b_c(4, 1) = 1.0 / m;
  b_c(5, 0) = params_.arm / params_.inertia;
  b_c(5, 1) = -params_.arm / params_.inertia;
  return discretize_exact(a_c, b_c, params_.timestep);
}

std::pair<SafetySet, Vec> PlanarQuadrotorEnv::safety_spec() const {
  // Error-coordinate box around the waypoint (2, 4, 0) with velocity rows
  // taken from the sampling intervals.
  return {SafetySet::box({0.5, 0.8, 0.8, 1.0, 10.0, 45.0}), Vec{2.0, 4.0, 0.0, 0.0, 0.0, 0.0}};
}

void PlanarQuadrotorEnv::set_episode_config(const EpisodeConfig& cfg) {
  cfg_ = cfg;
  rng_ = Rng(cfg.disturbance.seed);
}

void PlanarQuadrotorEnv::reseed(std::uint64_t seed) { rng_ = Rng(seed); }

std::unique_ptr<Environment> PlanarQuadrotorEnv::clone() const {
  return std::make_unique<PlanarQuadrotorEnv>(*this);
}

// ---------------------------------------------------------------------------
// Exact linear plant

LinearPlantEnv::LinearPlantEnv(LinearModel model, SafetySet set, double action_limit,
                               const EpisodeConfig& cfg)
    : model_(std::move(model)),
      set_(std::move(set)),
      action_limit_(action_limit),
      cfg_(cfg),
      state_(model_.state_dim(), 0.0) {
  if (set_.state_dim() != model_.state_dim())
    throw DimensionError("LinearPlantEnv: set dimension mismatch");
}

void LinearPlantEnv::set_state(const Vec& s) {
  if (static_cast<int>(s.size()) != state_dim())
    throw DimensionError("LinearPlantEnv::set_state: state dimension mismatch");
  if (!all_finite(s)) throw DimensionError("LinearPlantEnv::set_state: non-finite state");
  state_ = s;
  steps_ = 0;
}

StepResult LinearPlantEnv::step(const Vec& action) {
  if (static_cast<int>(action.size()) != action_dim())
    throw DimensionError("LinearPlantEnv::step: action dimension mismatch");
  Vec a = action;
  for (double& x : a) x = saturate(x, action_limit_);
  Vec next = add(model_.a * state_, model_.b * a);
  ++steps_;
  const bool hard = all_finite(next) && !set_.contains(next);
  StepResult r = finish_step(std::move(next), steps_, cfg_, set_, hard);
  state_ = r.blown_up ? state_ : r.next;
  return r;
}

std::pair<SafetySet, Vec> LinearPlantEnv::safety_spec() const {
  return {set_, Vec(state_dim(), 0.0)};
}

std::unique_ptr<Environment> LinearPlantEnv::clone() const {
  return std::make_unique<LinearPlantEnv>(*this);
}

}  // namespace wcsafe
