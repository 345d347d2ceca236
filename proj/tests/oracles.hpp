// Test-only oracles, independent of the implementation paths they check.
#pragma once

#include <cmath>
#include <vector>

#include "wcsafe/env.hpp"
#include "wcsafe/linalg.hpp"
#include "wcsafe/rng.hpp"

namespace wcsafe::oracles {

/// Spectral radius estimate by normalized power iteration on a random
/// start vector: averages the log growth rate over the tail iterations,
/// which converges for complex dominant pairs as well.
inline double spectral_radius(const Matrix& m, int iters = 4000) {
  Rng rng(12345);
  Vec x(m.rows());
  for (double& v : x) v = rng.uniform(-1.0, 1.0);
  double log_acc = 0.0;
  int counted = 0;
  const int tail_start = iters / 2;
  for (int k = 0; k < iters; ++k) {
    x = m * x;
    const double norm = norm2(x);
    if (norm == 0.0) return 0.0;
    if (k >= tail_start) {
      log_acc += std::log(norm);
      ++counted;
    }
    x = scale(1.0 / norm, x);
  }
  return std::exp(log_acc / counted);
}

/// Central-difference Jacobians of one environment step with respect to
/// state and action, evaluated at (s0, a0).
struct StepJacobians {
  Matrix a;
  Matrix b;
};

inline StepJacobians finite_difference_step_jacobians(Environment& env, const Vec& s0,
                                                      const Vec& a0, double h = 1e-6) {
  const int n = env.state_dim();
  const int m = env.action_dim();
  StepJacobians out{Matrix(n, n), Matrix(n, m)};
  for (int j = 0; j < n; ++j) {
    Vec sp = s0, sm = s0;
    sp[j] += h;
    sm[j] -= h;
    env.set_state(sp);
    const Vec fp = env.step(a0).next;
    env.set_state(sm);
    const Vec fm = env.step(a0).next;
    for (int i = 0; i < n; ++i) out.a(i, j) = (fp[i] - fm[i]) / (2.0 * h);
  }
  for (int j = 0; j < m; ++j) {
    Vec ap = a0, am = a0;
    ap[j] += h;
    am[j] -= h;
    env.set_state(s0);
    const Vec fp = env.step(ap).next;
    env.set_state(s0);
    const Vec fm = env.step(am).next;
    for (int i = 0; i < n; ++i) out.b(i, j) = (fp[i] - fm[i]) / (2.0 * h);
  }
  env.set_state(s0);
  return out;
}

/// Total mechanical energy of the cart-pole (cart + uniform rod pivoted on
/// it), for conservation checks on the unforced frictionless system.
inline double cartpole_energy(const CartPoleParams& p, const Vec& s) {
  const double v = s[1];
  const double theta = s[2];
  const double omega = s[3];
  const double mt = p.cart_mass + p.pole_mass;
  const double kinetic = 0.5 * mt * v * v +
                         p.pole_mass * p.half_length * v * omega * std::cos(theta) +
                         (2.0 / 3.0) * p.pole_mass * p.half_length * p.half_length * omega * omega;
  const double potential = p.pole_mass * p.gravity * p.half_length * std::cos(theta);
  return kinetic + potential;
}

/// Random symmetric positive definite matrix R^T R + eps I.
inline SymmetricMatrix random_spd(int n, Rng& rng, double eps = 1e-3) {
  Matrix r(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) r(i, j) = rng.uniform(-1.0, 1.0);
  Matrix m = r.transpose() * r;
  for (int i = 0; i < n; ++i) m(i, i) += eps;
  return SymmetricMatrix(m);
}

inline SymmetricMatrix random_symmetric(int n, Rng& rng) {
  Matrix r(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) r(i, j) = rng.uniform(-1.0, 1.0);
  return SymmetricMatrix(r);
}

}  // namespace wcsafe::oracles
