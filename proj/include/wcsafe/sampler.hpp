#pragma once

#include <iosfwd>
#include <utility>
#include <vector>

#include "wcsafe/linalg.hpp"
#include "wcsafe/rng.hpp"
#include "wcsafe/safety.hpp"

namespace wcsafe {

/// Angle-grid configuration for boundary sampling: q[r] samples for angle
/// theta_{r+1}, level value phi, and curriculum period count.
struct AngleGridSpec {
  int n = 2;                 // state dimension, >= 2
  std::vector<int> q;        // length n-1, each >= 1
  double phi = 1.0;
  int period = 1;

  AngleGridSpec(int n_, std::vector<int> q_, double phi_ = 1.0, int period_ = 1);
};

/// Ordered boundary states in generation order. Every point satisfies
/// |s^T P s - phi| <= 1e-9 phi (checked at construction).
struct WorstCaseGrid {
  std::vector<Vec> points;
  AngleGridSpec spec;
  SafetyEnvelope envelope;
};

/// Closed-form boundary solution: y_1 = sqrt(phi/l_1) sin(t_1) prod sin(t_m),
/// y_i = sqrt(phi/l_i) cos(t_{i-1}) prod_{m>=i} sin(t_m), then s = Q y.
/// Angle vector has length n-1; eigenvalues must all be positive.
Vec boundary_point(const EigenDecomposition& decomp, double phi, const Vec& thetas);

/// Sweeps theta_1 over {0, 2pi/q1, ..., 2pi - 2pi/q1}; per theta_1 first
/// emits the point with all remaining angles zero, then nests
/// theta_r over {2pi/qr, ..., 2pi - 2pi/qr} (theta_2 slowest, theta_{n-1}
/// fastest). Coincident points are kept; order is deterministic.
WorstCaseGrid generate_grid(const SafetyEnvelope& env, const AngleGridSpec& spec);

/// Per-curriculum episode total: period * (q1 * prod_{i>=2}(q_i - 1) + q1);
/// the inner product term is absent when n == 2 (no nested loops exist).
long long episode_count(const AngleGridSpec& spec);

/// Componentwise-uniform draw over per-dimension intervals.
Vec random_initial_condition(const std::vector<std::pair<double, double>>& intervals, Rng& rng);

/// One row per point: generation index then components s1..sn.
void write_grid_csv(const WorstCaseGrid& grid, std::ostream& out);

}  // namespace wcsafe
