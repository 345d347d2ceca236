#pragma once

#include "wcsafe/linalg.hpp"

namespace wcsafe {

/// Default boundary tolerances for state classification: tests use the
/// tight value (generator exactness), runtime rollouts the loose one
/// (simulation float noise).
inline constexpr double kBoundaryTolTest = 1e-9;
inline constexpr double kBoundaryTolRuntime = 1e-6;

/// Box-like admissible region {s : lower <= D s - v <= upper}, one row per
/// safety condition.
struct SafetySet {
  Matrix d;   // h x n constraint directions
  Vec v;      // offsets
  Vec upper;  // componentwise upper bounds
  Vec lower;  // componentwise lower bounds

  SafetySet(Matrix d_, Vec v_, Vec upper_, Vec lower_);

  int rows() const { return d.rows(); }
  int state_dim() const { return d.cols(); }

  /// Symmetric axis-aligned box |s_i| <= bounds[i].
  static SafetySet box(const Vec& bounds);

  /// True iff every |v_i| is exactly zero.
  bool symmetric() const;

  /// Componentwise membership test.
  bool contains(const Vec& s) const;
};

/// Ellipsoidal envelope {s : s^T P s <= phi} with P positive definite.
struct SafetyEnvelope {
  SymmetricMatrix p;
  double phi;

  explicit SafetyEnvelope(SymmetricMatrix p_, double phi_ = 1.0);

  int dim() const { return p.dim(); }
};

enum class StateClass { InsideEnvelope, OnBoundary, InSetOutsideEnvelope, Unsafe };

const char* to_string(StateClass c);

/// s^T P s.
double lyapunov_value(const SafetyEnvelope& env, const Vec& s);

/// Partition of R^n by Lyapunov value and set membership:
/// value < phi - tol        -> InsideEnvelope
/// |value - phi| <= tol     -> OnBoundary
/// otherwise, in set        -> InSetOutsideEnvelope
/// otherwise                -> Unsafe
StateClass classify(const SafetySet& set, const SafetyEnvelope& env, const Vec& s,
                    double boundary_tol = kBoundaryTolRuntime);

/// Support function of the envelope: max_{s in Omega} d.s = sqrt(phi d^T P^-1 d).
double envelope_support(const SafetyEnvelope& env, const Vec& direction);

/// Certifies Omega subset-of X for symmetric sets (v = 0): each row's
/// support must not exceed min(upper_i, -lower_i). Throws on nonzero v.
bool envelope_contained_in_set(const SafetyEnvelope& env, const SafetySet& set);

}  // namespace wcsafe
