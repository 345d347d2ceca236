#include "wcsafe/safety.hpp"

#include <algorithm>
#include <cmath>

#include "wcsafe/errors.hpp"

namespace wcsafe {

SafetySet::SafetySet(Matrix d_, Vec v_, Vec upper_, Vec lower_)
    : d(std::move(d_)), v(std::move(v_)), upper(std::move(upper_)), lower(std::move(lower_)) {
  const int h = d.rows();
  if (h < 1 || d.cols() < 1) throw DimensionError("SafetySet: need h >= 1 and n >= 1");
  if (static_cast<int>(v.size()) != h || static_cast<int>(upper.size()) != h ||
      static_cast<int>(lower.size()) != h) {
    throw DimensionError("SafetySet: v/upper/lower must all have h rows");
  }
  for (int i = 0; i < h; ++i) {
    if (!(lower[i] < upper[i])) {
      throw DimensionError("SafetySet: lower[" + std::to_string(i) + "] must be < upper[" +
                           std::to_string(i) + "]");
    }
  }
}

SafetySet SafetySet::box(const Vec& bounds) {
  const int n = static_cast<int>(bounds.size());
  Vec zero(n, 0.0);
  Vec lower(n);
  for (int i = 0; i < n; ++i) lower[i] = -bounds[i];
  return SafetySet(Matrix::identity(n), zero, bounds, lower);
}

bool SafetySet::symmetric() const {
  return std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; });
}

bool SafetySet::contains(const Vec& s) const {
  if (static_cast<int>(s.size()) != state_dim())
    throw DimensionError("SafetySet::contains: state size mismatch");
  const Vec ds = d * s;
  for (int i = 0; i < rows(); ++i) {
    const double r = ds[i] - v[i];
    if (r < lower[i] || r > upper[i]) return false;
  }
  return true;
}

SafetyEnvelope::SafetyEnvelope(SymmetricMatrix p_, double phi_) : p(std::move(p_)), phi(phi_) {
  if (!(phi > 0.0)) throw DimensionError("SafetyEnvelope: phi must be positive");
  if (!is_positive_definite(p)) throw DimensionError("SafetyEnvelope: P must be positive definite");
}

const char* to_string(StateClass c) {
  switch (c) {
    case StateClass::InsideEnvelope: return "InsideEnvelope";
    case StateClass::OnBoundary: return "OnBoundary";
    case StateClass::InSetOutsideEnvelope: return "InSetOutsideEnvelope";
    case StateClass::Unsafe: return "Unsafe";
  }
  return "?";
}

double lyapunov_value(const SafetyEnvelope& env, const Vec& s) {
  return env.p.quad_form(s);
}

StateClass classify(const SafetySet& set, const SafetyEnvelope& env, const Vec& s,
                    double boundary_tol) {
  if (set.state_dim() != env.dim())
    throw DimensionError("classify: set and envelope dimensions differ");
  const double value = lyapunov_value(env, s);
  if (value < env.phi - boundary_tol) return StateClass::InsideEnvelope;
  if (std::abs(value - env.phi) <= boundary_tol) return StateClass::OnBoundary;
  return set.contains(s) ? StateClass::InSetOutsideEnvelope : StateClass::Unsafe;
}

double envelope_support(const SafetyEnvelope& env, const Vec& direction) {
  if (static_cast<int>(direction.size()) != env.dim())
    throw DimensionError("envelope_support: direction size mismatch");
  if (max_norm(direction) == 0.0)
    throw DimensionError("envelope_support: direction must be nonzero");
  const Vec x = solve_linear(env.p.mat(), direction);
  return std::sqrt(env.phi * dot(direction, x));
}

bool envelope_contained_in_set(const SafetyEnvelope& env, const SafetySet& set) {
  if (set.state_dim() != env.dim())
    throw DimensionError("envelope_contained_in_set: dimensions differ");
  if (!set.symmetric()) {
    throw DimensionError(
        "envelope_contained_in_set: symmetric certificate requires v = 0");
  }
  for (int i = 0; i < set.rows(); ++i) {
    const Vec row = set.d.row(i);
    if (max_norm(row) == 0.0) continue;  // vacuous row
    const double bound = std::min(set.upper[i], -set.lower[i]);
    if (envelope_support(env, row) > bound) return false;
  }
  return true;
}

}  // namespace wcsafe
