#include "wcsafe/sampler.hpp"

#include <cmath>
#include <numbers>
#include <ostream>

#include "wcsafe/errors.hpp"

namespace wcsafe {

AngleGridSpec::AngleGridSpec(int n_, std::vector<int> q_, double phi_, int period_)
    : n(n_), q(std::move(q_)), phi(phi_), period(period_) {
  if (n < 2) throw DimensionError("AngleGridSpec: n must be >= 2");
  if (static_cast<int>(q.size()) != n - 1)
    throw DimensionError("AngleGridSpec: q must have n-1 entries");
  for (int qi : q)
    if (qi < 1) throw DimensionError("AngleGridSpec: every q must be >= 1");
  if (!(phi > 0.0)) throw DimensionError("AngleGridSpec: phi must be positive");
  if (period < 1) throw DimensionError("AngleGridSpec: period must be >= 1");
}

Vec boundary_point(const EigenDecomposition& decomp, double phi, const Vec& thetas) {
  const int n = static_cast<int>(decomp.eigenvalues.size());
  if (static_cast<int>(thetas.size()) != n - 1)
    throw DimensionError("boundary_point: need n-1 angles for dimension " + std::to_string(n));
  if (!(phi > 0.0)) throw DimensionError("boundary_point: phi must be positive");
  for (double lambda : decomp.eigenvalues)
    if (!(lambda > 0.0)) throw DimensionError("boundary_point: eigenvalues must be positive");

  // suffix_sin[k] = prod_{m=k}^{n-1} sin(theta_m), empty product = 1.
  Vec suffix_sin(static_cast<size_t>(n) + 1, 1.0);
  for (int k = n - 1; k >= 1; --k) suffix_sin[k] = std::sin(thetas[k - 1]) * suffix_sin[k + 1];

  Vec y(n);
  y[0] = std::sqrt(phi / decomp.eigenvalues[0]) * std::sin(thetas[0]) * suffix_sin[2];
  for (int i = 2; i <= n; ++i) {
    y[i - 1] = std::sqrt(phi / decomp.eigenvalues[i - 1]) * std::cos(thetas[i - 2]) *
               suffix_sin[i];
  }
  return decomp.q * y;
}

WorstCaseGrid generate_grid(const SafetyEnvelope& env, const AngleGridSpec& spec) {
  if (spec.n != env.dim())
    throw DimensionError("generate_grid: spec dimension " + std::to_string(spec.n) +
                         " vs envelope dimension " + std::to_string(env.dim()));
  const EigenDecomposition decomp = eigendecompose(env.p);
  const int n = spec.n;
  const double two_pi = 2.0 * std::numbers::pi;

  WorstCaseGrid grid{{}, spec, env};
  Vec thetas(static_cast<size_t>(n) - 1, 0.0);

  // Nested angle sweep theta_2..theta_{n-1}, theta_2 slowest. Each angle
  // takes q_r - 1 values {2pi/q_r, ..., 2pi - 2pi/q_r }.
  const auto sweep_inner = [&](auto&& self, int r) -> void {
    if (r > n - 1) {
      grid.points.push_back(boundary_point(decomp, spec.phi, thetas));
      return;
    }
    const int qr = spec.q[r - 1];
    for (int j = 1; j < qr; ++j) {
      thetas[r - 1] = two_pi * j / qr;
      self(self, r + 1);
    }
  };

  const int q1 = spec.q[0];
  for (int i = 0; i < q1; ++i) {
    thetas.assign(thetas.size(), 0.0);
    thetas[0] = two_pi * i / q1;
    grid.points.push_back(boundary_point(decomp, spec.phi, thetas));
    if (n >= 3) sweep_inner(sweep_inner, 2);
  }

  for (const Vec& s : grid.points) {
    if (std::abs(env.p.quad_form(s) - spec.phi) > 1e-9 * spec.phi) {
      throw ConvergenceError("generate_grid: boundary residual exceeds 1e-9 * phi");
    }
  }
  return grid;
}

long long episode_count(const AngleGridSpec& spec) {
  long long inner = spec.n >= 3 ? 1 : 0;
  for (int r = 2; r <= spec.n - 1; ++r) inner *= spec.q[r - 1] - 1;
  const long long per_period = static_cast<long long>(spec.q[0]) * inner + spec.q[0];
  return per_period * spec.period;
}

Vec random_initial_condition(const std::vector<std::pair<double, double>>& intervals, Rng& rng) {
  if (intervals.empty()) throw DimensionError("random_initial_condition: no intervals");
  Vec s(intervals.size());
  for (size_t i = 0; i < intervals.size(); ++i) {
    const auto [lo, hi] = intervals[i];
    if (lo > hi)
      throw DimensionError("random_initial_condition: empty interval at dimension " +
                           std::to_string(i));
    s[i] = lo == hi ? lo : rng.uniform(lo, hi);
  }
  return s;
}

void write_grid_csv(const WorstCaseGrid& grid, std::ostream& out) {
  out << "index";
  for (int j = 1; j <= grid.spec.n; ++j) out << ",s" << j;
  out << "\n";
  out.precision(17);
  for (size_t i = 0; i < grid.points.size(); ++i) {
    out << i;
    for (double x : grid.points[i]) out << "," << x;
    out << "\n";
  }
}

}  // namespace wcsafe
