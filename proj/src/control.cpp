#include "wcsafe/control.hpp"

#include <cmath>

#include "wcsafe/errors.hpp"

namespace wcsafe {

LinearModel::LinearModel(Matrix a_, Matrix b_) : a(std::move(a_)), b(std::move(b_)) {
  if (a.rows() != a.cols()) throw DimensionError("LinearModel: A must be square");
  if (b.rows() != a.rows()) throw DimensionError("LinearModel: B rows must match A");
  if (!a.all_finite() || !b.all_finite()) throw DimensionError("LinearModel: non-finite entries");
}

Matrix dlqr_gain(const LinearModel& model, const SymmetricMatrix& state_weight,
                 const SymmetricMatrix& input_weight) {
  const int n = model.state_dim();
  const int m = model.action_dim();
  if (state_weight.dim() != n) throw DimensionError("dlqr_gain: state_weight dimension");
  if (input_weight.dim() != m) throw DimensionError("dlqr_gain: input_weight dimension");

  const Matrix& a = model.a;
  const Matrix& b = model.b;
  const Matrix at = a.transpose();
  const Matrix bt = b.transpose();

  constexpr int kMaxIters = 100000;
  constexpr double kTol = 1e-12;

  Matrix p = state_weight.mat();
  for (int iter = 0; iter < kMaxIters; ++iter) {
    const Matrix pa = p * a;
    const Matrix pb = p * b;
    const Matrix gram = input_weight.mat() + bt * pb;    // R + B'PB
    const Matrix gain = solve_linear(gram, bt * pa);     // (R + B'PB)^-1 B'PA
    Matrix next = state_weight.mat() + at * pa - (at * pb) * gain;
    next = SymmetricMatrix(next).mat();
    const double diff = (next - p).max_norm();
    const double scale = std::max(1.0, p.max_norm());
    p = next;
    if (p.max_norm() > 1e100) {
      throw ConvergenceError("dlqr_gain: Riccati recursion diverged (model not stabilizable?)");
    }
    if (diff <= kTol * scale) {
      const Matrix gram_f = input_weight.mat() + bt * (p * b);
      const Matrix k = solve_linear(gram_f, bt * (p * a));
      const Matrix f = k * -1.0;
      if (!spectral_radius_lt_one(a + b * f)) {
        throw ConvergenceError("dlqr_gain: converged gain is not stabilizing");
      }
      return f;
    }
  }
  throw ConvergenceError("dlqr_gain: Riccati recursion did not converge in 100000 iterations");
}

bool spectral_radius_lt_one(const Matrix& m) {
  if (m.rows() != m.cols()) throw DimensionError("spectral_radius_lt_one: matrix not square");
  // sum_k (G^T)^k G^k converges iff rho(G) < 1; doubling squares G each step.
  Matrix g = m;
  Matrix s = Matrix::identity(m.rows());
  for (int iter = 0; iter < 200; ++iter) {
    const Matrix gt = g.transpose();
    const Matrix inc = gt * (s * g);
    s = s + inc;
    g = g * g;
    if (!s.all_finite() || s.max_norm() > 1e150) return false;
    if (g.max_norm() < 1e-150) return true;
    if (inc.max_norm() <= 1e-16 * s.max_norm()) return true;
  }
  return false;
}

namespace {

/// sum_k (M^T)^k M^k by doubling: S <- S + G^T S G, G <- G^2.
Matrix gramian_series(const Matrix& m) {
  Matrix g = m;
  Matrix s = Matrix::identity(m.rows());
  for (int iter = 0; iter < 200; ++iter) {
    const Matrix inc = g.transpose() * (s * g);
    s = s + inc;
    g = g * g;
    if (!s.all_finite() || s.max_norm() > 1e150) {
      throw ConvergenceError("lyapunov series diverged (decay condition violated)");
    }
    if (inc.max_norm() <= 1e-15 * s.max_norm() && g.max_norm() < 1e-30) return s;
  }
  throw ConvergenceError("lyapunov series did not converge");
}

}  // namespace

SymmetricMatrix lyapunov_p(const Matrix& a_bar, double decay_alpha, const SafetySet& set,
                           double phi) {
  const int n = a_bar.rows();
  if (a_bar.cols() != n) throw DimensionError("lyapunov_p: a_bar must be square");
  if (set.state_dim() != n) throw DimensionError("lyapunov_p: set dimension mismatch");
  if (!(decay_alpha > 0.0)) throw DimensionError("lyapunov_p: alpha must be positive");
  if (!set.symmetric()) throw DimensionError("lyapunov_p: requires a symmetric set (v = 0)");
  if (!(phi > 0.0)) throw DimensionError("lyapunov_p: phi must be positive");

  const Matrix scaled = a_bar * (1.0 / std::sqrt(decay_alpha));
  if (!spectral_radius_lt_one(scaled)) {
    throw ConvergenceError("lyapunov_p: spectral radius of a_bar/sqrt(alpha) is not < 1");
  }
  const SymmetricMatrix p0 = SymmetricMatrix(gramian_series(scaled));

  // Smallest c with sqrt(phi d_i^T (c P0)^-1 d_i) <= min(upper_i, -lower_i)
  // for every row; the binding row touches its bound.
  const Matrix p0_inv = solve_linear(p0.mat(), Matrix::identity(n));
  double c = 0.0;
  for (int i = 0; i < set.rows(); ++i) {
    const Vec row = set.d.row(i);
    if (max_norm(row) == 0.0) continue;
    const double bound = std::min(set.upper[i], -set.lower[i]);
    if (!(bound > 0.0)) {
      throw ConvergenceError("lyapunov_p: containment impossible, nonpositive bound on row " +
                             std::to_string(i));
    }
    const double quad = dot(row, p0_inv * row);
    c = std::max(c, phi * quad / (bound * bound));
  }
  if (c == 0.0) throw ConvergenceError("lyapunov_p: degenerate D (all rows zero)");

  // Tiny headroom keeps the touching row on the feasible side of the
  // support check under roundoff.
  const SymmetricMatrix p = SymmetricMatrix(p0.mat() * (c * (1.0 + 1e-9)));
  if (!envelope_contained_in_set(SafetyEnvelope(p, phi), set)) {
    throw ConvergenceError("lyapunov_p: scaled envelope failed containment check");
  }
  return p;
}

Certificate build_certificate(const LinearModel& model, const Matrix& f_gain,
                              const SymmetricMatrix& p, double alpha) {
  const int n = model.state_dim();
  const int m = model.action_dim();
  if (f_gain.rows() != m || f_gain.cols() != n)
    throw DimensionError("build_certificate: F must be m x n");
  if (p.dim() != n) throw DimensionError("build_certificate: P dimension mismatch");
  if (!(alpha > 0.0 && alpha < 1.0))
    throw DimensionError("build_certificate: alpha must lie in (0,1)");

  const Matrix a_bar = model.a + model.b * f_gain;
  const SymmetricMatrix h = SymmetricMatrix(a_bar.transpose() * (p.mat() * a_bar));

  const EigenDecomposition h_eig = eigendecompose(h);
  if (!(h_eig.eigenvalues.front() > 0.0)) {
    throw CertificateViolation("H must be positive definite", h_eig.eigenvalues.front());
  }
  const SymmetricMatrix gap = SymmetricMatrix(p.mat() * alpha - h.mat());
  const EigenDecomposition gap_eig = eigendecompose(gap);
  if (!(gap_eig.eigenvalues.front() > 0.0)) {
    throw CertificateViolation("alpha P - H must be positive definite",
                               gap_eig.eigenvalues.front());
  }
  return Certificate{f_gain, p, h, alpha, a_bar};
}

CertificateMargins certificate_margins(const Certificate& cert) {
  const EigenDecomposition h_eig = eigendecompose(cert.h);
  const SymmetricMatrix gap = SymmetricMatrix(cert.p.mat() * cert.alpha - cert.h.mat());
  const EigenDecomposition gap_eig = eigendecompose(gap);
  return CertificateMargins{h_eig.eigenvalues.front(), gap_eig.eigenvalues.front()};
}

Vec residual_action(const Certificate& cert, const Vec& s, const Vec& a_drl) {
  if (static_cast<int>(s.size()) != cert.state_dim())
    throw DimensionError("residual_action: state dimension mismatch");
  if (static_cast<int>(a_drl.size()) != cert.action_dim())
    throw DimensionError("residual_action: action dimension mismatch");
  return add(a_drl, cert.f_gain * s);
}

double safety_reward(const Certificate& cert, const Vec& s_k, const Vec& s_next, double w_term) {
  return cert.h.quad_form(s_k) - cert.p.quad_form(s_next) + w_term;
}

}  // namespace wcsafe
