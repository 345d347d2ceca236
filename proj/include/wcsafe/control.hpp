#pragma once

#include "wcsafe/linalg.hpp"
#include "wcsafe/safety.hpp"

namespace wcsafe {

/// Known linear plant knowledge: s(k+1) = A s(k) + B a(k) (+ mismatch).
struct LinearModel {
  Matrix a;  // n x n
  Matrix b;  // n x m

  LinearModel(Matrix a_, Matrix b_);

  int state_dim() const { return a.rows(); }
  int action_dim() const { return b.cols(); }
};

/// Validated safety certificate: H = Abar^T P Abar with 0 < H < alpha P,
/// alpha in (0,1), Abar = A + B F. Construct via build_certificate.
struct Certificate {
  Matrix f_gain;      // m x n feedback gain F
  SymmetricMatrix p;  // envelope shape
  SymmetricMatrix h;  // one-step decrease matrix
  double alpha;
  Matrix a_bar;       // closed-loop A + B F

  int state_dim() const { return p.dim(); }
  int action_dim() const { return f_gain.rows(); }
};

/// Definiteness margins of the two certificate conditions.
struct CertificateMargins {
  double h_min_eigenvalue;    // min eig of H
  double gap_min_eigenvalue;  // min eig of alpha P - H
};

/// Stabilizing state feedback F = -K from the discrete Riccati recursion.
/// Throws ConvergenceError when the recursion does not settle (signals a
/// non-stabilizable or badly scaled model).
Matrix dlqr_gain(const LinearModel& model, const SymmetricMatrix& state_weight,
                 const SymmetricMatrix& input_weight);

/// True iff the spectral radius of m is < 1, decided by convergence of the
/// doubling iteration for sum_k (m^T)^k m^k.
bool spectral_radius_lt_one(const Matrix& m);

/// Solves (1/alpha) Abar^T P0 Abar - P0 = -I by series summation, then
/// scales P = c P0 with the smallest c that makes the envelope {s^T P s <= phi}
/// fit inside the (symmetric) safety set, touching the tightest row.
SymmetricMatrix lyapunov_p(const Matrix& a_bar, double decay_alpha, const SafetySet& set,
                           double phi = 1.0);

/// Computes Abar and H and verifies both definiteness conditions; throws
/// CertificateViolation naming the failed condition otherwise.
Certificate build_certificate(const LinearModel& model, const Matrix& f_gain,
                              const SymmetricMatrix& p, double alpha);

CertificateMargins certificate_margins(const Certificate& cert);

/// Residual control action a_drl + F s.
Vec residual_action(const Certificate& cert, const Vec& s, const Vec& a_drl);

/// Safety-embedded reward c = s_k^T H s_k - s_next^T P s_next + w_term.
double safety_reward(const Certificate& cert, const Vec& s_k, const Vec& s_next,
                     double w_term = 0.0);

}  // namespace wcsafe
