#pragma once

#include <initializer_list>
#include <vector>

namespace wcsafe {

using Vec = std::vector<double>;

// Vector helpers. All throw DimensionError on size mismatch.
double dot(const Vec& a, const Vec& b);
Vec add(const Vec& a, const Vec& b);
Vec sub(const Vec& a, const Vec& b);
Vec scale(double c, const Vec& a);
double max_norm(const Vec& a);
double norm2(const Vec& a);
bool all_finite(const Vec& a);

/// Dense row-major matrix. Small sizes only (state dimensions here are <= 12).
class Matrix {
 public:
  Matrix() = default;
  Matrix(int rows, int cols);  // zero-initialized
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix identity(int n);
  static Matrix diag(const Vec& d);

  int rows() const { return rows_; }
  int cols() const { return cols_; }

  double& operator()(int i, int j) { return data_[static_cast<size_t>(i) * cols_ + j]; }
  double operator()(int i, int j) const { return data_[static_cast<size_t>(i) * cols_ + j]; }

  Matrix transpose() const;
  Matrix operator+(const Matrix& o) const;
  Matrix operator-(const Matrix& o) const;
  Matrix operator*(const Matrix& o) const;
  Vec operator*(const Vec& v) const;
  Matrix operator*(double c) const;

  Vec row(int i) const;
  Vec col(int j) const;

  /// Max absolute entry.
  double max_norm() const;
  bool all_finite() const;

  const std::vector<double>& data() const { return data_; }
  std::vector<double>& data() { return data_; }

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> data_;
};

inline Matrix operator*(double c, const Matrix& m) { return m * c; }

/// Symmetric matrix; construction symmetrizes the input as (M + M^T)/2 so
/// the entries[i][j] == entries[j][i] invariant holds exactly.
class SymmetricMatrix {
 public:
  explicit SymmetricMatrix(const Matrix& m);
  static SymmetricMatrix identity(int n) { return SymmetricMatrix(Matrix::identity(n)); }
  static SymmetricMatrix diag(const Vec& d) { return SymmetricMatrix(Matrix::diag(d)); }

  int dim() const { return mat_.rows(); }
  double operator()(int i, int j) const { return mat_(i, j); }
  const Matrix& mat() const { return mat_; }

  /// s^T M s.
  double quad_form(const Vec& s) const;

 private:
  Matrix mat_;
};

/// Eigenvalues ascending; column i of q is the unit eigenvector for
/// eigenvalues[i]. Columns are sign-fixed (largest-magnitude component
/// positive) so the output is deterministic.
struct EigenDecomposition {
  Vec eigenvalues;
  Matrix q;
};

/// Cyclic Jacobi diagonalization. Converges when the off-diagonal max-norm
/// drops below 1e-12 of the input max-norm; throws ConvergenceError after
/// 100 sweeps.
EigenDecomposition eigendecompose(const SymmetricMatrix& m);

/// True iff all eigenvalues are strictly positive (no slack).
bool is_positive_definite(const SymmetricMatrix& m);

/// Gaussian elimination with scaled partial pivoting. Throws
/// SingularMatrixError when the best pivot falls below 1e-12 of its row
/// scale.
Vec solve_linear(const Matrix& m, const Vec& b);

/// Column-by-column solve; returns X with m*X = b.
Matrix solve_linear(const Matrix& m, const Matrix& b);

}  // namespace wcsafe
