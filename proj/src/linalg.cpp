#include "wcsafe/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "wcsafe/errors.hpp"

namespace wcsafe {

namespace {

void require_same_size(const Vec& a, const Vec& b, const char* op) {
  if (a.size() != b.size()) {
    throw DimensionError(std::string(op) + ": vector sizes " + std::to_string(a.size()) +
                         " vs " + std::to_string(b.size()));
  }
}

}  // namespace

double dot(const Vec& a, const Vec& b) {
  require_same_size(a, b, "dot");
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

Vec add(const Vec& a, const Vec& b) {
  require_same_size(a, b, "add");
  Vec r(a.size());
  for (size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
  return r;
}

Vec sub(const Vec& a, const Vec& b) {
  require_same_size(a, b, "sub");
  Vec r(a.size());
  for (size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
  return r;
}

Vec scale(double c, const Vec& a) {
  Vec r(a.size());
  for (size_t i = 0; i < a.size(); ++i) r[i] = c * a[i];
  return r;
}

double max_norm(const Vec& a) {
  double m = 0.0;
  for (double x : a) m = std::max(m, std::abs(x));
  return m;
}

double norm2(const Vec& a) { return std::sqrt(dot(a, a)); }

bool all_finite(const Vec& a) {
  return std::all_of(a.begin(), a.end(), [](double x) { return std::isfinite(x); });
}

Matrix::Matrix(int rows, int cols) : rows_(rows), cols_(cols) {
  if (rows < 0 || cols < 0) throw DimensionError("Matrix: negative dimension");
  data_.assign(static_cast<size_t>(rows) * cols, 0.0);
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
  rows_ = static_cast<int>(rows.size());
  cols_ = rows_ > 0 ? static_cast<int>(rows.begin()->size()) : 0;
  data_.reserve(static_cast<size_t>(rows_) * cols_);
  for (const auto& r : rows) {
    if (static_cast<int>(r.size()) != cols_) throw DimensionError("Matrix: ragged initializer");
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

Matrix Matrix::identity(int n) {
  Matrix m(n, n);
  for (int i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::diag(const Vec& d) {
  Matrix m(static_cast<int>(d.size()), static_cast<int>(d.size()));
  for (size_t i = 0; i < d.size(); ++i) m(static_cast<int>(i), static_cast<int>(i)) = d[i];
  return m;
}

Matrix Matrix::transpose() const {
  Matrix t(cols_, rows_);
  for (int i = 0; i < rows_; ++i)
    for (int j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

Matrix Matrix::operator+(const Matrix& o) const {
  if (rows_ != o.rows_ || cols_ != o.cols_) throw DimensionError("Matrix+: shape mismatch");
  Matrix r(rows_, cols_);
  for (size_t i = 0; i < data_.size(); ++i) r.data_[i] = data_[i] + o.data_[i];
  return r;
}

Matrix Matrix::operator-(const Matrix& o) const {
  if (rows_ != o.rows_ || cols_ != o.cols_) throw DimensionError("Matrix-: shape mismatch");
  Matrix r(rows_, cols_);
  for (size_t i = 0; i < data_.size(); ++i) r.data_[i] = data_[i] - o.data_[i];
  return r;
}

Matrix Matrix::operator*(const Matrix& o) const {
  if (cols_ != o.rows_) throw DimensionError("Matrix*: inner dimensions " +
                                             std::to_string(cols_) + " vs " +
                                             std::to_string(o.rows_));
  Matrix r(rows_, o.cols_);
  for (int i = 0; i < rows_; ++i) {
    for (int k = 0; k < cols_; ++k) {
      const double a = (*this)(i, k);
      if (a == 0.0) continue;
      for (int j = 0; j < o.cols_; ++j) r(i, j) += a * o(k, j);
    }
  }
  return r;
}

Vec Matrix::operator*(const Vec& v) const {
  if (cols_ != static_cast<int>(v.size()))
    throw DimensionError("Matrix*Vec: " + std::to_string(cols_) + " vs " +
                         std::to_string(v.size()));
  Vec r(rows_, 0.0);
  for (int i = 0; i < rows_; ++i) {
    double s = 0.0;
    for (int j = 0; j < cols_; ++j) s += (*this)(i, j) * v[j];
    r[i] = s;
  }
  return r;
}

Matrix Matrix::operator*(double c) const {
  Matrix r(rows_, cols_);
  for (size_t i = 0; i < data_.size(); ++i) r.data_[i] = c * data_[i];
  return r;
}

Vec Matrix::row(int i) const {
  Vec r(cols_);
  for (int j = 0; j < cols_; ++j) r[j] = (*this)(i, j);
  return r;
}

Vec Matrix::col(int j) const {
  Vec c(rows_);
  for (int i = 0; i < rows_; ++i) c[i] = (*this)(i, j);
  return c;
}

double Matrix::max_norm() const {
  double m = 0.0;
  for (double x : data_) m = std::max(m, std::abs(x));
  return m;
}

bool Matrix::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double x) { return std::isfinite(x); });
}

SymmetricMatrix::SymmetricMatrix(const Matrix& m) {
  if (m.rows() != m.cols()) throw DimensionError("SymmetricMatrix: input not square");
  if (m.rows() < 1) throw DimensionError("SymmetricMatrix: dim must be >= 1");
  Matrix s(m.rows(), m.cols());
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j) s(i, j) = 0.5 * (m(i, j) + m(j, i));
  mat_ = s;
}

double SymmetricMatrix::quad_form(const Vec& s) const {
  if (static_cast<int>(s.size()) != dim())
    throw DimensionError("quad_form: state size " + std::to_string(s.size()) +
                         " vs matrix dim " + std::to_string(dim()));
  double acc = 0.0;
  for (int i = 0; i < dim(); ++i) {
    double row = 0.0;
    for (int j = 0; j < dim(); ++j) row += mat_(i, j) * s[j];
    acc += s[i] * row;
  }
  return acc;
}

namespace {

double off_diagonal_max(const Matrix& a) {
  double m = 0.0;
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j)
      if (i != j) m = std::max(m, std::abs(a(i, j)));
  return m;
}

}  // namespace

EigenDecomposition eigendecompose(const SymmetricMatrix& m) {
  const int n = m.dim();
  Matrix a = m.mat();
  Matrix v = Matrix::identity(n);
  const double threshold = 1e-12 * a.max_norm();
  constexpr int kMaxSweeps = 100;

  bool converged = off_diagonal_max(a) <= threshold;
  for (int sweep = 0; sweep < kMaxSweeps && !converged; ++sweep) {
    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (std::abs(apq) <= threshold) continue;
        const double tau = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;

        for (int k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (int k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
    converged = off_diagonal_max(a) <= threshold;
  }
  if (!converged) throw ConvergenceError("eigendecompose: Jacobi did not converge in 100 sweeps");

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&a](int i, int j) { return a(i, i) < a(j, j); });

  EigenDecomposition d;
  d.eigenvalues.resize(n);
  d.q = Matrix(n, n);
  for (int c = 0; c < n; ++c) {
    const int src = order[c];
    d.eigenvalues[c] = a(src, src);
    int arg = 0;
    double best = 0.0;
    for (int r = 0; r < n; ++r) {
      if (std::abs(v(r, src)) > best) {
        best = std::abs(v(r, src));
        arg = r;
      }
    }
    const double sign = v(arg, src) < 0.0 ? -1.0 : 1.0;
    for (int r = 0; r < n; ++r) d.q(r, c) = sign * v(r, src);
  }
  return d;
}

bool is_positive_definite(const SymmetricMatrix& m) {
  const EigenDecomposition d = eigendecompose(m);
  return d.eigenvalues.front() > 0.0;
}

Vec solve_linear(const Matrix& m, const Vec& b) {
  Matrix rhs(static_cast<int>(b.size()), 1);
  for (size_t i = 0; i < b.size(); ++i) rhs(static_cast<int>(i), 0) = b[i];
  const Matrix x = solve_linear(m, rhs);
  return x.col(0);
}

Matrix solve_linear(const Matrix& m, const Matrix& b) {
  const int n = m.rows();
  if (m.cols() != n) throw DimensionError("solve_linear: matrix not square");
  if (b.rows() != n) throw DimensionError("solve_linear: rhs rows " + std::to_string(b.rows()) +
                                          " vs " + std::to_string(n));
  Matrix a = m;
  Matrix x = b;
  std::vector<double> row_scale(n, 0.0);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) row_scale[i] = std::max(row_scale[i], std::abs(a(i, j)));
  }
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);

  for (int k = 0; k < n; ++k) {
    int pivot = -1;
    double best = 0.0;
    for (int i = k; i < n; ++i) {
      const int r = perm[i];
      if (row_scale[r] == 0.0) continue;
      const double ratio = std::abs(a(r, k)) / row_scale[r];
      if (ratio > best) {
        best = ratio;
        pivot = i;
      }
    }
    if (pivot < 0 || best < 1e-12) throw SingularMatrixError("solve_linear: singular matrix");
    std::swap(perm[k], perm[pivot]);
    const int pr = perm[k];
    for (int i = k + 1; i < n; ++i) {
      const int r = perm[i];
      const double f = a(r, k) / a(pr, k);
      if (f == 0.0) continue;
      for (int j = k; j < n; ++j) a(r, j) -= f * a(pr, j);
      for (int j = 0; j < x.cols(); ++j) x(r, j) -= f * x(pr, j);
    }
  }
  Matrix out(n, x.cols());
  for (int j = 0; j < x.cols(); ++j) {
    for (int i = n - 1; i >= 0; --i) {
      const int r = perm[i];
      double s = x(r, j);
      for (int k = i + 1; k < n; ++k) s -= a(r, k) * out(k, j);
      out(i, j) = s / a(r, i);
    }
  }
  return out;
}

}  // namespace wcsafe
