#pragma once

// Small dense linear algebra. Feature dimensions in this library are in the
// tens, so everything is row-major std::vector storage with O(n^3) routines.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fairflow/error.hpp"

namespace fairflow {

using Vector = std::vector<double>;
using ConstVecView = std::span<const double>;

inline bool all_finite(ConstVecView v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

inline double dot(ConstVecView a, ConstVecView b) {
  require_same_dim(a.size(), b.size(), "dot");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm2(ConstVecView a) { return std::sqrt(dot(a, a)); }

inline Vector subtract(ConstVecView a, ConstVecView b) {
  require_same_dim(a.size(), b.size(), "subtract");
  Vector out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
  return out;
}

inline Vector add(ConstVecView a, ConstVecView b) {
  require_same_dim(a.size(), b.size(), "add");
  Vector out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
  return out;
}

inline Vector scaled(ConstVecView a, double s) {
  Vector out(a.begin(), a.end());
  for (double& x : out) x *= s;
  return out;
}

// y += s * x
inline void axpy(double s, ConstVecView x, std::span<double> y) {
  require_same_dim(x.size(), y.size(), "axpy");
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += s * x[i];
}

inline double max_abs(ConstVecView a) {
  double m = 0.0;
  for (double x : a) m = std::max(m, std::abs(x));
  return m;
}

class Matrix {
 public:
  Matrix() = default;

  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  Matrix(std::size_t rows, std::size_t cols, std::vector<double> row_major)
      : rows_(rows), cols_(cols), data_(std::move(row_major)) {
    if (data_.size() != rows_ * cols_) {
      throw DimensionError("Matrix: " + std::to_string(rows_) + "x" + std::to_string(cols_) +
                           " needs " + std::to_string(rows_ * cols_) + " entries, got " +
                           std::to_string(data_.size()));
    }
    if (!all_finite(data_)) throw InvalidArgument("Matrix: non-finite entry");
  }

  Matrix(std::initializer_list<std::initializer_list<double>> rows) {
    rows_ = rows.size();
    cols_ = rows_ == 0 ? 0 : rows.begin()->size();
    data_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
      if (r.size() != cols_) throw DimensionError("Matrix: ragged initializer");
      data_.insert(data_.end(), r.begin(), r.end());
    }
  }

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  static Matrix diagonal(ConstVecView d) {
    Matrix m(d.size(), d.size());
    for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
    return m;
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool is_square() const noexcept { return rows_ == cols_; }
  const std::vector<double>& data() const noexcept { return data_; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  ConstVecView row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  Matrix transposed() const {
    Matrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
  }

  double trace() const {
    double s = 0.0;
    for (std::size_t i = 0; i < std::min(rows_, cols_); ++i) s += (*this)(i, i);
    return s;
  }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

inline Vector matvec(const Matrix& m, ConstVecView v) {
  require_same_dim(m.cols(), v.size(), "matvec");
  Vector out(m.rows(), 0.0);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < m.cols(); ++j) s += m(i, j) * v[j];
    out[i] = s;
  }
  return out;
}

// m^T v without materializing the transpose.
inline Vector matvec_transposed(const Matrix& m, ConstVecView v) {
  require_same_dim(m.rows(), v.size(), "matvec_transposed");
  Vector out(m.cols(), 0.0);
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) out[j] += m(i, j) * v[i];
  return out;
}

inline Matrix matmul(const Matrix& a, const Matrix& b) {
  require_same_dim(a.cols(), b.rows(), "matmul");
  Matrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      for (std::size_t j = 0; j < b.cols(); ++j) out(i, j) += aik * b(k, j);
    }
  return out;
}

inline Matrix operator+(const Matrix& a, const Matrix& b) {
  require_same_dim(a.rows(), b.rows(), "matrix add");
  require_same_dim(a.cols(), b.cols(), "matrix add");
  Matrix out = a;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) out(i, j) += b(i, j);
  return out;
}

inline Matrix operator-(const Matrix& a, const Matrix& b) {
  require_same_dim(a.rows(), b.rows(), "matrix subtract");
  require_same_dim(a.cols(), b.cols(), "matrix subtract");
  Matrix out = a;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) out(i, j) -= b(i, j);
  return out;
}

inline Matrix operator*(double s, const Matrix& a) {
  Matrix out = a;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) out(i, j) *= s;
  return out;
}

inline double max_abs_diff(const Matrix& a, const Matrix& b) {
  require_same_dim(a.rows(), b.rows(), "max_abs_diff");
  require_same_dim(a.cols(), b.cols(), "max_abs_diff");
  double m = 0.0;
  for (std::size_t i = 0; i < a.data().size(); ++i)
    m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
  return m;
}

/// v^T M v.
inline double quadratic_form(const Matrix& m, ConstVecView v) {
  if (!m.is_square()) throw DimensionError("quadratic_form: matrix is not square");
  require_same_dim(m.cols(), v.size(), "quadratic_form");
  double s = 0.0;
  for (std::size_t i = 0; i < m.rows(); ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < m.cols(); ++j) row += m(i, j) * v[j];
    s += v[i] * row;
  }
  return s;
}

inline constexpr double kDefaultRankTol = 1e-8;

/// Orthonormal basis of span(vectors) by modified Gram-Schmidt with a second
/// re-orthogonalization pass. A vector whose residual after projecting out the
/// basis built so far has norm below rank_tol is dropped.
inline std::vector<Vector> orthonormal_basis(const std::vector<Vector>& vectors,
                                             double rank_tol = kDefaultRankTol) {
  if (!(rank_tol > 0.0)) throw InvalidArgument("orthonormal_basis: rank_tol must be > 0");
  std::vector<Vector> basis;
  if (vectors.empty()) return basis;
  const std::size_t dim = vectors.front().size();
  for (const Vector& v : vectors) {
    require_same_dim(v.size(), dim, "orthonormal_basis");
    Vector r = v;
    for (int pass = 0; pass < 2; ++pass) {
      for (const Vector& q : basis) axpy(-dot(q, r), q, r);
    }
    const double nr = norm2(r);
    if (nr < rank_tol) continue;
    for (double& x : r) x /= nr;
    basis.push_back(std::move(r));
  }
  return basis;
}

/// I - sum_k q_k q_k^T for an orthonormal basis {q_k}.
inline Matrix projector_orthogonal_to(const std::vector<Vector>& basis, std::size_t dim) {
  Matrix p = Matrix::identity(dim);
  for (const Vector& q : basis) {
    require_same_dim(q.size(), dim, "projector_orthogonal_to");
    if (std::abs(norm2(q) - 1.0) > 1e-8) {
      throw InvalidArgument("projector_orthogonal_to: basis vector is not unit length");
    }
    for (std::size_t i = 0; i < dim; ++i)
      for (std::size_t j = 0; j < dim; ++j) p(i, j) -= q[i] * q[j];
  }
  for (std::size_t i = 0; i < basis.size(); ++i)
    for (std::size_t j = 0; j < i; ++j)
      if (std::abs(dot(basis[i], basis[j])) > 1e-8) {
        throw InvalidArgument("projector_orthogonal_to: basis is not orthogonal");
      }
  return p;
}

struct SymmetricEigen {
  Vector values;   // ascending
  Matrix vectors;  // column k is the eigenvector of values[k]
};

/// Cyclic Jacobi eigensolver for small symmetric matrices.
inline SymmetricEigen symmetric_eigen(const Matrix& m) {
  if (!m.is_square()) throw DimensionError("symmetric_eigen: matrix is not square");
  const std::size_t n = m.rows();
  Matrix a = m;
  Matrix v = Matrix::identity(n);
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) off += a(i, j) * a(i, j);
    if (off < 1e-30) break;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        if (a(p, q) == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](auto x, auto y) { return a(x, x) < a(y, y); });
  SymmetricEigen out{Vector(n), Matrix(n, n)};
  for (std::size_t k = 0; k < n; ++k) {
    out.values[k] = a(order[k], order[k]);
    for (std::size_t i = 0; i < n; ++i) out.vectors(i, k) = v(i, order[k]);
  }
  return out;
}

/// Spectral norm of a symmetric matrix (largest |eigenvalue|).
inline double spectral_norm_symmetric(const Matrix& m) {
  const auto eig = symmetric_eigen(m);
  double s = 0.0;
  for (double x : eig.values) s = std::max(s, std::abs(x));
  return s;
}

/// (M + M^T)/2 with eigenvalues below zero raised to zero.
inline Matrix psd_floor(const Matrix& m) {
  if (!m.is_square()) throw DimensionError("psd_floor: matrix is not square");
  const Matrix sym = 0.5 * (m + m.transposed());
  const auto eig = symmetric_eigen(sym);
  const std::size_t n = sym.rows();
  Matrix out(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    const double lam = std::max(eig.values[k], 0.0);
    if (lam == 0.0) continue;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        out(i, j) += lam * eig.vectors(i, k) * eig.vectors(j, k);
  }
  return 0.5 * (out + out.transposed());
}

}  // namespace fairflow
