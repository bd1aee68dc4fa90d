/**
 * @file linalg.hpp
 * @brief Small dense linear algebra kernels for dimensions up to ~16.
 *
 * Everything here is deterministic: Jacobi sweeps run in a fixed cyclic
 * order, eigenvector signs are normalized, and ties are broken
 * lexicographically, so identical inputs give bit-identical outputs.
 */

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace jgeom {

/// Raised for every contract violation in the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Vector = std::vector<double>;

// ---------------------------------------------------------------------------
// Vector helpers

inline double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw Error("dimension mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

inline Vector operator+(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) throw Error("dimension mismatch");
  Vector r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
  return r;
}

inline Vector operator-(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) throw Error("dimension mismatch");
  Vector r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
  return r;
}

inline Vector operator-(const Vector& a) {
  Vector r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = -a[i];
  return r;
}

inline Vector operator*(double s, const Vector& a) {
  Vector r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = s * a[i];
  return r;
}

/// y += s * x
inline void axpy(double s, std::span<const double> x, std::span<double> y) {
  if (x.size() != y.size()) throw Error("dimension mismatch");
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += s * x[i];
}

inline Vector unit_vector(std::size_t dim, std::size_t index) {
  Vector v(dim, 0.0);
  v.at(index) = 1.0;
  return v;
}

inline double max_abs(std::span<const double> a) {
  double m = 0.0;
  for (double x : a) m = std::max(m, std::abs(x));
  return m;
}

inline bool all_finite(std::span<const double> a) {
  return std::all_of(a.begin(), a.end(), [](double x) { return std::isfinite(x); });
}

// ---------------------------------------------------------------------------
// Matrix

/// Dense row-major matrix.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {
    if (!std::isfinite(fill)) throw Error("matrix entries must be finite");
  }
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> entries)
      : rows_(rows), cols_(cols), data_(std::move(entries)) {
    if (data_.size() != rows_ * cols_) throw Error("matrix entry count does not match shape");
    if (!all_finite(data_)) throw Error("matrix entries must be finite");
  }

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  static Matrix diagonal(std::span<const double> d) {
    Matrix m(d.size(), d.size());
    for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
    return m;
  }

  /// Builds a matrix whose columns are the given vectors.
  static Matrix from_columns(const std::vector<Vector>& columns, std::size_t rows) {
    Matrix m(rows, columns.size());
    for (std::size_t j = 0; j < columns.size(); ++j) {
      if (columns[j].size() != rows) throw Error("dimension mismatch");
      for (std::size_t i = 0; i < rows; ++i) m(i, j) = columns[j][i];
    }
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  const std::vector<double>& entries() const { return data_; }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  Vector column(std::size_t j) const {
    Vector v(rows_);
    for (std::size_t i = 0; i < rows_; ++i) v[i] = (*this)(i, j);
    return v;
  }

  Vector row(std::size_t i) const {
    return Vector(data_.begin() + static_cast<std::ptrdiff_t>(i * cols_),
                  data_.begin() + static_cast<std::ptrdiff_t>((i + 1) * cols_));
  }

  std::vector<Vector> columns() const {
    std::vector<Vector> out;
    out.reserve(cols_);
    for (std::size_t j = 0; j < cols_; ++j) out.push_back(column(j));
    return out;
  }

  Matrix transpose() const {
    Matrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
  }

  double frobenius_norm() const { return norm(data_); }

  friend Matrix operator*(const Matrix& a, const Matrix& b) {
    if (a.cols_ != b.rows_) throw Error("dimension mismatch");
    Matrix c(a.rows_, b.cols_);
    for (std::size_t i = 0; i < a.rows_; ++i)
      for (std::size_t k = 0; k < a.cols_; ++k) {
        const double aik = a(i, k);
        if (aik == 0.0) continue;
        for (std::size_t j = 0; j < b.cols_; ++j) c(i, j) += aik * b(k, j);
      }
    return c;
  }

  friend Vector operator*(const Matrix& a, std::span<const double> x) {
    if (a.cols_ != x.size()) throw Error("dimension mismatch");
    Vector y(a.rows_, 0.0);
    for (std::size_t i = 0; i < a.rows_; ++i)
      for (std::size_t j = 0; j < a.cols_; ++j) y[i] += a(i, j) * x[j];
    return y;
  }

  friend Matrix operator+(const Matrix& a, const Matrix& b) {
    if (a.rows_ != b.rows_ || a.cols_ != b.cols_) throw Error("dimension mismatch");
    Matrix c = a;
    for (std::size_t i = 0; i < c.data_.size(); ++i) c.data_[i] += b.data_[i];
    return c;
  }

  friend Matrix operator-(const Matrix& a, const Matrix& b) {
    if (a.rows_ != b.rows_ || a.cols_ != b.cols_) throw Error("dimension mismatch");
    Matrix c = a;
    for (std::size_t i = 0; i < c.data_.size(); ++i) c.data_[i] -= b.data_[i];
    return c;
  }

  friend Matrix operator*(double s, const Matrix& a) {
    Matrix c = a;
    for (double& x : c.data_) x *= s;
    return c;
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// ---------------------------------------------------------------------------
// Orthonormal bases

/// Orthonormal columns spanning a subspace of R^ambient_dim.
struct OrthonormalBasis {
  std::size_t ambient_dim = 0;
  std::vector<Vector> columns;

  std::size_t dim() const { return columns.size(); }
  Matrix as_matrix() const { return Matrix::from_columns(columns, ambient_dim); }

  /// Largest deviation of the Gram matrix from the identity.
  double orthonormality_defect() const {
    double worst = 0.0;
    for (std::size_t i = 0; i < columns.size(); ++i)
      for (std::size_t j = i; j < columns.size(); ++j) {
        const double target = (i == j) ? 1.0 : 0.0;
        worst = std::max(worst, std::abs(dot(columns[i], columns[j]) - target));
      }
    return worst;
  }
};

inline constexpr double kDefaultOrthoTol = 1e-10;

namespace detail {

// Makes the first entry with |x| > 1e-12 positive.
inline void fix_sign(Vector& v) {
  for (double x : v) {
    if (std::abs(x) > 1e-12) {
      if (x < 0) for (double& y : v) y = -y;
      return;
    }
  }
}

// Two passes of modified Gram-Schmidt of v against the given orthonormal set.
inline void project_out(Vector& v, const std::vector<Vector>& basis) {
  for (int pass = 0; pass < 2; ++pass)
    for (const auto& q : basis) axpy(-dot(q, v), q, v);
}

}  // namespace detail

/**
 * Gram-Schmidt with re-orthogonalization. A vector whose residual after
 * projection is below `tol` times its original length is treated as
 * linearly dependent and dropped, so the output dimension is the numerical
 * rank of the input.
 */
inline OrthonormalBasis orthonormalize(const std::vector<Vector>& vectors,
                                       double tol = kDefaultOrthoTol) {
  if (vectors.empty()) throw Error("empty span");
  if (!(tol > 0)) throw Error("orthonormalize: tol must be positive");
  const std::size_t d = vectors.front().size();
  OrthonormalBasis out{d, {}};
  for (const auto& v : vectors) {
    if (v.size() != d) throw Error("dimension mismatch");
    if (!all_finite(v)) throw Error("non-finite vector");
    const double len = norm(v);
    if (len == 0.0) continue;
    Vector r = v;
    detail::project_out(r, out.columns);
    const double rn = norm(r);
    if (rn <= tol * len) continue;
    for (double& x : r) x /= rn;
    out.columns.push_back(std::move(r));
  }
  if (out.columns.empty()) throw Error("zero subspace");
  return out;
}

// ---------------------------------------------------------------------------
// Symmetric eigendecomposition (cyclic Jacobi)

struct SymEigen {
  std::vector<double> values;  // descending
  OrthonormalBasis vectors;    // vectors.columns[i] pairs with values[i]
};

inline SymEigen sym_eigen(const Matrix& s) {
  const std::size_t n = s.rows();
  if (s.cols() != n) throw Error("sym_eigen: matrix must be square");
  if (!all_finite(s.entries())) throw Error("sym_eigen: non-finite entries");
  const double scale = s.frobenius_norm();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (std::abs(s(i, j) - s(j, i)) > 1e-12 * scale)
        throw Error("sym_eigen: matrix is not symmetric");

  Matrix a = s;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) a(i, j) = a(j, i) = 0.5 * (s(i, j) + s(j, i));
  Matrix v = Matrix::identity(n);

  const double threshold = 1e-14 * scale;
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off = std::max(off, std::abs(a(p, q)));
    if (off <= threshold) break;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = std::copysign(1.0, theta) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double sn = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - sn * akq;
          a(k, q) = sn * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - sn * aqk;
          a(q, k) = sn * apk + c * aqk;
        }
        a(p, q) = a(q, p) = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - sn * vkq;
          v(k, q) = sn * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<std::pair<double, Vector>> pairs;
  pairs.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Vector col = v.column(i);
    detail::fix_sign(col);
    pairs.emplace_back(a(i, i), std::move(col));
  }
  // Eigenvalues closer than this are treated as tied.
  const double tie = 1e-12 * std::max(scale, 1e-300);
  std::sort(pairs.begin(), pairs.end(), [](const auto& x, const auto& y) {
    return x.first > y.first;
  });
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i + 1;
    while (j < n && pairs[j - 1].first - pairs[j].first <= tie) ++j;
    std::sort(pairs.begin() + static_cast<std::ptrdiff_t>(i),
              pairs.begin() + static_cast<std::ptrdiff_t>(j),
              [](const auto& x, const auto& y) { return x.second > y.second; });
    i = j;
  }

  SymEigen out;
  out.vectors.ambient_dim = n;
  for (auto& [value, vec] : pairs) {
    out.values.push_back(value);
    out.vectors.columns.push_back(std::move(vec));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Thin SVD

struct ThinSvd {
  OrthonormalBasis left;                // rows x k
  std::vector<double> singular_values;  // descending, k = min(rows, cols)
  OrthonormalBasis right;               // cols x k
};

namespace detail {

// Completes `basis` with standard basis vectors until it holds `target` columns.
inline void complete_basis(std::vector<Vector>& basis, std::size_t dim, std::size_t target) {
  for (std::size_t e = 0; e < dim && basis.size() < target; ++e) {
    Vector c = unit_vector(dim, e);
    project_out(c, basis);
    const double cn = norm(c);
    if (cn > 0.5) {
      for (double& x : c) x /= cn;
      basis.push_back(std::move(c));
    }
  }
}

inline ThinSvd svd_tall(const Matrix& m) {
  const std::size_t r = m.rows(), c = m.cols();
  const SymEigen eig = sym_eigen(m.transpose() * m);
  // sigma_i = |M v_i| keeps absolute accuracy for small singular values,
  // which sqrt(lambda_i) would not.
  std::vector<std::pair<double, Vector>> sv;
  for (const auto& vcol : eig.vectors.columns) sv.emplace_back(norm(m * vcol), vcol);
  std::stable_sort(sv.begin(), sv.end(),
                   [](const auto& x, const auto& y) { return x.first > y.first; });

  ThinSvd out;
  out.left.ambient_dim = r;
  out.right.ambient_dim = c;
  const double smax = sv.empty() ? 0.0 : sv.front().first;
  std::vector<Vector> left;
  for (auto& [sigma, vcol] : sv) {
    out.singular_values.push_back(sigma);
    out.right.columns.push_back(vcol);
    if (sigma > 1e-300 && sigma > 1e-13 * smax) {
      Vector u = m * vcol;
      for (double& x : u) x /= sigma;
      project_out(u, left);
      const double un = norm(u);
      if (un > 0.5) {
        for (double& x : u) x /= un;
        left.push_back(std::move(u));
        continue;
      }
    }
    // Direction undetermined by M; fill deterministically below.
    left.push_back(Vector{});
  }
  // Replace placeholders with a deterministic completion.
  std::vector<Vector> fixed;
  for (const auto& u : left)
    if (!u.empty()) fixed.push_back(u);
  std::vector<Vector> extra = fixed;
  complete_basis(extra, r, c);
  std::size_t next = fixed.size();
  for (auto& u : left)
    if (u.empty()) u = extra.at(next++);
  out.left.columns = std::move(left);
  return out;
}

}  // namespace detail

/// Thin SVD through the Gram matrix: M = left * diag(sigma) * right^T.
inline ThinSvd svd_thin(const Matrix& m) {
  if (!all_finite(m.entries())) throw Error("svd_thin: non-finite entries");
  if (m.rows() >= m.cols()) return detail::svd_tall(m);
  ThinSvd t = detail::svd_tall(m.transpose());
  std::swap(t.left, t.right);
  return t;
}

// ---------------------------------------------------------------------------
// Square solves

/// LU with partial pivoting; returns the determinant and (optionally) the inverse.
inline double determinant(Matrix a) {
  const std::size_t n = a.rows();
  if (a.cols() != n) throw Error("determinant: matrix must be square");
  double det = 1.0;
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    for (std::size_t i = k + 1; i < n; ++i)
      if (std::abs(a(i, k)) > std::abs(a(piv, k))) piv = i;
    if (a(piv, k) == 0.0) return 0.0;
    if (piv != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(a(k, j), a(piv, j));
      det = -det;
    }
    det *= a(k, k);
    for (std::size_t i = k + 1; i < n; ++i) {
      const double f = a(i, k) / a(k, k);
      for (std::size_t j = k; j < n; ++j) a(i, j) -= f * a(k, j);
    }
  }
  return det;
}

inline Matrix inverse(const Matrix& m) {
  const std::size_t n = m.rows();
  if (m.cols() != n) throw Error("inverse: matrix must be square");
  Matrix a = m;
  Matrix inv = Matrix::identity(n);
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    for (std::size_t i = k + 1; i < n; ++i)
      if (std::abs(a(i, k)) > std::abs(a(piv, k))) piv = i;
    if (std::abs(a(piv, k)) < 1e-300) throw Error("inverse: singular matrix");
    for (std::size_t j = 0; j < n; ++j) {
      std::swap(a(k, j), a(piv, j));
      std::swap(inv(k, j), inv(piv, j));
    }
    const double d = a(k, k);
    for (std::size_t j = 0; j < n; ++j) {
      a(k, j) /= d;
      inv(k, j) /= d;
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (i == k) continue;
      const double f = a(i, k);
      if (f == 0.0) continue;
      for (std::size_t j = 0; j < n; ++j) {
        a(i, j) -= f * a(k, j);
        inv(i, j) -= f * inv(k, j);
      }
    }
  }
  return inv;
}

}  // namespace jgeom
