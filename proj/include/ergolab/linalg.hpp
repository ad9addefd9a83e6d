#pragma once

// Small dense linear algebra used throughout: the matrices here are d x d or
// (d+1) x d for sphere dimension d (typically 2 or 3) and a few hundred square
// at most (Galerkin blocks). Decompositions are written out directly with
// fixed sweep orders so results are bit-reproducible across runs and thread
// counts; no external solver is linked.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <vector>

#include "ergolab/common.hpp"

namespace ergolab {

using Vec = std::vector<double>;

inline double dot(const Vec& a, const Vec& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm2(const Vec& a) { return std::sqrt(dot(a, a)); }

inline Vec& axpy(double alpha, const Vec& x, Vec& y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
  return y;
}

inline Vec scaled(const Vec& x, double alpha) {
  Vec y(x);
  for (double& v : y) v *= alpha;
  return y;
}

inline Vec normalized(const Vec& x) {
  double n = norm2(x);
  return scaled(x, 1.0 / n);
}

class Matrix {
public:
  Matrix() = default;
  Matrix(int rows, int cols) : rows_(rows), cols_(cols), a_(static_cast<std::size_t>(rows) * cols, 0.0) {}

  static Matrix identity(int n) {
    Matrix m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }

  double& operator()(int i, int j) { return a_[static_cast<std::size_t>(i) * cols_ + j]; }
  double operator()(int i, int j) const { return a_[static_cast<std::size_t>(i) * cols_ + j]; }

  Vec col(int j) const {
    Vec c(rows_);
    for (int i = 0; i < rows_; ++i) c[i] = (*this)(i, j);
    return c;
  }
  void set_col(int j, const Vec& c) {
    for (int i = 0; i < rows_; ++i) (*this)(i, j) = c[i];
  }

  Matrix transposed() const {
    Matrix t(cols_, rows_);
    for (int i = 0; i < rows_; ++i)
      for (int j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
  }

  friend Matrix operator*(const Matrix& a, const Matrix& b) {
    Matrix c(a.rows_, b.cols_);
    for (int i = 0; i < a.rows_; ++i)
      for (int k = 0; k < a.cols_; ++k) {
        double aik = a(i, k);
        if (aik == 0.0) continue;
        for (int j = 0; j < b.cols_; ++j) c(i, j) += aik * b(k, j);
      }
    return c;
  }

  friend Vec operator*(const Matrix& a, const Vec& x) {
    Vec y(a.rows_, 0.0);
    for (int i = 0; i < a.rows_; ++i) {
      double s = 0;
      for (int j = 0; j < a.cols_; ++j) s += a(i, j) * x[j];
      y[i] = s;
    }
    return y;
  }

  Matrix operator-(const Matrix& o) const {
    Matrix c(rows_, cols_);
    for (std::size_t i = 0; i < a_.size(); ++i) c.a_[i] = a_[i] - o.a_[i];
    return c;
  }

  double frobenius() const {
    double s = 0;
    for (double v : a_) s += v * v;
    return std::sqrt(s);
  }

  double max_abs() const {
    double s = 0;
    for (double v : a_) s = std::max(s, std::abs(v));
    return s;
  }

  void scale(double alpha) {
    for (double& v : a_) v *= alpha;
  }

private:
  int rows_ = 0, cols_ = 0;
  Vec a_;
};

// y^T x for matrix columns.
inline double col_dot(const Matrix& m, int p, int q) {
  double s = 0;
  for (int i = 0; i < m.rows(); ++i) s += m(i, p) * m(i, q);
  return s;
}

// --- QR (modified Gram-Schmidt with re-orthogonalization) -------------------

struct Qr {
  Matrix q; // m x n, orthonormal columns
  Matrix r; // n x n, upper triangular, non-negative diagonal
};

inline Qr qr_mgs(const Matrix& a) {
  const int m = a.rows(), n = a.cols();
  Qr res{a, Matrix(n, n)};
  for (int j = 0; j < n; ++j) {
    // two orthogonalization passes against previous columns
    for (int pass = 0; pass < 2; ++pass) {
      for (int k = 0; k < j; ++k) {
        double c = col_dot(res.q, k, j);
        res.r(k, j) += c;
        for (int i = 0; i < m; ++i) res.q(i, j) -= c * res.q(i, k);
      }
    }
    double nrm = 0;
    for (int i = 0; i < m; ++i) nrm += res.q(i, j) * res.q(i, j);
    nrm = std::sqrt(nrm);
    res.r(j, j) = nrm;
    if (nrm < 1e-300)
      throw NumericalBreakdown("QR column norm underflow at column " + std::to_string(j));
    double inv = 1.0 / nrm;
    for (int i = 0; i < m; ++i) res.q(i, j) *= inv;
  }
  return res;
}

// --- one-sided Jacobi SVD ----------------------------------------------------

struct Svd {
  Matrix u;        // m x n (thin)
  Vec sigma;       // n, descending
  Matrix v;        // n x n
};

namespace detail {

// Complete the orthonormal columns of q (m x k, k < m) by coordinate seeds.
inline Vec orthonormal_complement_seed(const Matrix& q, int k) {
  const int m = q.rows();
  for (int seed = 0; seed < m; ++seed) {
    Vec w(m, 0.0);
    w[seed] = 1.0;
    for (int pass = 0; pass < 2; ++pass)
      for (int j = 0; j < k; ++j) {
        double c = 0;
        for (int i = 0; i < m; ++i) c += q(i, j) * w[i];
        for (int i = 0; i < m; ++i) w[i] -= c * q(i, j);
      }
    double n = norm2(w);
    if (n > 0.1) return scaled(w, 1.0 / n);
  }
  throw NumericalBreakdown("orthonormal completion failed");
}

} // namespace detail

inline Svd jacobi_svd(Matrix a) {
  const int m = a.rows(), n = a.cols();
  if (m < n) throw NumericalBreakdown("jacobi_svd expects rows >= cols");
  Matrix v = Matrix::identity(n);
  const int max_sweeps = 64;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    bool rotated = false;
    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        double app = col_dot(a, p, p);
        double aqq = col_dot(a, q, q);
        double apq = col_dot(a, p, q);
        if (std::abs(apq) <= 1e-18 * std::sqrt(app * aqq) + 1e-300) continue;
        rotated = true;
        double zeta = (aqq - app) / (2.0 * apq);
        double t = (zeta >= 0 ? 1.0 : -1.0) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        double c = 1.0 / std::sqrt(1.0 + t * t);
        double s = c * t;
        for (int i = 0; i < m; ++i) {
          double aip = a(i, p), aiq = a(i, q);
          a(i, p) = c * aip - s * aiq;
          a(i, q) = s * aip + c * aiq;
        }
        for (int i = 0; i < n; ++i) {
          double vip = v(i, p), viq = v(i, q);
          v(i, p) = c * vip - s * viq;
          v(i, q) = s * vip + c * viq;
        }
      }
    }
    if (!rotated) break;
  }
  Svd out{Matrix(m, n), Vec(n), Matrix(n, n)};
  std::vector<int> order(n);
  Vec nrm(n);
  for (int j = 0; j < n; ++j) nrm[j] = std::sqrt(col_dot(a, j, j));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int i, int j) { return nrm[i] > nrm[j]; });
  for (int jj = 0; jj < n; ++jj) {
    int j = order[jj];
    out.sigma[jj] = nrm[j];
    for (int i = 0; i < n; ++i) out.v(i, jj) = v(i, j);
    if (nrm[j] > 1e-300) {
      double inv = 1.0 / nrm[j];
      for (int i = 0; i < m; ++i) out.u(i, jj) = a(i, j) * inv;
    } else {
      Vec w = detail::orthonormal_complement_seed(out.u, jj);
      out.u.set_col(jj, w);
    }
  }
  return out;
}

inline Vec singular_values(const Matrix& a) {
  if (a.rows() >= a.cols()) return jacobi_svd(a).sigma;
  return jacobi_svd(a.transposed()).sigma;
}

// --- LU with partial pivoting ------------------------------------------------

struct Lu {
  Matrix lu;
  std::vector<int> piv;
  double det_sign = 1.0;
};

inline Lu lu_decompose(Matrix a) {
  const int n = a.rows();
  Lu f{Matrix(), std::vector<int>(n), 1.0};
  for (int i = 0; i < n; ++i) f.piv[i] = i;
  for (int k = 0; k < n; ++k) {
    int p = k;
    double best = std::abs(a(k, k));
    for (int i = k + 1; i < n; ++i)
      if (std::abs(a(i, k)) > best) {
        best = std::abs(a(i, k));
        p = i;
      }
    if (p != k) {
      for (int j = 0; j < n; ++j) std::swap(a(k, j), a(p, j));
      std::swap(f.piv[k], f.piv[p]);
      f.det_sign = -f.det_sign;
    }
    if (a(k, k) == 0.0) continue; // singular; det() == 0, solve() will throw
    for (int i = k + 1; i < n; ++i) {
      a(i, k) /= a(k, k);
      double lik = a(i, k);
      for (int j = k + 1; j < n; ++j) a(i, j) -= lik * a(k, j);
    }
  }
  f.lu = std::move(a);
  return f;
}

inline double lu_det(const Lu& f) {
  double d = f.det_sign;
  for (int i = 0; i < f.lu.rows(); ++i) d *= f.lu(i, i);
  return d;
}

inline Vec lu_solve(const Lu& f, const Vec& b) {
  const int n = f.lu.rows();
  Vec x(n);
  for (int i = 0; i < n; ++i) x[i] = b[f.piv[i]];
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < i; ++j) x[i] -= f.lu(i, j) * x[j];
  for (int i = n - 1; i >= 0; --i) {
    for (int j = i + 1; j < n; ++j) x[i] -= f.lu(i, j) * x[j];
    if (std::abs(f.lu(i, i)) < 1e-300) throw SingularMap("LU solve: zero pivot");
    x[i] /= f.lu(i, i);
  }
  return x;
}

inline double det(const Matrix& a) { return lu_det(lu_decompose(a)); }

inline Vec solve(const Matrix& a, const Vec& b) { return lu_solve(lu_decompose(a), b); }

// Orthonormal basis of the complement of the span of the columns of q.
inline Matrix orthonormal_complement(const Matrix& q) {
  const int m = q.rows(), k = q.cols();
  Matrix out(m, m - k);
  Matrix work(m, m);
  for (int j = 0; j < k; ++j) work.set_col(j, q.col(j));
  int have = k;
  for (int j = 0; j < m - k; ++j) {
    Matrix cur(m, have);
    for (int c = 0; c < have; ++c) cur.set_col(c, work.col(c));
    Vec w = detail::orthonormal_complement_seed(cur, have);
    work.set_col(have, w);
    out.set_col(j, w);
    ++have;
  }
  return out;
}

// Completes a unit vector u in R^n to an orthonormal basis; returns the n-1
// columns orthogonal to u (deterministic coordinate-seeded Gram-Schmidt).
inline Matrix unit_complement(const Vec& u) {
  Matrix q(static_cast<int>(u.size()), 1);
  q.set_col(0, u);
  return orthonormal_complement(q);
}

} // namespace ergolab
