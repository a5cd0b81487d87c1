#include "hawkvol/matrix.hpp"

#include <cmath>
#include <stdexcept>

namespace hawkvol {

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
  rows_ = rows.size();
  cols_ = rows_ ? rows.begin()->size() : 0;
  a_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw std::invalid_argument("Matrix: ragged initializer");
    a_.insert(a_.end(), r.begin(), r.end());
  }
}

Matrix Matrix::identity(std::size_t d) {
  Matrix m(d, d);
  for (std::size_t i = 0; i < d; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::transpose() const {
  Matrix t(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

Matrix Matrix::block(std::size_t i0, std::size_t j0, std::size_t nr, std::size_t nc) const {
  Matrix b(nr, nc);
  for (std::size_t i = 0; i < nr; ++i)
    for (std::size_t j = 0; j < nc; ++j) b(i, j) = (*this)(i0 + i, j0 + j);
  return b;
}

void Matrix::set_block(std::size_t i0, std::size_t j0, const Matrix& b) {
  for (std::size_t i = 0; i < b.rows(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j) (*this)(i0 + i, j0 + j) = b(i, j);
}

double Matrix::max_abs() const {
  double m = 0.0;
  for (double v : a_) m = std::max(m, std::abs(v));
  return m;
}

bool Matrix::all_finite() const {
  for (double v : a_)
    if (!std::isfinite(v)) return false;
  return true;
}

bool Matrix::nonnegative(double tol) const {
  for (double v : a_)
    if (v < -tol) return false;
  return true;
}

Matrix& Matrix::operator+=(const Matrix& o) {
  if (rows_ != o.rows_ || cols_ != o.cols_) throw std::invalid_argument("Matrix +=: shape mismatch");
  for (std::size_t i = 0; i < a_.size(); ++i) a_[i] += o.a_[i];
  return *this;
}

Matrix& Matrix::operator-=(const Matrix& o) {
  if (rows_ != o.rows_ || cols_ != o.cols_) throw std::invalid_argument("Matrix -=: shape mismatch");
  for (std::size_t i = 0; i < a_.size(); ++i) a_[i] -= o.a_[i];
  return *this;
}

Matrix& Matrix::operator*=(double s) {
  for (double& v : a_) v *= s;
  return *this;
}

Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }

Matrix operator*(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) throw std::invalid_argument("Matrix *: shape mismatch");
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
    }
  return c;
}

Matrix operator*(double s, Matrix a) { return a *= s; }
Matrix operator*(Matrix a, double s) { return a *= s; }

void add_prod(Matrix& acc, const Matrix& a, const Matrix& b) {
  const std::size_t n = a.rows(), m = a.cols(), p = b.cols();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < m; ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < p; ++j) acc(i, j) += aik * b(k, j);
    }
}

std::vector<double> operator*(const Matrix& a, const std::vector<double>& x) {
  if (a.cols() != x.size()) throw std::invalid_argument("Matrix * vector: shape mismatch");
  std::vector<double> y(a.rows(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) y[i] += a(i, j) * x[j];
  return y;
}

namespace {

// LU with partial pivoting; returns false on singular.
bool lu_factor(Matrix& A, std::vector<std::size_t>& piv, int& sign) {
  const std::size_t n = A.rows();
  piv.resize(n);
  sign = 1;
  for (std::size_t i = 0; i < n; ++i) piv[i] = i;
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t p = k;
    double best = std::abs(A(k, k));
    for (std::size_t i = k + 1; i < n; ++i) {
      if (std::abs(A(i, k)) > best) {
        best = std::abs(A(i, k));
        p = i;
      }
    }
    if (best == 0.0 || !std::isfinite(best)) return false;
    if (p != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(A(k, j), A(p, j));
      std::swap(piv[k], piv[p]);
      sign = -sign;
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      A(i, k) /= A(k, k);
      const double lik = A(i, k);
      if (lik == 0.0) continue;
      for (std::size_t j = k + 1; j < n; ++j) A(i, j) -= lik * A(k, j);
    }
  }
  return true;
}

}  // namespace

Matrix lu_solve(const Matrix& A, const Matrix& B) {
  if (!A.square() || A.rows() != B.rows()) throw std::invalid_argument("lu_solve: shape mismatch");
  Matrix LU = A;
  std::vector<std::size_t> piv;
  int sign;
  if (!lu_factor(LU, piv, sign)) throw std::runtime_error("lu_solve: singular matrix");
  const std::size_t n = A.rows(), m = B.cols();
  Matrix X(n, m);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) X(i, j) = B(piv[i], j);
  // forward then backward substitution
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = k + 1; i < n; ++i)
      for (std::size_t j = 0; j < m; ++j) X(i, j) -= LU(i, k) * X(k, j);
  for (std::size_t kk = n; kk-- > 0;) {
    for (std::size_t j = 0; j < m; ++j) X(kk, j) /= LU(kk, kk);
    for (std::size_t i = 0; i < kk; ++i)
      for (std::size_t j = 0; j < m; ++j) X(i, j) -= LU(i, kk) * X(kk, j);
  }
  return X;
}

std::vector<double> lu_solve(const Matrix& A, const std::vector<double>& b) {
  Matrix B(b.size(), 1);
  for (std::size_t i = 0; i < b.size(); ++i) B(i, 0) = b[i];
  Matrix X = lu_solve(A, B);
  std::vector<double> x(b.size());
  for (std::size_t i = 0; i < b.size(); ++i) x[i] = X(i, 0);
  return x;
}

Matrix lu_inverse(const Matrix& A) { return lu_solve(A, Matrix::identity(A.rows())); }

double lu_determinant(const Matrix& A) {
  if (!A.square()) throw std::invalid_argument("lu_determinant: non-square");
  Matrix LU = A;
  std::vector<std::size_t> piv;
  int sign;
  if (!lu_factor(LU, piv, sign)) return 0.0;
  double det = sign;
  for (std::size_t i = 0; i < A.rows(); ++i) det *= LU(i, i);
  return det;
}

}  // namespace hawkvol
