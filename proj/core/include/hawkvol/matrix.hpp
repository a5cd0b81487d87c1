#pragma once

#include <cstddef>
#include <initializer_list>
#include <vector>

namespace hawkvol {

/// Dense row-major matrix of doubles. Sized for small problems (d <= ~16);
/// everything is by value, no expression templates.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), a_(rows * cols, fill) {}
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix identity(std::size_t d);
  static Matrix zero(std::size_t rows, std::size_t cols) { return Matrix(rows, cols); }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool square() const { return rows_ == cols_ && rows_ > 0; }
  bool empty() const { return a_.empty(); }

  double& operator()(std::size_t i, std::size_t j) { return a_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return a_[i * cols_ + j]; }

  const std::vector<double>& data() const { return a_; }
  std::vector<double>& data() { return a_; }

  Matrix transpose() const;
  Matrix block(std::size_t i0, std::size_t j0, std::size_t nr, std::size_t nc) const;
  void set_block(std::size_t i0, std::size_t j0, const Matrix& b);

  /// Largest |a_ij|; the norm used by all tolerance checks in this library.
  double max_abs() const;
  bool all_finite() const;
  bool nonnegative(double tol = 0.0) const;

  Matrix& operator+=(const Matrix& o);
  Matrix& operator-=(const Matrix& o);
  Matrix& operator*=(double s);

 private:
  std::size_t rows_ = 0, cols_ = 0;
  std::vector<double> a_;
};

Matrix operator+(Matrix a, const Matrix& b);
Matrix operator-(Matrix a, const Matrix& b);
Matrix operator*(const Matrix& a, const Matrix& b);
Matrix operator*(double s, Matrix a);
Matrix operator*(Matrix a, double s);

std::vector<double> operator*(const Matrix& a, const std::vector<double>& x);

/// acc += a * b without allocating a temporary (hot path of the Volterra loops)
void add_prod(Matrix& acc, const Matrix& a, const Matrix& b);

/// Solves A x = b by LU with partial pivoting. Throws on (numerically) singular A.
std::vector<double> lu_solve(const Matrix& A, const std::vector<double>& b);
Matrix lu_solve(const Matrix& A, const Matrix& B);
Matrix lu_inverse(const Matrix& A);
double lu_determinant(const Matrix& A);

}  // namespace hawkvol
