#pragma once

#include <cstddef>
#include <string>

#include "hawkvol/matrix.hpp"

namespace hawkvol {

/// Spectral radius of a square nonnegative matrix by shifted power iteration,
/// restarted from every basis vector so reducible matrices are covered.
/// Throws std::invalid_argument on non-square or negative input.
double spectral_radius(const Matrix& A, double tol = 1e-10);

struct SchurResult {
  Matrix Q;  // orthogonal
  Matrix U;  // quasi-upper-triangular, A = Q U Q^T
};

/// Real Schur decomposition by Hessenberg reduction plus shifted QR, intended
/// for d <= 8. When A is nonnegative, the 1x1 blocks whose eigenvalue equals
/// the spectral radius are moved to the leading position (stable order).
/// Throws NumericalError if the QR iteration fails to converge.
SchurResult real_schur(const Matrix& A, double tol = 1e-10);

/// Inverse of [[A11, A12], [A21, A22]] assembled from the block formula built
/// on the Schur complement A11 - A12 A22^{-1} A21. Throws on singular blocks
/// or when the assembled residual exceeds 1e-10 * scale.
Matrix block_inverse_2x2(const Matrix& A11, const Matrix& A12, const Matrix& A21,
                         const Matrix& A22);

/// Structure (K, ell, Q, U, lambda_plus): K nonnegative with spectral radius 1
/// whose eigenvalue 1 (multiplicity ell) is carried by the leading block of
/// the ordered Schur form, with U_II = Id and U_JI = 0 after cleanup.
struct AdmissibleStructure {
  Matrix K;
  std::size_t ell = 0;
  Matrix Q;
  Matrix U;
  double lambda_plus = 0.0;

  std::size_t dim() const { return K.rows(); }
};

/// Computes the structure from K, or throws:
///  - std::invalid_argument if K is not nonnegative or rho(K) is not within
///    tol of 1;
///  - NumericalError if eigenvalue 1 is defective (no orthogonal Q can bring
///    U_II to the identity).
AdmissibleStructure build_admissible(const Matrix& K, double tol = 1e-8,
                                     double lambda_plus = 0.0);

/// Verifies a user-supplied structure against the type invariants; returns a
/// human-readable failure description, empty when all checks pass.
std::string verify_admissible(const AdmissibleStructure& s, double tol = 1e-8);

}  // namespace hawkvol
