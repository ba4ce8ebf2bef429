#pragma once

#include <complex>

#include <Eigen/Dense>

namespace hmpc {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using ComplexVector = Eigen::VectorXcd;

/// Uniform tolerance for every semidefinite test in the toolkit.
inline constexpr double kPsdTolerance = 1e-9;

ComplexVector eigenvalues(const Matrix& a);

/// Eigenvalue of largest modulus; zero for an empty matrix.
std::complex<double> dominant_eigenvalue(const Matrix& a);
double spectral_radius(const Matrix& a);

/// Induced 2-norm (largest singular value); zero for empty matrices.
double spectral_norm(const Matrix& a);

double min_eigenvalue_sym(const Matrix& s);
double max_eigenvalue_sym(const Matrix& s);

Matrix symmetrize(const Matrix& s);

/// True when the largest entry of row `i` is below 1e-12 times the matrix
/// scale (largest entry, floored at 1).
bool is_zero_row(const Matrix& m, Eigen::Index i);

/// Numerical rank from singular values against tol * max(1, sigma_max).
Eigen::Index numerical_rank(const Matrix& m, double tol = 1e-10);

/// sum_{j=0}^{n-1} || A^j B ||_2
double sum_power_norms(const Matrix& a, const Matrix& b, int n);

/// Result of the structure-preserving doubling iteration for
///   X = A' X (I + G X)^{-1} A + H.
struct DoublingResult {
  Matrix x;
  int iterations = 0;
  bool converged = false;
  /// Set when (I + G X_k) became singular or the iterate lost monotonicity.
  bool breakdown = false;
};

/// Doubling iteration for the symmetric Riccati fixed point above. Each
/// doubling step advances the plain fixed-point recursion X_{j+1} = F(X_j),
/// X_0 = 0, from index 2^k to 2^{k+1}.
DoublingResult riccati_doubling(const Matrix& a, const Matrix& g, const Matrix& h,
                                int max_iterations = 10000, double tol = 1e-13);

/// Stabilizing solution of X = A'XA - A'XB(R + B'XB)^{-1}B'XA + Q.
Matrix solve_dare(const Matrix& a, const Matrix& b, const Matrix& q, const Matrix& r);

/// Residual ||F(X) - X|| / max(1, ||X||) of the LQR Riccati map.
double dare_residual(const Matrix& a, const Matrix& b, const Matrix& q, const Matrix& r,
                     const Matrix& x);

/// LQR gain K = (R + B'XB)^{-1} B'XA so that A - BK is Schur.
Matrix lqr_gain(const Matrix& a, const Matrix& b, const Matrix& q, const Matrix& r);

/// Ackermann pole placement for a single-input pair; complex poles must come
/// in conjugate pairs.
Matrix place_poles(const Matrix& a, const Matrix& b, const ComplexVector& poles);

}  // namespace hmpc
