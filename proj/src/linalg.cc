#include "hmpc/linalg.h"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "hmpc/errors.h"

namespace hmpc {

ComplexVector eigenvalues(const Matrix& a) {
  if (a.size() == 0) return ComplexVector(0);
  Eigen::EigenSolver<Matrix> solver(a, false);
  return solver.eigenvalues();
}

std::complex<double> dominant_eigenvalue(const Matrix& a) {
  const ComplexVector ev = eigenvalues(a);
  std::complex<double> best{0.0, 0.0};
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (std::abs(ev(i)) > std::abs(best)) best = ev(i);
  }
  return best;
}

double spectral_radius(const Matrix& a) { return std::abs(dominant_eigenvalue(a)); }

double spectral_norm(const Matrix& a) {
  if (a.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(a);
  return svd.singularValues()(0);
}

double min_eigenvalue_sym(const Matrix& s) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(symmetrize(s), Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

double max_eigenvalue_sym(const Matrix& s) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(symmetrize(s), Eigen::EigenvaluesOnly);
  return solver.eigenvalues().maxCoeff();
}

Matrix symmetrize(const Matrix& s) { return 0.5 * (s + s.transpose()); }

bool is_zero_row(const Matrix& m, Eigen::Index i) {
  if (m.cols() == 0) return true;
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  return m.row(i).cwiseAbs().maxCoeff() < 1e-12 * scale;
}

Eigen::Index numerical_rank(const Matrix& m, double tol) {
  if (m.size() == 0) return 0;
  Eigen::JacobiSVD<Matrix> svd(m);
  const auto& sv = svd.singularValues();
  const double cutoff = tol * std::max(1.0, sv(0));
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > cutoff) ++rank;
  }
  return rank;
}

double sum_power_norms(const Matrix& a, const Matrix& b, int n) {
  double total = 0.0;
  Matrix power_b = b;
  for (int j = 0; j < n; ++j) {
    total += spectral_norm(power_b);
    power_b = a * power_b;
  }
  return total;
}

DoublingResult riccati_doubling(const Matrix& a, const Matrix& g, const Matrix& h,
                                int max_iterations, double tol) {
  const Eigen::Index n = a.rows();
  const Matrix eye = Matrix::Identity(n, n);
  Matrix ak = a;
  Matrix gk = symmetrize(g);
  Matrix hk = symmetrize(h);
  DoublingResult result;
  for (int k = 0; k < max_iterations; ++k) {
    Eigen::PartialPivLU<Matrix> lu(eye + gk * hk);
    if (!std::isfinite(lu.rcond()) || lu.rcond() < 1e-14) {
      result.breakdown = true;
      result.x = hk;
      result.iterations = k;
      return result;
    }
    const Matrix w_a = lu.solve(ak);       // (I + G H)^{-1} A
    const Matrix w_g = lu.solve(gk);       // (I + G H)^{-1} G
    const Matrix a_next = ak * w_a;
    const Matrix g_next = symmetrize(gk + ak * w_g * ak.transpose());
    const Matrix h_next = symmetrize(hk + ak.transpose() * hk * w_a);
    const double step = (h_next - hk).norm();
    if (!h_next.allFinite()) {
      result.breakdown = true;
      result.x = hk;
      result.iterations = k + 1;
      return result;
    }
    // The plain recursion is monotone nondecreasing from X_0 = 0; a decrease
    // signals that an intermediate (I + G X_j) lost definiteness.
    if (n > 0 && min_eigenvalue_sym(h_next - hk) < -1e-9 * std::max(1.0, hk.norm())) {
      result.breakdown = true;
      result.x = h_next;
      result.iterations = k + 1;
      return result;
    }
    ak = a_next;
    gk = g_next;
    hk = h_next;
    result.iterations = k + 1;
    if (step <= tol * std::max(1.0, hk.norm())) {
      result.converged = true;
      break;
    }
    if (hk.norm() > 1e14) {
      result.breakdown = true;
      break;
    }
  }
  result.x = hk;
  return result;
}

namespace {

Matrix dare_map(const Matrix& a, const Matrix& b, const Matrix& q, const Matrix& r,
                const Matrix& x) {
  const Matrix bx = b.transpose() * x;
  const Matrix gain = (r + bx * b).ldlt().solve(bx * a);
  return symmetrize(a.transpose() * x * a - a.transpose() * x * b * gain + q);
}

}  // namespace

double dare_residual(const Matrix& a, const Matrix& b, const Matrix& q, const Matrix& r,
                     const Matrix& x) {
  return (dare_map(a, b, q, r, x) - x).norm() / std::max(1.0, x.norm());
}

Matrix solve_dare(const Matrix& a, const Matrix& b, const Matrix& q, const Matrix& r) {
  const Matrix g = b * r.ldlt().solve(b.transpose());
  DoublingResult res = riccati_doubling(a, g, q);
  if (!res.converged) {
    throw CertificationError("discrete Riccati doubling did not converge");
  }
  // A few plain fixed-point sweeps polish the doubling output.
  Matrix x = res.x;
  for (int i = 0; i < 50 && dare_residual(a, b, q, r, x) > 1e-12; ++i) {
    x = dare_map(a, b, q, r, x);
  }
  return x;
}

Matrix lqr_gain(const Matrix& a, const Matrix& b, const Matrix& q, const Matrix& r) {
  const Matrix x = solve_dare(a, b, q, r);
  const Matrix bx = b.transpose() * x;
  return (r + bx * b).ldlt().solve(bx * a);
}

Matrix place_poles(const Matrix& a, const Matrix& b, const ComplexVector& poles) {
  const Eigen::Index n = a.rows();
  if (b.cols() != 1) throw ParameterError("place_poles: single-input pairs only");
  if (poles.size() != n) throw ParameterError("place_poles: need one pole per state");
  // Characteristic polynomial coefficients of prod (z - p_i), highest first.
  Eigen::VectorXcd coeffs = Eigen::VectorXcd::Zero(n + 1);
  coeffs(0) = 1.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j >= 1; --j) coeffs(j) -= poles(i) * coeffs(j - 1);
  }
  Matrix phi = Matrix::Zero(n, n);
  Matrix power = Matrix::Identity(n, n);
  for (Eigen::Index j = n; j >= 0; --j) {
    phi += coeffs(j).real() * power;
    power = power * a;
  }
  Matrix ctrb(n, n);
  Matrix col = b;
  for (Eigen::Index j = 0; j < n; ++j) {
    ctrb.col(j) = col;
    col = a * col;
  }
  Eigen::FullPivLU<Matrix> lu(ctrb);
  if (!lu.isInvertible()) throw ParameterError("place_poles: pair is not controllable");
  Matrix last = Matrix::Zero(1, n);
  last(0, n - 1) = 1.0;
  return last * lu.inverse() * phi;
}

}  // namespace hmpc
