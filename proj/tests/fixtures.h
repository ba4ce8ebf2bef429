#pragma once

#include <complex>
#include <random>

#include "hmpc/lti_model.h"

namespace hmpc::testing {

inline Matrix mat(std::initializer_list<std::initializer_list<double>> rows) {
  Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.begin()->size()));
  Eigen::Index r = 0;
  for (const auto& row : rows) {
    Eigen::Index c = 0;
    for (double v : row) m(r, c++) = v;
    ++r;
  }
  return m;
}

inline Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

inline InputBox symmetric_box(double bound, int p = 1) {
  return {Vector::Constant(p, -bound), Vector::Constant(p, bound)};
}

/// Sampled double integrator over a CCF actuator, |u| <= 2.
inline CascadeModel sys_a() {
  return CascadeModel(mat({{1, 0.1}, {0, 1}}), mat({{0.005}, {0.1}}), mat({{0, 1}, {-0.08, 0.6}}),
                      mat({{0}, {1}}), mat({{1, 0}}), mat({{0, 1}, {-0.01, 0.2}}),
                      mat({{0}, {0.81}}), symmetric_box(2.0));
}

inline Vector random_vector(std::mt19937_64& rng, Eigen::Index n, double scale = 1.0) {
  std::normal_distribution<double> nd;
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = scale * nd(rng);
  return v;
}

inline Vector random_unit(std::mt19937_64& rng, Eigen::Index n) {
  Vector v;
  do {
    v = random_vector(rng, n);
  } while (v.norm() == 0.0);
  return v.normalized();
}

/// Sum of (A')^k S A^k, truncated.
inline Matrix lyapunov_series(const Matrix& a, const Matrix& s, int terms) {
  Matrix m = Matrix::Zero(a.rows(), a.cols());
  Matrix p = Matrix::Identity(a.rows(), a.cols());
  for (int k = 0; k < terms; ++k) {
    m += p.transpose() * s * p;
    p = a * p;
  }
  return m;
}

/// Peak of sigma_max(C (zI - A)^{-1} B) on a uniform grid of the unit circle.
inline double grid_hinf(const Matrix& a, const Matrix& b, const Matrix& c, int points) {
  const Eigen::Index n = a.rows();
  const Eigen::MatrixXcd ac = a.cast<std::complex<double>>();
  const Eigen::MatrixXcd bc = b.cast<std::complex<double>>();
  const Eigen::MatrixXcd cc = c.cast<std::complex<double>>();
  double peak = 0.0;
  for (int i = 0; i < points; ++i) {
    const double w = M_PI * i / (points - 1);
    const std::complex<double> z = std::polar(1.0, w);
    const Eigen::MatrixXcd res =
        (z * Eigen::MatrixXcd::Identity(n, n) - ac).partialPivLu().solve(bc);
    const Eigen::MatrixXcd g = cc * res;
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(g);
    peak = std::max(peak, svd.singularValues()(0));
  }
  return peak;
}

}  // namespace hmpc::testing
