#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <random>

#include "hmpc/qcqp_solver.h"

namespace hmpc::testing {

/// Random strictly convex QCQP: box lo <= z <= hi on every coordinate plus one
/// ball ||W z + w|| <= r that is feasible by construction.
inline QcqpProblem random_qcqp(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> nd;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  QcqpProblem p;
  Matrix a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = nd(rng);
  p.hessian = a.transpose() * a + 0.1 * Matrix::Identity(n, n);
  p.linear.resize(n);
  for (int i = 0; i < n; ++i) p.linear(i) = 3.0 * nd(rng);

  BoxConstraint box;
  box.name = "box";
  box.s = Matrix::Identity(n, n);
  box.offset = Vector::Zero(n);
  box.lower.resize(n);
  box.upper.resize(n);
  Vector z0(n);
  for (int i = 0; i < n; ++i) {
    box.lower(i) = -0.2 - 1.8 * unit(rng);
    box.upper(i) = 0.2 + 1.8 * unit(rng);
    z0(i) = box.lower(i) + (box.upper(i) - box.lower(i)) * unit(rng);
  }
  p.boxes.push_back(box);

  const int m = 1 + static_cast<int>(unit(rng) * n);
  BallConstraint ball;
  ball.name = "ball";
  ball.w.resize(m, n);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) ball.w(i, j) = nd(rng);
  ball.offset.resize(m);
  for (int i = 0; i < m; ++i) ball.offset(i) = nd(rng);
  ball.radius = (ball.w * z0 + ball.offset).norm() + 0.5 * unit(rng);
  p.balls.push_back(ball);
  return p;
}

/// Exhaustive active-set oracle for problems with one coordinate box and at
/// most one ball. Every box pattern is solved with the ball inactive and,
/// where possible, active (multiplier found by bisection). The minimum over
/// primal-feasible candidates is the optimum.
inline std::optional<double> enumerate_qcqp(const QcqpProblem& p, Vector* argmin = nullptr) {
  const int n = p.size();
  const BoxConstraint& box = p.boxes.at(0);
  const BallConstraint* ball = p.balls.empty() ? nullptr : &p.balls[0];
  const double feas_tol = 1e-9;
  double best = std::numeric_limits<double>::infinity();
  Vector best_z;

  auto consider = [&](const Vector& z) {
    if ((z - box.upper).maxCoeff() > feas_tol || (box.lower - z).maxCoeff() > feas_tol) return;
    if (ball && (ball->w * z + ball->offset).norm() > ball->radius + feas_tol) return;
    const double f = p.objective(z);
    if (f < best) {
      best = f;
      best_z = z;
    }
  };

  int patterns = 1;
  for (int i = 0; i < n; ++i) patterns *= 3;
  for (int code = 0; code < patterns; ++code) {
    Vector z = Vector::Zero(n);
    std::vector<int> free;
    int c = code;
    for (int i = 0; i < n; ++i, c /= 3) {
      if (c % 3 == 0) free.push_back(i);
      else z(i) = c % 3 == 1 ? box.lower(i) : box.upper(i);
    }
    const int k = static_cast<int>(free.size());
    if (k == 0) {
      consider(z);
      continue;
    }
    Matrix pii(k, k), wi;
    Vector gi(k);
    const Vector gz = p.hessian * z + p.linear;
    for (int a = 0; a < k; ++a) {
      gi(a) = gz(free[a]);
      for (int b = 0; b < k; ++b) pii(a, b) = p.hessian(free[a], free[b]);
    }
    auto assemble = [&](const Vector& zi) {
      Vector out = z;
      for (int a = 0; a < k; ++a) out(free[a]) = zi(a);
      return out;
    };
    consider(assemble(pii.ldlt().solve(-gi)));
    if (!ball) continue;

    wi.resize(ball->w.rows(), k);
    for (int a = 0; a < k; ++a) wi.col(a) = ball->w.col(free[a]);
    const Vector wz = ball->w * z + ball->offset;
    auto solve_mu = [&](double mu) {
      return Vector(
          (pii + mu * wi.transpose() * wi).ldlt().solve(-(gi + mu * wi.transpose() * wz)));
    };
    auto gap = [&](double mu) { return (wi * solve_mu(mu) + wz).norm() - ball->radius; };
    if (gap(0.0) <= 0.0) continue;
    double hi = 1.0;
    while (gap(hi) > 0.0 && hi < 1e14) hi *= 2.0;
    if (gap(hi) > 0.0) continue;
    double lo = 0.0;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      (gap(mid) > 0.0 ? lo : hi) = mid;
    }
    consider(assemble(solve_mu(hi)));
  }
  if (!std::isfinite(best)) return std::nullopt;
  if (argmin) *argmin = best_z;
  return best;
}

}  // namespace hmpc::testing
