#include "hmpc/certificates.h"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

#include "hmpc/errors.h"

namespace hmpc {
namespace {

constexpr int kMaxGammaDoublings = 60;
constexpr int kMaxRiccatiIterations = 10000;

Matrix stack_channels(const std::vector<Channel>& channels, Eigen::Index rows) {
  Eigen::Index cols = 0;
  for (const auto& ch : channels) cols += ch.e.cols();
  Matrix e(rows, cols);
  Eigen::Index offset = 0;
  for (const auto& ch : channels) {
    e.middleCols(offset, ch.e.cols()) = ch.e;
    offset += ch.e.cols();
  }
  return e;
}

Matrix dissipation_block(const DissipationCertificate& cert, const Matrix& acl,
                         const std::vector<Channel>& channels) {
  const Eigen::Index n = acl.rows();
  const Matrix e = stack_channels(channels, n);
  const Eigen::Index w = e.cols();
  Matrix gamma = Matrix::Zero(w, w);
  Eigen::Index offset = 0;
  for (std::size_t i = 0; i < channels.size(); ++i) {
    const Eigen::Index k = channels[i].e.cols();
    gamma.block(offset, offset, k, k).diagonal().setConstant(cert.gains.at(i).gamma_bar);
    offset += k;
  }
  const Matrix& m = cert.m;
  Matrix block(n + w, n + w);
  block.topLeftCorner(n, n) = (1.0 - cert.alpha) * m - acl.transpose() * m * acl;
  block.topRightCorner(n, w) = -acl.transpose() * m * e;
  block.bottomLeftCorner(w, n) = block.topRightCorner(n, w).transpose();
  block.bottomRightCorner(w, w) = gamma - e.transpose() * m * e;
  return symmetrize(block);
}

// Markov parameters C A^k B for k < n vanish iff the transfer is identically zero.
bool zero_transfer(const Matrix& a, const Matrix& b, const Matrix& c) {
  const double na = std::max(1.0, spectral_norm(a));
  const double scale = std::max(1.0, spectral_norm(b)) * std::max(1.0, spectral_norm(c));
  Matrix power_b = b;
  double growth = 1.0;
  for (Eigen::Index k = 0; k < std::max<Eigen::Index>(1, a.rows()); ++k) {
    if (spectral_norm(c * power_b) > 1e-12 * scale * growth) return false;
    power_b = a * power_b;
    growth *= na;
  }
  return true;
}

Matrix bounded_real_block(const Matrix& a, const Matrix& b, const Matrix& c, const Matrix& x,
                          double gamma) {
  const Eigen::Index n = a.rows();
  const Eigen::Index m = b.cols();
  Matrix block(n + m, n + m);
  block.topLeftCorner(n, n) = a.transpose() * x * a - x + c.transpose() * c;
  block.topRightCorner(n, m) = a.transpose() * x * b;
  block.bottomLeftCorner(m, n) = block.topRightCorner(n, m).transpose();
  block.bottomRightCorner(m, m) =
      b.transpose() * x * b - gamma * gamma * Matrix::Identity(m, m);
  return symmetrize(block);
}

bool bounded_real_holds(const Matrix& a, const Matrix& b, const Matrix& c, const Matrix& x,
                        double gamma) {
  if (min_eigenvalue_sym(x) < -kPsdTolerance * std::max(1.0, x.norm())) return false;
  const double top = max_eigenvalue_sym(bounded_real_block(a, b, c, x, gamma));
  return top <= kPsdTolerance * std::max(1.0, x.norm());
}

struct GammaTest {
  bool feasible = false;
  Matrix x;
};

GammaTest test_gamma(const Matrix& a, const Matrix& b, const Matrix& c, double gamma) {
  GammaTest out;
  const Eigen::Index n = a.rows();
  const Matrix g = -(b * b.transpose()) / (gamma * gamma);
  const Matrix h = c.transpose() * c;
  const DoublingResult res = riccati_doubling(a, g, h, kMaxRiccatiIterations);
  if (!res.converged || res.breakdown) return out;
  const Matrix& x = res.x;
  const Matrix margin =
      gamma * gamma * Matrix::Identity(b.cols(), b.cols()) - b.transpose() * x * b;
  if (min_eigenvalue_sym(margin) <= 0.0) return out;
  // Only the stabilizing solution certifies the gain.
  const Matrix closed = (Matrix::Identity(n, n) + g * x).partialPivLu().solve(a);
  if (spectral_radius(closed) >= 1.0) return out;
  if (!bounded_real_holds(a, b, c, x, gamma)) return out;
  out.feasible = true;
  out.x = x;
  return out;
}

}  // namespace

double DissipationCertificate::gamma_bar(const std::string& channel) const {
  for (const auto& g : gains) {
    if (g.name == channel) return g.gamma_bar;
  }
  throw std::out_of_range("certificate has no channel " + channel);
}

Matrix solve_discrete_lyapunov(const Matrix& acl, const Matrix& s) {
  const Eigen::Index n = acl.rows();
  const auto dominant = dominant_eigenvalue(acl);
  if (std::abs(dominant) >= 1.0) {
    throw InstabilityError(dominant, "Lyapunov equation needs a Schur-stable matrix");
  }
  // (I - A' (x) A') vec(M) = vec(S), column-major vec.
  const Matrix at = acl.transpose();
  Matrix kron(n * n, n * n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) kron.block(i * n, j * n, n, n) = at(i, j) * at;
  }
  const Matrix lhs = Matrix::Identity(n * n, n * n) - kron;
  const Vector rhs = Eigen::Map<const Vector>(s.data(), n * n);
  const Vector sol = lhs.partialPivLu().solve(rhs);
  Matrix m = symmetrize(Eigen::Map<const Matrix>(sol.data(), n, n));
  return m;
}

DissipationCertificate compute_dissipation(const Matrix& acl, const std::vector<Channel>& channels,
                                           const Matrix& m, double theta) {
  if (!(theta > 0.0 && theta < 1.0)) throw ParameterError("theta must lie in (0,1)");
  const Matrix s = symmetrize(m - acl.transpose() * m * acl);
  const double s_min = min_eigenvalue_sym(s);
  if (s_min <= 0.0) {
    throw CertificationError("storage matrix does not decrease along Acl");
  }
  DissipationCertificate cert;
  cert.m = symmetrize(m);
  cert.lambda_min = min_eigenvalue_sym(cert.m);
  cert.lambda_max = max_eigenvalue_sym(cert.m);
  cert.alpha = theta * s_min / cert.lambda_max;
  for (const auto& ch : channels) {
    const double direct = spectral_norm(ch.e.transpose() * cert.m * ch.e);
    const double cross = spectral_norm(acl.transpose() * cert.m * ch.e);
    cert.gains.push_back({ch.name, direct + cross * cross / ((1.0 - theta) * s_min)});
  }
  for (int i = 0; i <= kMaxGammaDoublings; ++i) {
    if (verify_dissipation(cert, acl, channels)) return cert;
    for (auto& g : cert.gains) g.gamma_bar *= 2.0;
  }
  throw CertificationError("dissipation PSD test failed after gamma enlargement");
}

double dissipation_margin(const DissipationCertificate& cert, const Matrix& acl,
                          const std::vector<Channel>& channels) {
  return min_eigenvalue_sym(dissipation_block(cert, acl, channels));
}

bool verify_dissipation(const DissipationCertificate& cert, const Matrix& acl,
                        const std::vector<Channel>& channels) {
  if (cert.gains.size() != channels.size()) return false;
  if (!(cert.alpha > 0.0 && cert.alpha < 1.0)) return false;
  return dissipation_margin(cert, acl, channels) >= -kPsdTolerance;
}

GainEstimate l2_gain(const Matrix& acl, const Matrix& bin, const Matrix& cout, double tol,
                     std::string input, std::string output) {
  const auto dominant = dominant_eigenvalue(acl);
  if (std::abs(dominant) >= 1.0) {
    throw InstabilityError(dominant, "l2 gain needs a Schur-stable matrix");
  }
  GainEstimate est;
  est.input = std::move(input);
  est.output = std::move(output);
  if (zero_transfer(acl, bin, cout)) {
    // Observability Gramian certifies gamma = 0 when every Markov parameter vanishes.
    const Matrix ctc = cout.transpose() * cout;
    est.witness = solve_discrete_lyapunov(acl, ctc);
    est.witness_gamma = 0.0;
    est.gamma = 0.0;
    est.certified = bounded_real_holds(acl, bin, cout, est.witness, 0.0);
    if (!est.certified) throw CertificationError("zero-transfer witness failed");
    return est;
  }

  double hi = std::max(tol, spectral_norm(cout) * spectral_norm(bin));
  GammaTest best = test_gamma(acl, bin, cout, hi);
  for (int i = 0; i < 200 && !best.feasible; ++i) {
    hi *= 2.0;
    best = test_gamma(acl, bin, cout, hi);
  }
  if (!best.feasible) {
    throw CertificationError("bounded-real test never certified an upper gain bound");
  }
  double lo = 0.0;
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    GammaTest t = test_gamma(acl, bin, cout, mid);
    if (t.feasible) {
      hi = mid;
      best = std::move(t);
    } else {
      lo = mid;
    }
  }
  est.gamma = hi;
  est.witness = best.x;
  est.witness_gamma = hi;
  est.certified = true;
  return est;
}

bool recheck_gain(const GainEstimate& g, const Matrix& acl, const Matrix& bin,
                  const Matrix& cout) {
  if (!g.certified || g.witness_gamma > g.gamma) return false;
  return bounded_real_holds(acl, bin, cout, g.witness, g.witness_gamma);
}

bool small_gain_check(const GainEstimate& g1, const GainEstimate& g2) {
  return g1.gamma * g2.gamma < 1.0;
}

}  // namespace hmpc
