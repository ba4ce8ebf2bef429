#include "hmpc/lti_model.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "hmpc/errors.h"

namespace hmpc {
namespace {

constexpr double kZeroClashDistance = 1e-9;

void require_shape(const std::string& name, const Matrix& m, Eigen::Index rows,
                   Eigen::Index cols) {
  if (m.rows() != rows || m.cols() != cols) {
    std::ostringstream os;
    os << "expected " << rows << "x" << cols << ", got " << m.rows() << "x" << m.cols();
    throw StructuralError(name, os.str());
  }
}

std::string format_complex(std::complex<double> z) {
  std::ostringstream os;
  os.precision(12);
  os << z.real();
  if (z.imag() != 0.0) os << (z.imag() < 0 ? "-" : "+") << std::abs(z.imag()) << "i";
  return os.str();
}

bool entries_equal(double a, double b, double scale) {
  return std::abs(a - b) <= 1e-12 * scale;
}

double matrix_scale(const Matrix& m) {
  return m.size() == 0 ? 1.0 : std::max(1.0, m.cwiseAbs().maxCoeff());
}

// A shift row of a block-CCF pair carries a single unit entry on the
// superdiagonal and a zero input row.
bool is_shift_row(const Matrix& a, Eigen::Index i) {
  const double scale = matrix_scale(a);
  if (i + 1 >= a.cols()) return false;
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    const double expected = (j == i + 1) ? 1.0 : 0.0;
    if (!entries_equal(a(i, j), expected, scale)) return false;
  }
  return true;
}

AssumptionCheck make_check(int id, std::string name) {
  AssumptionCheck c;
  c.id = id;
  c.name = std::move(name);
  c.passed = true;
  return c;
}

AssumptionCheck check_stabilizable(const CascadeModel& m) {
  auto check = make_check(1, "(A1,B1) stabilizable");
  const ComplexVector ev = eigenvalues(m.a1());
  const Eigen::Index n = m.n1();
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (std::abs(ev(i)) < 1.0) continue;
    Eigen::MatrixXcd pbh(n, n + m.b1().cols());
    pbh.leftCols(n) = ev(i) * Eigen::MatrixXcd::Identity(n, n) - m.a1().cast<std::complex<double>>();
    pbh.rightCols(m.b1().cols()) = m.b1().cast<std::complex<double>>();
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(pbh);
    const auto& sv = svd.singularValues();
    if (sv.size() < n || sv(n - 1) <= 1e-10 * std::max(1.0, sv(0))) {
      check.passed = false;
      check.eigenvalue = ev(i);
      check.witness = "uncontrollable eigenvalue " + format_complex(ev(i));
      return check;
    }
  }
  return check;
}

AssumptionCheck check_controllable(const CascadeModel& m) {
  auto check = make_check(2, "(A2,B2) controllable");
  const Eigen::Index n = m.n2();
  Matrix ctrb(n, n * m.p());
  Matrix block = m.b2();
  for (Eigen::Index j = 0; j < n; ++j) {
    ctrb.middleCols(j * m.p(), m.p()) = block;
    block = m.a2() * block;
  }
  const Eigen::Index rank = numerical_rank(ctrb);
  if (rank < n) {
    check.passed = false;
    check.witness = "controllability matrix rank " + std::to_string(rank) + " < " +
                    std::to_string(n);
  }
  return check;
}

AssumptionCheck check_block_ccf(const CascadeModel& m) {
  auto check = make_check(3, "(A2,B2) in block controllable canonical form");
  for (Eigen::Index i = 0; i < m.n2(); ++i) {
    if (!is_zero_row(m.b2(), i)) continue;
    if (!is_shift_row(m.a2(), i)) {
      check.passed = false;
      check.row = static_cast<int>(i + 1);
      check.witness = "row " + std::to_string(i + 1) +
                      " has a zero B2 row but is not a superdiagonal shift row";
      return check;
    }
  }
  return check;
}

AssumptionCheck check_reference_stable(const CascadeModel& m) {
  auto check = make_check(4, "reference model stable");
  const auto dominant = dominant_eigenvalue(m.af());
  if (std::abs(dominant) >= 1.0) {
    check.passed = false;
    check.eigenvalue = dominant;
    check.witness = "eigenvalue " + format_complex(dominant) + " of Af has modulus >= 1";
  }
  return check;
}

AssumptionCheck check_zero_pole_clash(const CascadeModel& m) {
  auto check = make_check(5, "reference zeros avoid unstable poles of A1");
  const ComplexVector zeros = transmission_zeros(m.af(), m.bf(), m.c());
  const ComplexVector poles = eigenvalues(m.a1());
  for (Eigen::Index i = 0; i < poles.size(); ++i) {
    if (std::abs(poles(i)) < 1.0) continue;
    for (Eigen::Index j = 0; j < zeros.size(); ++j) {
      if (std::abs(poles(i) - zeros(j)) < kZeroClashDistance) {
        check.passed = false;
        check.eigenvalue = poles(i);
        check.witness = "reference zero " + format_complex(zeros(j)) +
                        " coincides with unstable pole " + format_complex(poles(i));
        return check;
      }
    }
  }
  return check;
}

AssumptionCheck check_shared_ccf(const CascadeModel& m) {
  auto check = make_check(6, "Af shares the block-CCF shift rows of A2");
  const double scale = std::max(matrix_scale(m.a2()), matrix_scale(m.af()));
  for (Eigen::Index i = 0; i < m.n2(); ++i) {
    if (!is_zero_row(m.b2(), i)) continue;
    for (Eigen::Index j = 0; j < m.n2(); ++j) {
      if (!entries_equal(m.a2()(i, j), m.af()(i, j), scale)) {
        check.passed = false;
        check.row = static_cast<int>(i + 1);
        check.witness = "shift row " + std::to_string(i + 1) + " of Af differs from A2";
        return check;
      }
    }
  }
  return check;
}

AssumptionCheck check_row_inclusion(const CascadeModel& m) {
  auto check = make_check(7, "nonzero rows of Bf are nonzero rows of B2");
  for (Eigen::Index i = 0; i < m.n2(); ++i) {
    if (!is_zero_row(m.bf(), i) && is_zero_row(m.b2(), i)) {
      check.passed = false;
      check.row = static_cast<int>(i + 1);
      check.witness = "row " + std::to_string(i + 1) + " of Bf is nonzero but B2 row is zero";
      return check;
    }
  }
  return check;
}

AssumptionCheck check_origin_interior(const CascadeModel& m) {
  auto check = make_check(8, "u = 0 interior to U");
  const InputBox& box = m.input_box();
  for (Eigen::Index i = 0; i < box.lower.size(); ++i) {
    if (!(box.lower(i) < 0.0 && 0.0 < box.upper(i))) {
      check.passed = false;
      check.row = static_cast<int>(i + 1);
      check.witness = "input coordinate " + std::to_string(i + 1) +
                      " bounds do not straddle zero";
      return check;
    }
  }
  return check;
}

}  // namespace

bool InputBox::contains(const Vector& u, double tol) const {
  return ((u - lower).array() >= -tol).all() && ((upper - u).array() >= -tol).all();
}

double InputBox::inscribed_radius() const {
  double r = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < lower.size(); ++i) {
    r = std::min({r, -lower(i), upper(i)});
  }
  return r;
}

Vector InputBox::clamp(const Vector& u) const { return u.cwiseMax(lower).cwiseMin(upper); }

CascadeModel::CascadeModel(Matrix a1, Matrix b1, Matrix a2, Matrix b2, Matrix c, Matrix af,
                           Matrix bf, InputBox input_box)
    : a1_(std::move(a1)),
      b1_(std::move(b1)),
      a2_(std::move(a2)),
      b2_(std::move(b2)),
      c_(std::move(c)),
      af_(std::move(af)),
      bf_(std::move(bf)),
      box_(std::move(input_box)) {
  const Eigen::Index n1 = a1_.rows();
  const Eigen::Index n2 = a2_.rows();
  const Eigen::Index p = b2_.cols();
  const Eigen::Index q = c_.rows();
  if (n1 == 0) throw StructuralError("A1", "plant must have at least one state");
  if (n2 == 0) throw StructuralError("A2", "actuator must have at least one state");
  if (p == 0) throw StructuralError("B2", "actuator must have at least one input");
  if (q == 0) throw StructuralError("C", "virtual control must have at least one channel");
  require_shape("A1", a1_, n1, n1);
  require_shape("B1", b1_, n1, q);
  require_shape("A2", a2_, n2, n2);
  require_shape("B2", b2_, n2, p);
  require_shape("C", c_, q, n2);
  require_shape("Af", af_, n2, n2);
  require_shape("Bf", bf_, n2, q);
  if (p < q) throw StructuralError("B2", "needs at least as many inputs as virtual controls");
  if (box_.lower.size() != p || box_.upper.size() != p) {
    throw StructuralError("U", "bounds must have one entry per input");
  }
}

CascadeModel CascadeModel::with_reference(Matrix af, Matrix bf) const {
  return CascadeModel(a1_, b1_, a2_, b2_, c_, std::move(af), std::move(bf), box_);
}

CascadeModel CascadeModel::with_input_box(InputBox box) const {
  return CascadeModel(a1_, b1_, a2_, b2_, c_, af_, bf_, std::move(box));
}

Vector AugmentedOuterModel::step(const Vector& x1aug, const Vector& vtilde,
                                 const Vector& vdes) const {
  return a1aug * x1aug + b1aug * vtilde + bfaug * vdes;
}

StateBundle StateBundle::zero(const CascadeModel& m) {
  return {Vector::Zero(m.n1()), Vector::Zero(m.n2()), Vector::Zero(m.n2())};
}

Vector StateBundle::x1aug() const {
  Vector out(x1.size() + xf.size());
  out << x1, xf;
  return out;
}

bool AssumptionReport::all_passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.passed; });
}

const AssumptionCheck& AssumptionReport::check(int id) const {
  for (const auto& c : checks) {
    if (c.id == id) return c;
  }
  throw std::out_of_range("no assumption check with id " + std::to_string(id));
}

const AssumptionCheck* AssumptionReport::first_failure(std::initializer_list<int> ids) const {
  for (int id : ids) {
    const auto& c = check(id);
    if (!c.passed) return &c;
  }
  return nullptr;
}

AssumptionReport validate_assumptions(const CascadeModel& m) {
  AssumptionReport report;
  report.checks = {check_stabilizable(m),     check_controllable(m),
                   check_block_ccf(m),        check_reference_stable(m),
                   check_zero_pole_clash(m),  check_shared_ccf(m),
                   check_row_inclusion(m),    check_origin_interior(m)};
  return report;
}

AugmentedOuterModel augment(const CascadeModel& m) {
  const int n1 = m.n1();
  const int n2 = m.n2();
  const int q = m.q();
  AugmentedOuterModel aug;
  aug.a1aug = Matrix::Zero(n1 + n2, n1 + n2);
  aug.a1aug.topLeftCorner(n1, n1) = m.a1();
  aug.a1aug.topRightCorner(n1, n2) = m.b1() * m.c();
  aug.a1aug.bottomRightCorner(n2, n2) = m.af();
  aug.b1aug = Matrix::Zero(n1 + n2, q);
  aug.b1aug.topRows(n1) = m.b1();
  aug.bfaug = Matrix::Zero(n1 + n2, q);
  aug.bfaug.bottomRows(n2) = m.bf();
  return aug;
}

StateBundle step_true(const CascadeModel& m, const StateBundle& s, const Vector& u,
                      const Vector& vdes) {
  StateBundle next;
  next.x1 = m.a1() * s.x1 + m.b1() * (m.c() * s.x2);
  next.x2 = m.a2() * s.x2 + m.b2() * u;
  next.xf = m.af() * s.xf + m.bf() * vdes;
  return next;
}

Vector error_step(const CascadeModel& m, const Vector& xtilde, const Vector& xf,
                  const Vector& u, const Vector& vdes) {
  return m.a2() * xtilde + (m.a2() - m.af()) * xf + m.b2() * u - m.bf() * vdes;
}

ComplexVector transmission_zeros(const Matrix& a, const Matrix& b, const Matrix& c) {
  const Eigen::Index n = a.rows();
  const Eigen::Index m = b.cols();
  Matrix pencil = Matrix::Zero(n + m, n + m);
  pencil.topLeftCorner(n, n) = a;
  pencil.topRightCorner(n, m) = b;
  pencil.bottomLeftCorner(m, n) = -c;
  Matrix e = Matrix::Zero(n + m, n + m);
  e.topLeftCorner(n, n).setIdentity();
  Eigen::GeneralizedEigenSolver<Matrix> solver(pencil, e, false);
  const auto alphas = solver.alphas();
  const auto betas = solver.betas();
  const double scale = std::max(1.0, pencil.cwiseAbs().maxCoeff());
  std::vector<std::complex<double>> finite;
  for (Eigen::Index i = 0; i < betas.size(); ++i) {
    if (std::abs(betas(i)) > 1e-10 * std::max(scale, std::abs(alphas(i)))) {
      finite.push_back(alphas(i) / betas(i));
    }
  }
  ComplexVector out(static_cast<Eigen::Index>(finite.size()));
  for (std::size_t i = 0; i < finite.size(); ++i) out(static_cast<Eigen::Index>(i)) = finite[i];
  return out;
}

std::vector<int> full_rows(const Matrix& b) {
  std::vector<int> rows;
  for (Eigen::Index i = 0; i < b.rows(); ++i) {
    if (!is_zero_row(b, i)) rows.push_back(static_cast<int>(i));
  }
  return rows;
}

}  // namespace hmpc
