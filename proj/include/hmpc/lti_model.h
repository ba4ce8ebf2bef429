#pragma once

#include <complex>
#include <optional>
#include <string>
#include <vector>

#include "hmpc/linalg.h"

namespace hmpc {

/// Axis-aligned input box {u : lower <= u <= upper}.
struct InputBox {
  Vector lower;
  Vector upper;

  bool contains(const Vector& u, double tol = 0.0) const;
  /// Radius of the largest 2-norm ball about the origin inside the box;
  /// non-positive when the origin is not interior.
  double inscribed_radius() const;
  Vector clamp(const Vector& u) const;
};

/// Discrete-time actuator/plant cascade with its reference model:
///   x1+ = A1 x1 + B1 C x2,   x2+ = A2 x2 + B2 u,   xf+ = Af xf + Bf v_des.
/// Immutable after construction; the constructor rejects inconsistent sizes.
class CascadeModel {
 public:
  CascadeModel(Matrix a1, Matrix b1, Matrix a2, Matrix b2, Matrix c, Matrix af, Matrix bf,
               InputBox input_box);

  const Matrix& a1() const { return a1_; }
  const Matrix& b1() const { return b1_; }
  const Matrix& a2() const { return a2_; }
  const Matrix& b2() const { return b2_; }
  const Matrix& c() const { return c_; }
  const Matrix& af() const { return af_; }
  const Matrix& bf() const { return bf_; }
  const InputBox& input_box() const { return box_; }

  int n1() const { return static_cast<int>(a1_.rows()); }
  int n2() const { return static_cast<int>(a2_.rows()); }
  int p() const { return static_cast<int>(b2_.cols()); }
  int q() const { return static_cast<int>(c_.rows()); }

  CascadeModel with_reference(Matrix af, Matrix bf) const;
  CascadeModel with_input_box(InputBox box) const;

 private:
  Matrix a1_, b1_, a2_, b2_, c_, af_, bf_;
  InputBox box_;
};

/// Outer loop with the reference model appended:
///   x1aug+ = A1aug x1aug + B1aug v~ + Bfaug v_des.
struct AugmentedOuterModel {
  Matrix a1aug;
  Matrix b1aug;
  Matrix bfaug;

  Vector step(const Vector& x1aug, const Vector& vtilde, const Vector& vdes) const;
};

struct StateBundle {
  Vector x1;
  Vector x2;
  Vector xf;

  static StateBundle zero(const CascadeModel& m);

  Vector x1aug() const;
  Vector xtilde() const { return x2 - xf; }
  Vector v(const CascadeModel& m) const { return m.c() * x2; }
  Vector vtilde(const CascadeModel& m) const { return m.c() * xtilde(); }
};

struct AssumptionCheck {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string witness;
  std::optional<std::complex<double>> eigenvalue;
  /// 1-based row (or input coordinate) index when a row is at fault.
  std::optional<int> row;
};

struct AssumptionReport {
  std::vector<AssumptionCheck> checks;

  bool all_passed() const;
  const AssumptionCheck& check(int id) const;
  /// First failing check among `ids`, if any.
  const AssumptionCheck* first_failure(std::initializer_list<int> ids) const;
};

/// Runs the eight structural checks (stabilizability, controllability,
/// block-CCF form, reference stability, zero/pole clash, shared CCF shift
/// rows, input-row inclusion, origin interior to U).
AssumptionReport validate_assumptions(const CascadeModel& m);

AugmentedOuterModel augment(const CascadeModel& m);

/// Advances the true cascade and reference model by one step. Saturation is
/// not enforced here.
StateBundle step_true(const CascadeModel& m, const StateBundle& s, const Vector& u,
                      const Vector& vdes);

/// Error-system update
///   x~+ = A2 x~ + (A2 - Af) xf + B2 u - Bf v_des.
Vector error_step(const CascadeModel& m, const Vector& xtilde, const Vector& xf,
                  const Vector& u, const Vector& vdes);

/// Finite transmission zeros of (A, B, C) with square B/C dimensions,
/// from the generalized eigenvalues of the Rosenbrock pencil.
ComplexVector transmission_zeros(const Matrix& a, const Matrix& b, const Matrix& c);

/// Row indices (0-based) with a nonzero input row.
std::vector<int> full_rows(const Matrix& b);

}  // namespace hmpc
