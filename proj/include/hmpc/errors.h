#pragma once

#include <complex>
#include <stdexcept>
#include <string>

namespace hmpc {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A matrix has dimensions inconsistent with the declared model sizes.
class StructuralError : public Error {
 public:
  StructuralError(std::string matrix, const std::string& what)
      : Error(matrix + ": " + what), matrix_(std::move(matrix)) {}
  const std::string& matrix() const { return matrix_; }

 private:
  std::string matrix_;
};

/// A structural assumption on the model (numbered 1..8) is violated.
class AssumptionError : public Error {
 public:
  AssumptionError(int assumption, const std::string& what)
      : Error("assumption " + std::to_string(assumption) + ": " + what),
        assumption_(assumption) {}
  int assumption() const { return assumption_; }

 private:
  int assumption_;
};

/// A matrix that must be Schur stable is not.
class InstabilityError : public Error {
 public:
  InstabilityError(std::complex<double> eigenvalue, const std::string& what)
      : Error(what), eigenvalue_(eigenvalue) {}
  std::complex<double> eigenvalue() const { return eigenvalue_; }

 private:
  std::complex<double> eigenvalue_;
};

/// A semidefinite certificate could not be established.
class CertificationError : public Error {
 public:
  using Error::Error;
};

/// gamma1 * gamma2 >= 1 for the interconnection gains.
class SmallGainError : public Error {
 public:
  SmallGainError(double gamma1, double gamma2)
      : Error("small-gain condition violated: gamma1*gamma2 = " +
              std::to_string(gamma1 * gamma2) + " >= 1"),
        gamma1_(gamma1),
        gamma2_(gamma2) {}
  double gamma1() const { return gamma1_; }
  double gamma2() const { return gamma2_; }

 private:
  double gamma1_;
  double gamma2_;
};

/// The coupled level equations for inexact matching admit no positive solution.
class SolvabilityError : public Error {
 public:
  SolvabilityError(double lhs, double rhs)
      : Error("level equations unsolvable: eps1*eps2*lmin(P)*lmin(Q) = " +
              std::to_string(lhs) + " < gamma1*|C|^2*(gamma21*|K1|^2+gamma22) = " +
              std::to_string(rhs)),
        lhs_(lhs),
        rhs_(rhs) {}
  double lhs() const { return lhs_; }
  double rhs() const { return rhs_; }

 private:
  double lhs_;
  double rhs_;
};

/// A scalar design parameter is out of its admissible range.
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// Derived budgets collapsed to a non-positive value.
class DegenerateGeometryError : public Error {
 public:
  using Error::Error;
};

/// An MPC solve failed where persistent feasibility says it cannot. Carries a
/// dump of the offending problem.
class TheoryViolationError : public Error {
 public:
  TheoryViolationError(const std::string& what, std::string dump)
      : Error(what), dump_(std::move(dump)) {}
  const std::string& dump() const { return dump_; }

 private:
  std::string dump_;
};

/// The MPC exchange protocol was driven out of order.
class ProtocolError : public Error {
 public:
  using Error::Error;
};

}  // namespace hmpc
