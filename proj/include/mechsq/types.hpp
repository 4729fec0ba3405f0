#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace mechsq {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Input outside an operation's domain.
class PreconditionError : public Error {
public:
  using Error::Error;
};

/// Drift matrix is not Hurwitz, or coupling parameters lie outside the
/// stable region (chi1 >= chi2).
class StabilityError : public Error {
public:
  StabilityError(const std::string& what, Complex eigenvalue = {})
      : Error(what), eigenvalue_(eigenvalue) {}
  Complex eigenvalue() const { return eigenvalue_; }

private:
  Complex eigenvalue_;
};

/// Adaptive integration gave up (step-size underflow or divergence).
class IntegrationError : public Error {
public:
  IntegrationError(const std::string& what, double time) : Error(what), time_(time) {}
  double time() const { return time_; }

private:
  double time_;
};

/// A quantity that has no finite value for the given inputs.
class UnboundedError : public Error {
public:
  using Error::Error;
};

/// Fock-space truncation is too small for the populated levels.
class TruncationError : public Error {
public:
  TruncationError(const std::string& what, double leak) : Error(what), leak_(leak) {}
  double leak() const { return leak_; }

private:
  double leak_;
};

}  // namespace mechsq
