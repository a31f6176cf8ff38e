#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace kdimer {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

inline constexpr const char* kCodeVersion = "kdimer-1.0.0";

// Error hierarchy. The C API maps each class onto a distinct status code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid argument value (out of range, wrong shape, unknown enumerator).
class ArgumentError : public Error {
 public:
  using Error::Error;
};

// Input violates a documented precondition (non-unitary, unsorted, ...).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

// LAPACK failure, non-convergence, or a residual check that did not hold.
class NumericError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Configuration parse/validation failure; carries the offending line when known.
class ConfigError : public Error {
 public:
  ConfigError(const std::string& msg, int line = -1)
      : Error(line >= 0 ? "line " + std::to_string(line) + ": " + msg : msg), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

// Wrap an angle into the half-open principal range [-pi, pi).
inline double wrap_phase(double x) {
  double y = std::fmod(x + kPi, kTwoPi);
  if (y < 0) y += kTwoPi;
  y -= kPi;
  if (y >= kPi) y -= kTwoPi;
  return y;
}

}  // namespace kdimer
