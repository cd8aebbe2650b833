#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace bakerlab {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Thrown when inputs violate an operation's preconditions.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Thrown when a numerical post-condition (residual, orthonormality) fails.
class NumericalFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Hilbert-space dimension N of the torus quantization (hbar = 1/(2 pi N)).
class TorusDim {
 public:
  explicit TorusDim(long n) : n_(n) {
    if (n < 1) throw InvalidArgument("TorusDim: N must be >= 1, got " + std::to_string(n));
  }
  long value() const { return n_; }
  bool even() const { return n_ % 2 == 0; }
  operator long() const { return n_; }

 private:
  long n_;
};

/// Reduces an angle into [0, 2 pi).
inline double wrap_angle(double theta) {
  double t = std::fmod(theta, kTwoPi);
  if (t < 0.0) t += kTwoPi;
  if (t >= kTwoPi) t = 0.0;
  return t;
}

/// Reduces a real into [0, 1).
inline double wrap_unit(double x) {
  double t = x - std::floor(x);
  if (t >= 1.0) t = 0.0;
  return t;
}

/// Execution path for kernels that keep a serial reference next to the
/// OpenMP version.
enum class Exec { Serial, Parallel };

inline double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace bakerlab
