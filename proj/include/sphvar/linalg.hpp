#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace sphvar {

// Ambient spaces stay small (m, n <= 7), so every vector and matrix lives on
// the stack with a dynamic size bounded by kMaxAmbient.
inline constexpr int kMaxAmbient = 8;

using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxAmbient, 1>;
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxAmbient, kMaxAmbient>;

inline constexpr double kPi = 3.14159265358979323846;

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad input: unknown ids, out-of-range parameters, incompatible combinations.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A computation could not reach the accuracy it promises (non-finite values,
/// an unresolved degree, a failed eigen-decomposition).
class NumericalError : public Error {
 public:
  using Error::Error;
};

inline Vec unit_vector(int dim, int k) {
  Vec e = Vec::Zero(dim);
  e(k) = 1.0;
  return e;
}

}  // namespace sphvar
