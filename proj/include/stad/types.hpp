#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace stad {

using Complex = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;
using RVector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Bad caller input: wrong dimensions, out-of-range parameters, malformed files.
class InputError : public std::invalid_argument {
 public:
  explicit InputError(const std::string& what) : std::invalid_argument(what) {}
};

/// A numerical procedure left its validity envelope (solver failure,
/// impossible eigenvalue classification, conditioning blow-up).
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

/// Requested computation is outside the supported parameter regime
/// (currently only p == n for the kernel shrinkage estimator).
class UnsupportedRegimeError : public std::runtime_error {
 public:
  explicit UnsupportedRegimeError(const std::string& what)
      : std::runtime_error(what) {}
};

}  // namespace stad
