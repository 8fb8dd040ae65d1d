#pragma once

#include <Eigen/Dense>

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace smallbody {

using Complex = std::complex<double>;
using Index = Eigen::Index;

using Vec3 = Eigen::Vector3d;
using CVec3 = Eigen::Vector3cd;
using Mat3 = Eigen::Matrix3d;
using CMat3 = Eigen::Matrix3cd;
using VectorXc = Eigen::VectorXcd;
using MatrixXc = Eigen::MatrixXcd;
using Points = Eigen::Matrix3Xd;
using CPoints = Eigen::Matrix3Xcd;

inline constexpr double kPi = 3.141592653589793238462643383279502884;
inline constexpr Complex kI{0.0, 1.0};

// Error taxonomy. The CLI maps SchemaError -> 2, InvariantViolation -> 3,
// SolverFailure -> 4.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SchemaError : public Error {
 public:
  using Error::Error;
};

class InvariantViolation : public Error {
 public:
  using Error::Error;
};

class InfeasibleDensity : public InvariantViolation {
 public:
  using InvariantViolation::InvariantViolation;
};

class SingularEvaluation : public Error {
 public:
  using Error::Error;
};

class SolverFailure : public Error {
 public:
  using Error::Error;
};

}  // namespace smallbody
