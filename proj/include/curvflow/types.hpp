#pragma once

#include <functional>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace curvflow {

// Points, gradients and hessians are stored in two components for both the
// interval and the disk; on the interval the second component is zero.
using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

/// Value, gradient and hessian of a scalar function at one point.
struct Jet {
  double value = 0.0;
  Vec2 grad = Vec2::Zero();
  Mat2 hess = Mat2::Zero();

  Jet& operator-=(const Jet& o) {
    value -= o.value;
    grad -= o.grad;
    hess -= o.hess;
    return *this;
  }
  Jet& operator*=(double s) {
    value *= s;
    grad *= s;
    hess *= s;
    return *this;
  }
};

inline Jet operator-(Jet a, const Jet& b) { return a -= b; }
inline Jet operator*(double s, Jet a) { return a *= s; }

/// Smooth function given with derivatives up to second order.
using JetFn = std::function<Jet(const Vec2&)>;

/// Jet provider that may exploit the cell containing the point.
using CellJetFn = std::function<Jet(int cell, const Vec2&)>;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid parameters or configuration (maps to CLI exit code 64).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Linear or nonlinear solver breakdown (maps to CLI exit code 1).
class SolverError : public Error {
 public:
  using Error::Error;
};

}  // namespace curvflow
