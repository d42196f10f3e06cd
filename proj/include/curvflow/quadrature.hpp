#pragma once

#include <vector>

#include "curvflow/types.hpp"

namespace curvflow {

/// Points and weights on a reference cell ([0,1] or the unit triangle).
struct QuadratureRule {
  std::vector<Vec2> points;
  std::vector<double> weights;
  int degree = 0;  ///< polynomials up to this total degree are integrated exactly

  int size() const { return static_cast<int>(weights.size()); }
};

/// n-point Gauss-Legendre rule on [0,1] (points in the x component).
QuadratureRule gauss_legendre(int n);

/// Rule on [0,1] exact to the given degree.
QuadratureRule interval_rule(int degree);

/// Collapsed (Duffy) Gauss product rule on the unit triangle exact to the given degree.
QuadratureRule triangle_rule(int degree);

QuadratureRule reference_rule(int dim, int degree);

}  // namespace curvflow
