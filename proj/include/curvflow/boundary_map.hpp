#pragma once

#include <vector>

#include "curvflow/mesh.hpp"

namespace curvflow {

struct BoundaryMapOptions {
  /// Accept meshes with h <= tolerance_factor * eps_width^2.
  double tolerance_factor = 1.0;
  /// Required bound |det DPhi - 1| < kappa on sampled strip points.
  double kappa = 0.5;
  /// Sample points per reference direction when checking the Jacobian.
  int samples = 5;
};

/// Diffeomorphism of a strip along the boundary that moves the discrete
/// boundary onto the exact one. With t = d(x) and x^ = x/|x| (disk) or
/// sign(x) (interval),
///   Phi(x) = (R + t - u(x^) rho(t)) x^,
/// where u is the normal offset of the discrete boundary and rho a C^2 cutoff
/// with rho = 0 for t <= -2 eps and rho = 1 for t >= -eps.
class BoundaryMap {
 public:
  BoundaryMap(const Domain& domain, const Mesh& mesh, double eps_width,
              const BoundaryMapOptions& options = {});

  double eps_width() const { return eps_; }

  double cutoff(double t) const;
  double cutoff_d1(double t) const;
  double cutoff_d2(double t) const;

  /// Normal offset of the discrete boundary in direction x^, with first and
  /// second derivative in arclength.
  double offset(const Vec2& x) const;
  double offset_d1(const Vec2& x) const;
  double offset_d2(const Vec2& x) const;

  Vec2 apply(const Vec2& x) const;
  double jacobian_det(const Vec2& x) const;

  /// max |u|/h^2, max |u'|/h, max |u''| over the offset samples.
  struct OffsetBounds {
    double value = 0.0, slope = 0.0, curvature = 0.0;
  };
  OffsetBounds offset_bounds() const;

  /// Smallest and largest Jacobian determinant seen during construction.
  double det_min() const { return det_min_; }
  double det_max() const { return det_max_; }

 private:
  struct Spline {
    double value, d1, d2;
  };
  Spline eval_offset(const Vec2& x) const;

  Domain domain_;
  double eps_;
  double h_;
  // interval: offsets at -R and +R; disk: periodic cubic spline in angle
  double u_minus_ = 0.0, u_plus_ = 0.0;
  std::vector<double> theta_, u_, m_;  // knots, values, second derivatives
  double det_min_ = 1.0, det_max_ = 1.0;
};

}  // namespace curvflow
