#pragma once

#include <iosfwd>
#include <vector>

#include <nlohmann/json.hpp>

#include "curvflow/model.hpp"

namespace curvflow {

/// Radially symmetric solution u(r) of the regularised equation on the ball
/// of radius R in dimension n+1, u(R) = 0.
///
/// With psi = u'/sqrt(u'^2 + eps^2) in (-1, 1) the radial equation
/// becomes the initial value problem
///   psi' = eta(eps / sqrt(1 - psi^2)) - (n/r) psi,   psi(0) = 0,
/// with psi'(0) = eta(eps)/(n+1). It is integrated by classical RK4 together
/// with U' = u' on a uniform grid over [0, 5R/4]; the part beyond R serves
/// boundary cells slightly outside the domain. If the solution blows up
/// beyond R the grid is cut there and u is continued quadratically.
class RadialProfile {
 public:
  /// Throws SolverError if psi reaches +-1 before R (no regular solution).
  RadialProfile(const FlowRegime& regime, double eps, double R, int n, int resolution = 20000);

  const FlowRegime& regime() const { return regime_; }
  double eps() const { return eps_; }
  double R() const { return R_; }
  int n() const { return n_; }
  int resolution() const { return resolution_; }

  /// Grid points r_j and u, u', u'' there, including the extension.
  const std::vector<double>& r() const { return r_; }
  const std::vector<double>& u() const { return u_; }
  const std::vector<double>& du() const { return du_; }
  const std::vector<double>& d2u() const { return d2u_; }
  /// Largest radius reached by the integration.
  double extent() const { return r_.back(); }

  double value(double r) const;
  double d1(double r) const;
  double d2(double r) const;

  /// u as a function on R^(n+1) (n <= 1), value with gradient and hessian.
  Jet jet(const Vec2& x) const;
  JetFn jet_fn() const;

  /// sup over grid midpoints in [0, R] of |psi' + n psi / r - eta(|u'|_eps)|,
  /// psi and psi' taken from the cubic Hermite interpolant of the grid data.
  double ode_residual() const;
  /// sup over the grid in [0, R] of |u_M - u_2M| against a run at double
  /// resolution; zero until estimate_accuracy() was called.
  double accuracy() const { return accuracy_; }
  double estimate_accuracy();
  /// +1 if u(0) > 0, -1 if u(0) < 0.
  int sign() const { return u_.front() >= 0.0 ? 1 : -1; }

  nlohmann::json metadata() const;

 private:
  struct Local {
    int j;
    double t, H;
  };
  Local locate(double r) const;

  FlowRegime regime_;
  double eps_, R_;
  int n_, resolution_;
  double H_;
  int iR_;
  std::vector<double> r_, psi_, dpsi_, u_, du_, d2u_;
  double accuracy_ = 0.0;
};

RadialProfile radial_solve(const FlowRegime& regime, double eps, double R, int n, int resolution = 20000);

/// (R^2 - |x|^2) / (2n), the arrival time of the shrinking sphere.
double exact_mcf_arrival(double R, int n, const Vec2& x);
double exact_mcf_arrival(double R, int n, double r);

struct GapRow {
  double eps = 0.0;
  double gap = 0.0;       ///< sup_r |u_eps(r) - (R^2 - r^2)/(2n)|
  double accuracy = 0.0;  ///< self-convergence estimate of the profile
  double ode_residual = 0.0;
};

std::vector<GapRow> regularization_gap(const FlowRegime& regime, double R, int n, const std::vector<double>& eps_list,
                                       int resolution = 20000);

/// CSV r,u,du for grid points in [0, R], every `stride`-th point plus r = R.
void write_profile_csv(std::ostream& os, const RadialProfile& p, int stride = 10);

}  // namespace curvflow
