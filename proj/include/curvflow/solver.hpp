#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/SparseLU>

#include "curvflow/assembly.hpp"

namespace curvflow {

/// Sparse LU solve. Throws SolverError if the factorisation fails or the
/// residual exceeds 1e-10 (|A| |x| + |b|) after iterative refinement.
Eigen::VectorXd solve_linear(const LinearSystem& system);

/// Frozen-Jacobian map: T w = w - J(base)^{-1} R(w), with J(base) factorised
/// once. R is assemble_residual, J assemble_linearized.
class FixedPointMap {
 public:
  FixedPointMap(const DiscreteField& base, const FlowRegime& regime, double eps, Form form = Form::weak);

  const DiscreteField& base() const { return base_; }
  DiscreteField apply(const DiscreteField& w) const;
  /// Solve J(base) delta = rhs (constrained entries of rhs are ignored).
  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const;

 private:
  DiscreteField base_;
  FlowRegime regime_;
  double eps_;
  Form form_;
  std::vector<char> constrained_;
  std::shared_ptr<Eigen::SparseLU<Eigen::SparseMatrix<double>>> lu_;
};

DiscreteField apply_T(const DiscreteField& w, const DiscreteField& base, const FlowRegime& regime, double eps,
                      Form form = Form::weak);

struct IterationRecord {
  int k = 0;
  double step_norm = 0.0;  ///< ||w_{k+1} - w_k||_{W^{2,mu}}
  double residual = 0.0;   ///< sup norm of R(w_{k+1})
  double distance = 0.0;   ///< ||w_{k+1} - base||_{W^{2,mu}}
  bool in_ball = false;    ///< distance <= rho
};

struct IterationTrace {
  std::vector<IterationRecord> records;
  double rho = 0.0;
  double mu = 2.0;

  bool all_in_ball() const;
  /// k,step_norm,residual,in_ball
  void write_csv(std::ostream& os) const;
};

struct FixedPointOptions {
  int max_iter = 50;
  double tol = 1e-12;   ///< on the W^{2,mu} step
  double mu = 3.0;
  double rho = 1.0;     ///< ball radius; infinity when the radius overflows
  Form form = Form::weak;
};

struct FixedPointResult {
  DiscreteField solution;
  IterationTrace trace;
  bool converged = false;
  std::string status;  ///< "converged", "max_iter" or "diverged"
};

/// Iterates w_{k+1} = T w_k from w_0 = base (the boundary-corrected
/// interpolant of the reference solution) with T frozen at base. Stops when
/// the step is below tol, after max_iter steps, or when the step grows three
/// times in a row.
FixedPointResult fixed_point_solve(const DiscreteField& base, const FlowRegime& regime, double eps,
                                   const FixedPointOptions& options);

struct NewtonResult {
  DiscreteField solution;
  std::vector<double> residuals;  ///< sup norm before each step and at the end
  int iterations = 0;
  bool converged = false;
  std::string status;
};

/// Newton's method on assemble_residual, stopping once the sup norm of the
/// residual is at most tol.
NewtonResult newton_solve(const DiscreteField& initial, const FlowRegime& regime, double eps, int max_iter = 30,
                          double tol = 1e-11, Form form = Form::weak);

struct ContractionOptions {
  int pairs = 8;
  double mu = 3.0;
  double rho = 1.0;
  /// Perturbations have W^{2,mu} norm radius_fraction * rho * s, s ~ U(0.1, 1].
  double radius_fraction = 1.0;
  std::uint64_t seed = 7;
};

struct ContractionResult {
  double rate = 0.0;  ///< max over pairs of ||Tv - Tw|| / ||v - w||
  std::vector<double> ratios;
  std::uint64_t seed = 0;
};

/// Samples pairs v, w = base + random free-dof perturbations rescaled into
/// the ball of radius rho around base and measures the Lipschitz quotient of T
/// in W^{2,mu}.
ContractionResult contraction_rate(const FixedPointMap& T, const ContractionOptions& options);

}  // namespace curvflow
