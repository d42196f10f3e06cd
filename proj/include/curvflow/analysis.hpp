#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include "curvflow/assembly.hpp"
#include "curvflow/fespace.hpp"
#include "curvflow/mesh.hpp"

namespace curvflow {

/// W^{m,p} over the mesh domain. p = infinity is evaluated by sampling and
/// therefore underestimates.
struct NormSpec {
  int m = 0;
  double p = 2.0;
};

double norm(const DiscreteField& field, const NormSpec& spec);
/// Norm of an arbitrary cellwise function, e.g. a field minus a reference.
double norm(const Mesh& mesh, const CellJetFn& f, const NormSpec& spec, int quad_degree = 12);
/// Norm of exact - field on the mesh of the field.
double error_norm(const DiscreteField& field, const JetFn& exact, const NormSpec& spec, int quad_degree = 12);

/// Rates log(e_i / e_{i+1}) / log(h_i / h_{i+1}) for (h, e) pairs with h
/// strictly decreasing. An empty entry marks a saturated rate (a zero error).
std::vector<std::optional<double>> eoc(const std::vector<std::pair<double, double>>& errors);

/// Data of the sup-norm bound for a_ij D_ij u + b_i D_i u + c u >= f
/// with lambda <= a <= Lambda, |b| <= c1, |c| <= c2, c <= 0.
struct AlexandrovInput {
  double lambda = 1.0;
  double Lambda = 1.0;
  double c1 = 0.0;
  double c2 = 0.0;
  double diam = 1.0;
  double f_norm = 0.0;  ///< ||f||_{L^{n+1}}
  int n = 0;
  double volume = 1.0;  ///< |Omega|

  void validate() const;
};

/// 2^max(n-1,0) / (omega_{n+1} (n+1)^(n+1)), omega_d the volume of the unit
/// ball in R^d.
double alexandrov_constant(int n);

/// diam * f_norm * exp(C_n lambda^-(n+1) (c1^(n+1) volume + 1))^(1/(n+1)),
/// the bound of the contact-set argument with its free parameter set to
/// f_norm. Zero for f_norm = 0; infinity when the exponential overflows.
double alexandrov_bound(const AlexandrovInput& in);

/// Pointwise data of the linearization at the quadrature points of a base
/// field. b = D_i a_ij + c is the drift of the operator in
/// non-divergence form a_ij D_ij u + b_j D_j u.
struct LinearizedBounds {
  double lambda = 0.0;  ///< min over points of the smallest eigenvalue of -a
  double Lambda = 0.0;  ///< max over points of the largest eigenvalue of -a
  double c1 = 0.0;      ///< max |b|
};
LinearizedBounds linearized_bounds(const DiscreteField& base, const FlowRegime& regime, double eps);

/// (R^2 - |x|^2) exp(x_1 / 2): smooth, zero on the boundary of the domain.
JetFn bubble_solution(const Domain& domain);

/// Linearized problem L u = g with a manufactured solution u that vanishes
/// on the boundary and g = a_ij D_ij u + b_j D_j u.
struct LinearSolve {
  DiscreteField solution;
  JetFn exact;
  ScalarFieldFn rhs;
  LinearizedBounds bounds;
  double eps = 0.0;
};

/// Assembles int g phi, solves the linearized system at `base` and returns
/// the discrete solution. `exact` = nullptr gives the homogeneous problem.
LinearSolve solve_manufactured(const DiscreteField& base, const FlowRegime& regime, double eps, const JetFn& exact,
                               Form form = Form::strong);

/// Alexandrov data of a linear solve: the operator -L has ellipticity
/// bounds [lambda, Lambda] and drift bound c1, f = g.
AlexandrovInput alexandrov_input(const LinearSolve& s, const Domain& domain);

/// sup over the mesh vertices and quadrature points of |u_h|.
double sup_abs(const DiscreteField& field);

struct StabilityReport {
  double h = 0.0;
  double eps = 0.0;
  double h2_norm = 0.0;         ///< ||u_h||_{H^2}
  double rhs_norm = 0.0;        ///< ||g||_{L^{n+1}}
  double error_h1 = 0.0;        ///< ||u - u_h||_{H^1}
  double interp_error_h1 = 0.0; ///< ||u - I_h u||_{H^1}, boundary-corrected interpolant
  std::optional<double> stability_ratio;     ///< h2_norm / rhs_norm
  std::optional<double> best_approx_ratio;   ///< error_h1 / interp_error_h1
};

/// `unconstrained` is the twin of the solution space without boundary
/// constraints, used for the interpolant.
StabilityReport stability_diagnostic(const LinearSolve& s, std::shared_ptr<const FESpace> unconstrained);

struct GardingResult {
  double lhs = 0.0;  ///< lambda int |Du|^2
  double rhs = 0.0;  ///< int (eps_test |c.Du|^2 + c_eps u^2) + int (g^2 + u^2)
  double c_eps = 0.0;
  bool holds = false;
};

/// lambda int |Du|^2 <= int (eps_test |c_i D_i u|^2 + c_eps u^2) + int (g^2 + u^2)
/// with lambda, c from the linearization at `base` and c_eps = 1/(4 eps_test)
/// unless given.
GardingResult garding_check(const DiscreteField& u, const DiscreteField& base, const FlowRegime& regime, double eps,
                            const ScalarFieldFn& g, double eps_test, std::optional<double> c_eps = {});

/// m - (n+1)/p >= k + alpha (p may be infinity).
bool embedding_precondition(int m, double p, int k, double alpha, int n);

struct EmbeddingReport {
  bool precondition = false;
  std::vector<double> ratios;  ///< ||f||_{C^{k,alpha}} / ||f||_{W^{m,p}}, empty if skipped
  double max_ratio = 0.0;
  int pairs = 0;
  std::uint64_t seed = 0;
};

/// Holder norm sum_{j<=k} sup |D^j f| + [D^k f]_alpha, the seminorm
/// estimated by the largest quotient over `pairs` random point pairs with
/// separation >= h/10 (a lower estimate).
double holder_norm(const DiscreteField& f, int k, double alpha, int pairs = 10000, std::uint64_t seed = 3);

EmbeddingReport sobolev_embedding_check(const std::vector<DiscreteField>& fields, int m, double p, int k,
                                        double alpha, int n, int pairs = 10000, std::uint64_t seed = 3);

}  // namespace curvflow
