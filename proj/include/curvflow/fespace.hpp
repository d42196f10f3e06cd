#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "curvflow/mesh.hpp"
#include "curvflow/quadrature.hpp"

namespace curvflow {

enum class ElementFamily { hermite3, hermite5, argyris };

struct ElementKind {
  ElementFamily family = ElementFamily::argyris;

  int degree() const { return family == ElementFamily::hermite3 ? 3 : 5; }
  int dim() const { return family == ElementFamily::argyris ? 2 : 1; }
  /// Number of basis functions on one cell.
  int local_dofs() const;
  std::string name() const;
  /// "hermite3", "hermite5", "argyris"
  static ElementKind parse(const std::string& name);
};

/// Linear functional defining one degree of freedom:
///   order 0: w(point), order 1: Dw(point).dir1,
///   order 2: dir1^T D^2w(point) dir2 + grad_weight Dw(point).grad_dir.
struct DofFunctional {
  Vec2 point = Vec2::Zero();
  int order = 0;
  Vec2 dir1 = Vec2::UnitX();
  Vec2 dir2 = Vec2::UnitX();
  double grad_weight = 0.0;
  Vec2 grad_dir = Vec2::UnitX();

  double apply(const Jet& j) const;
};

/// Basis jets on one cell: row k holds
///   [phi_k, d_x phi_k, d_y phi_k, d_xx phi_k, d_xy phi_k, d_yy phi_k].
using BasisJets = Eigen::Matrix<double, Eigen::Dynamic, 6>;

/// C^1 piecewise polynomials on a mesh. Local shape functions are polynomials
/// in physical coordinates, dual to the global dof functionals, so curved
/// boundary cells reuse the polynomial of their straight triangle.
///
/// Global numbering: vertex dofs first (2, 3 or 6 per vertex), then one
/// edge-normal dof per edge (Argyris). At boundary vertices the Argyris
/// derivative dofs use the frame (n, t) of the averaged outward chord normal
/// and the sixth dof is d_tt w - kappa d_n w, kappa the curvature of the circle
/// through the vertex and its two boundary neighbours; elsewhere the
/// Cartesian frame.
///
/// Constrained spaces fix value dofs at boundary vertices and, in 2D, the
/// tangential dofs d_t w and d_tt w - kappa d_n w there. Both vanish for
/// smooth functions that vanish on a boundary curve through the vertex with
/// curvature kappa.
class FESpace {
 public:
  FESpace(std::shared_ptr<const Mesh> mesh, ElementKind kind, bool constrained, int quad_degree = -1);

  const Mesh& mesh() const { return *mesh_; }
  std::shared_ptr<const Mesh> mesh_ptr() const { return mesh_; }
  ElementKind kind() const { return kind_; }
  bool constrained() const { return constrained_; }

  int num_dofs() const { return static_cast<int>(functionals_.size()); }
  int num_free() const { return num_free_; }
  bool is_constrained(int dof) const { return free_index_[dof] < 0; }
  /// Position among free dofs, or -1.
  int free_index(int dof) const { return free_index_[dof]; }
  /// Dofs that a constrained space fixes to zero (filled for both variants).
  const std::vector<int>& boundary_dofs() const { return boundary_dofs_; }

  const DofFunctional& functional(int dof) const { return functionals_[dof]; }
  /// Global dofs of a cell in local order.
  const std::vector<int>& cell_dofs(int c) const { return cell_dofs_[c]; }

  BasisJets basis(int c, const Vec2& x) const;

  const QuadratureRule& rule() const { return rule_; }
  int quad_degree() const { return rule_.degree; }

  /// Basis jets at the quadrature points of one cell, built on first use.
  struct CellQuadrature {
    Eigen::VectorXd weight;                ///< rule weight times |det DF|
    std::vector<Vec2> x;                   ///< physical points
    std::array<Eigen::MatrixXd, 6> jets;   ///< component k: local dof x point
  };
  const CellQuadrature& cell_quadrature(int c) const;

  /// Same mesh and element with the other constraint choice.
  FESpace with_constraint(bool constrained) const;

 private:
  void build_dofs();

  std::shared_ptr<const Mesh> mesh_;
  ElementKind kind_;
  bool constrained_;
  QuadratureRule rule_;

  std::vector<DofFunctional> functionals_;
  std::vector<std::vector<int>> cell_dofs_;
  std::vector<int> boundary_dofs_;
  std::vector<int> free_index_;
  int num_free_ = 0;

  // per cell: monomial centre, scale and coefficients (monomial x local dof)
  std::vector<Vec2> centre_;
  std::vector<double> scale_;
  std::vector<Eigen::MatrixXd> coeffs_;

  mutable std::once_flag quad_once_;
  mutable std::vector<CellQuadrature> quad_;
};

std::shared_ptr<const FESpace> build_space(std::shared_ptr<const Mesh> mesh, ElementKind kind, bool constrained,
                                           int quad_degree = -1);

class DiscreteField {
 public:
  DiscreteField(std::shared_ptr<const FESpace> space, Eigen::VectorXd coefficients);
  static DiscreteField zero(std::shared_ptr<const FESpace> space);

  const FESpace& space() const { return *space_; }
  std::shared_ptr<const FESpace> space_ptr() const { return space_; }
  const Eigen::VectorXd& coefficients() const { return coeffs_; }
  Eigen::VectorXd& coefficients() { return coeffs_; }

  /// Coefficients of the dofs of one cell in local order.
  Eigen::VectorXd local(int cell) const;

  /// Values of the free dofs only.
  Eigen::VectorXd free_coefficients() const;
  void set_free_coefficients(const Eigen::VectorXd& v);

  Jet evaluate(int cell, const Vec2& x) const;
  /// Throws Error if x lies outside every cell.
  Jet evaluate(const Vec2& x) const;

  DiscreteField operator-(const DiscreteField& o) const;
  DiscreteField operator+(const DiscreteField& o) const;
  DiscreteField operator*(double s) const;

 private:
  std::shared_ptr<const FESpace> space_;
  Eigen::VectorXd coeffs_;
};

/// Dof-wise interpolant. In a constrained space the constrained dofs are
/// set to zero afterwards.
DiscreteField interpolate(std::shared_ptr<const FESpace> space, const JetFn& fn);

/// I_h u - z_h with z_h = I_h u on the constrained dofs and zero elsewhere.
/// Takes the unconstrained space and returns a field of its constrained twin.
DiscreteField boundary_corrected_interpolant(std::shared_ptr<const FESpace> unconstrained,
                                             std::shared_ptr<const FESpace> constrained, const JetFn& fn);

/// (sum_{k<=m} int |D^k f|^p)^(1/p) over the mesh cells, Euclidean/Frobenius
/// pointwise norms. p = infinity samples a 5^dim grid per cell plus the
/// quadrature points.
double sobolev_norm(const Mesh& mesh, const QuadratureRule& rule, const CellJetFn& f, int m, double p);

/// W^{m,p} norm of a field, using the cached quadrature for p < infinity.
double field_norm(const DiscreteField& f, int m, double p);

double interpolation_error(std::shared_ptr<const FESpace> space, const JetFn& fn, int m, double p);

/// Ratio ||v||_{W^{l,p}} / (h^(m-l+min(0, d/p-d/q)) ||v||_{W^{m,q}}), d the
/// spatial dimension, maximised over the given fields.
double inverse_estimate_ratio(const std::vector<DiscreteField>& fields, int l, double p, int m, double q);
/// Same over `trials` random free-coefficient vectors (uniform in [-1,1]).
double inverse_estimate_ratio(std::shared_ptr<const FESpace> space, int trials, int l, double p, int m, double q,
                              std::uint64_t seed = 1);

struct ConformityDefect {
  double value = 0.0;
  double gradient = 0.0;
  double hessian = 0.0;
};

/// Largest jumps across interior facets at `samples` points per facet.
ConformityDefect conformity_defect(const DiscreteField& field, int samples = 5);

/// Largest |w| at boundary vertices and boundary facet sample points.
struct BoundaryTrace {
  double at_vertices = 0.0;
  double on_facets = 0.0;
};
BoundaryTrace boundary_trace(const DiscreteField& field, int samples = 5);

/// CSV with columns x[,y],value,grad...,hess... at per-cell sample points.
void write_field_csv(std::ostream& os, const DiscreteField& field, int samples = 3);
nlohmann::json field_sidecar(const DiscreteField& field);

}  // namespace curvflow
