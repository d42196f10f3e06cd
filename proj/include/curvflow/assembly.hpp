#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Sparse>

#include "curvflow/fespace.hpp"
#include "curvflow/model.hpp"

namespace curvflow {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// Square system over all dofs of a space; rows and columns of constrained
/// dofs are replaced by the identity and their right-hand side by zero.
struct LinearSystem {
  SparseMatrix matrix;
  Eigen::VectorXd rhs;
  std::vector<char> constrained;
};

/// Weak: divergence form, integrated by parts against the test function.
/// Strong: the divergence taken pointwise (the fields are C^1, so second
/// derivatives exist cellwise). The two differ by the boundary flux
///   int_{boundary} (Dw.n / |Dw|_eps) phi,
/// which vanishes when phi has zero trace (always in 1D). In 2D the
/// constrained Argyris functions vanish at boundary vertices only, and the
/// strong form is the consistent one.
enum class Form { weak, strong };

Form parse_form(const std::string& name);
std::string form_name(Form f);

/// Weak:   R_i(w) = int Dw.Dphi_i / |Dw|_eps + int eta(|Dw|_eps) phi_i,
/// strong: R_i(w) = int (-D^2 f_eps(Dw) : D^2 w + eta(|Dw|_eps)) phi_i,
/// for every dof i, zero on constrained dofs. R(w) = 0 is the discrete
/// equation with the eta term moved to the left.
Eigen::VectorXd assemble_residual(const DiscreteField& w, const FlowRegime& regime, double eps,
                                  Form form = Form::weak);

/// Weak:   B(u, v) = -int a_ij D_j u D_i v + int c_i D_i u v,
/// strong: B(u, v) = int (a_ij D_ij u + (D_i a_ij + c_j) D_j u) v,
/// with a, c taken at the gradient of `base`; row = test function, column =
/// trial function. Equals the derivative of assemble_residual at `base`.
SparseMatrix assemble_linearized(const DiscreteField& base, const FlowRegime& regime, double eps,
                                 Form form = Form::weak);

/// The same with the identity on constrained rows/columns.
LinearSystem linearized_system(const DiscreteField& base, const FlowRegime& regime, double eps,
                               const Eigen::VectorXd& rhs, Form form = Form::weak);

/// Vector field with its Jacobian matrix (jac(i, j) = D_j f_i).
struct VectorJet {
  Vec2 value = Vec2::Zero();
  Mat2 jac = Mat2::Zero();
};
using VectorFieldFn = std::function<VectorJet(int cell, const Vec2& x)>;
using ScalarFieldFn = std::function<double(int cell, const Vec2& x)>;

/// int (D_i f_i + g) v for every basis function v, with D_i f_i taken
/// pointwise. Either callback may be empty.
Eigen::VectorXd assemble_functional(const FESpace& space, const VectorFieldFn& f, const ScalarFieldFn& g);

/// -int f_i D_i v + int g v (integrated by parts, no boundary term).
Eigen::VectorXd assemble_functional_weak(const FESpace& space, const VectorFieldFn& f, const ScalarFieldFn& g);

/// Phi_eps(w) = -D_i(D_i w / |Dw|_eps) + eta(|Dw|_eps) tested against the
/// basis. Identical to assemble_residual in the same form.
Eigen::VectorXd fixed_point_rhs(const DiscreteField& w, const FlowRegime& regime, double eps,
                                Form form = Form::weak);

struct ExpansionSample {
  int cell = -1;
  Vec2 x = Vec2::Zero();
  double direct = 0.0;     ///< D_i f_i by pointwise differentiation
  double expansion = 0.0;  ///< four-term t-integral
};

/// With xi = v - w and alpha(t) = w + t xi, compares at sample points
///   D_i [D_i f(Dv) - D_i f(Dw) - D_ij f(Du) D_j xi]
/// against
///   int_0^1 D_ijr f(D alpha) D_ir alpha D_j xi + D_ij f(D alpha) D_ij xi
///         - D_ijr f(Du) D_ir u D_j xi - D_ij f(Du) D_ij xi dt
/// (f = f_eps, u = base) using Gauss quadrature in t.
std::vector<ExpansionSample> expansion_difi_diagnostic(const DiscreteField& w, const DiscreteField& v,
                                                       const DiscreteField& base, double eps,
                                                       int t_points = 8, int samples_per_cell = 3);

/// "row col value" lines, 0-based, 17 significant digits.
void write_triplets(std::ostream& os, const SparseMatrix& m);

}  // namespace curvflow
