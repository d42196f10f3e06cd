#include "curvflow/assembly.hpp"

#include <cstdio>
#include <ostream>

#include "curvflow/quadrature.hpp"

namespace curvflow {

namespace {

void scatter(const FESpace& space, int c, const Eigen::VectorXd& local, Eigen::VectorXd& global) {
  const auto& dofs = space.cell_dofs(c);
  for (size_t k = 0; k < dofs.size(); ++k) {
    if (!space.is_constrained(dofs[k])) global(dofs[k]) += local(k);
  }
}

double contract(const Mat2& a, const Mat2& b) { return (a.array() * b.array()).sum(); }

// sum_{i,j,r} T_ijr A_ir x_j
double contract3(const Tensor3& T, const Mat2& A, const Vec2& x) {
  double s = 0.0;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      for (int r = 0; r < 2; ++r) s += T[i](j, r) * A(i, r) * x[j];
    }
  }
  return s;
}

}  // namespace

Form parse_form(const std::string& name) {
  if (name == "weak") return Form::weak;
  if (name == "strong") return Form::strong;
  throw ConfigError("unknown form '" + name + "' (expected weak or strong)");
}

std::string form_name(Form f) { return f == Form::weak ? "weak" : "strong"; }

Eigen::VectorXd assemble_residual(const DiscreteField& w, const FlowRegime& regime, double eps, Form form) {
  const FESpace& space = w.space();
  const int dim = space.mesh().dim();
  Eigen::VectorXd R = Eigen::VectorXd::Zero(space.num_dofs());
  for (int c = 0; c < space.mesh().num_cells(); ++c) {
    const auto& cq = space.cell_quadrature(c);
    const Eigen::VectorXd loc = w.local(c);
    std::array<Eigen::VectorXd, 6> v;
    for (int k = 1; k < (form == Form::weak ? 3 : 6); ++k) v[k] = cq.jets[k].transpose() * loc;
    Eigen::VectorXd rl = Eigen::VectorXd::Zero(loc.size());
    for (int q = 0; q < cq.weight.size(); ++q) {
      const Vec2 z(v[1](q), v[2](q));
      const double r = f_eps(z, eps);
      const double e = eta(regime, r).value;
      if (form == Form::weak) {
        rl += cq.weight(q) * ((z.x() / r) * cq.jets[1].col(q) + (z.y() / r) * cq.jets[2].col(q) + e * cq.jets[0].col(q));
      } else {
        Mat2 H;
        H << v[3](q), v[4](q), v[4](q), v[5](q);
        const auto d = f_eps_derivatives(z, eps, dim);
        rl += cq.weight(q) * (e - contract(d.hessian, H)) * cq.jets[0].col(q);
      }
    }
    scatter(space, c, rl, R);
  }
  return R;
}

Eigen::VectorXd fixed_point_rhs(const DiscreteField& w, const FlowRegime& regime, double eps, Form form) {
  return assemble_residual(w, regime, eps, form);
}

SparseMatrix assemble_linearized(const DiscreteField& base, const FlowRegime& regime, double eps, Form form) {
  const FESpace& space = base.space();
  const int dim = space.mesh().dim();
  std::vector<Eigen::Triplet<double>> trip;
  const int nl = space.kind().local_dofs();
  trip.reserve(static_cast<size_t>(space.mesh().num_cells()) * nl * nl);
  for (int c = 0; c < space.mesh().num_cells(); ++c) {
    const auto& cq = space.cell_quadrature(c);
    const Eigen::VectorXd loc = base.local(c);
    std::array<Eigen::VectorXd, 6> v;
    for (int k = 1; k < (form == Form::weak ? 3 : 6); ++k) v[k] = cq.jets[k].transpose() * loc;
    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(nl, nl);
    Eigen::MatrixXd G(nl, 2);
    for (int q = 0; q < cq.weight.size(); ++q) {
      const Vec2 z(v[1](q), v[2](q));
      const auto k = linearized_coeffs(regime, eps, z, dim);
      G.col(0) = cq.jets[1].col(q);
      G.col(1) = cq.jets[2].col(q);
      if (form == Form::weak) {
        // -a_ij D_j u D_i v + c_i D_i u v
        K.noalias() += cq.weight(q) * (G * (-k.a) * G.transpose() + cq.jets[0].col(q) * (G * k.c).transpose());
        continue;
      }
      // (a_ij D_ij u + b_j D_j u) v with b_j = D_i a_ij + c_j, D_i a_ij = -T_ijm D_im w
      Mat2 H;
      H << v[3](q), v[4](q), v[4](q), v[5](q);
      const auto d = f_eps_derivatives(z, eps, dim);
      Vec2 b = k.c;
      for (int j = 0; j < 2; ++j) {
        for (int i = 0; i < 2; ++i) {
          for (int m = 0; m < 2; ++m) b(j) -= d.third[i](j, m) * H(i, m);
        }
      }
      const Eigen::VectorXd trial = k.a(0, 0) * cq.jets[3].col(q) + 2.0 * k.a(0, 1) * cq.jets[4].col(q) +
                                    k.a(1, 1) * cq.jets[5].col(q) + G * b;
      K.noalias() += cq.weight(q) * cq.jets[0].col(q) * trial.transpose();
    }
    const auto& dofs = space.cell_dofs(c);
    for (int i = 0; i < nl; ++i) {
      if (space.is_constrained(dofs[i])) continue;
      for (int j = 0; j < nl; ++j) {
        if (!space.is_constrained(dofs[j])) trip.emplace_back(dofs[i], dofs[j], K(i, j));
      }
    }
  }
  SparseMatrix A(space.num_dofs(), space.num_dofs());
  A.setFromTriplets(trip.begin(), trip.end());
  return A;
}

LinearSystem linearized_system(const DiscreteField& base, const FlowRegime& regime, double eps,
                               const Eigen::VectorXd& rhs, Form form) {
  const FESpace& space = base.space();
  LinearSystem s;
  s.matrix = assemble_linearized(base, regime, eps, form);
  s.rhs = rhs;
  s.constrained.assign(space.num_dofs(), 0);
  for (int d = 0; d < space.num_dofs(); ++d) {
    if (space.is_constrained(d)) {
      s.constrained[d] = 1;
      s.matrix.coeffRef(d, d) = 1.0;
      s.rhs(d) = 0.0;
    }
  }
  s.matrix.makeCompressed();
  return s;
}

namespace {

Eigen::VectorXd assemble_source(const FESpace& space, const VectorFieldFn& f, const ScalarFieldFn& g, bool weak) {
  Eigen::VectorXd b = Eigen::VectorXd::Zero(space.num_dofs());
  const int nl = space.kind().local_dofs();
  for (int c = 0; c < space.mesh().num_cells(); ++c) {
    const auto& cq = space.cell_quadrature(c);
    Eigen::VectorXd bl = Eigen::VectorXd::Zero(nl);
    for (int q = 0; q < cq.weight.size(); ++q) {
      const Vec2& x = cq.x[q];
      const double gv = g ? g(c, x) : 0.0;
      if (!f) {
        bl += cq.weight(q) * gv * cq.jets[0].col(q);
        continue;
      }
      const VectorJet fv = f(c, x);
      if (weak) {
        bl += cq.weight(q) * (gv * cq.jets[0].col(q) - fv.value.x() * cq.jets[1].col(q) - fv.value.y() * cq.jets[2].col(q));
      } else {
        bl += cq.weight(q) * (fv.jac.trace() + gv) * cq.jets[0].col(q);
      }
    }
    scatter(space, c, bl, b);
  }
  return b;
}

}  // namespace

Eigen::VectorXd assemble_functional(const FESpace& space, const VectorFieldFn& f, const ScalarFieldFn& g) {
  return assemble_source(space, f, g, false);
}

Eigen::VectorXd assemble_functional_weak(const FESpace& space, const VectorFieldFn& f, const ScalarFieldFn& g) {
  return assemble_source(space, f, g, true);
}

std::vector<ExpansionSample> expansion_difi_diagnostic(const DiscreteField& w, const DiscreteField& v,
                                                       const DiscreteField& base, double eps, int t_points,
                                                       int samples_per_cell) {
  const Mesh& m = w.space().mesh();
  const int dim = m.dim();
  const QuadratureRule tq = gauss_legendre(t_points);
  std::vector<ExpansionSample> out;
  const int ns = samples_per_cell;
  for (int c = 0; c < m.num_cells(); ++c) {
    for (int i = 0; i < ns; ++i) {
      for (int j = 0; j < (dim == 2 ? ns - i : 1); ++j) {
        const Vec2 ref = dim == 2 ? Vec2((i + 1.0 / 3.0) / ns, (j + 1.0 / 3.0) / ns) : Vec2((i + 0.5) / ns, 0.0);
        const Vec2 x = m.map(c, ref);
        const Jet jw = w.evaluate(c, x), jv = v.evaluate(c, x), ju = base.evaluate(c, x);
        const Jet xi = jv - jw;
        const auto dv = f_eps_derivatives(jv.grad, eps, dim);
        const auto dw = f_eps_derivatives(jw.grad, eps, dim);
        const auto du = f_eps_derivatives(ju.grad, eps, dim);
        const double base_terms = contract3(du.third, ju.hess, xi.grad) + contract(du.hessian, xi.hess);
        ExpansionSample s;
        s.cell = c;
        s.x = x;
        s.direct = contract(dv.hessian, jv.hess) - contract(dw.hessian, jw.hess) - base_terms;
        for (int k = 0; k < tq.size(); ++k) {
          const double t = tq.points[k].x();
          Jet a = jw;
          a.value += t * xi.value;
          a.grad += t * xi.grad;
          a.hess += t * xi.hess;
          const auto da = f_eps_derivatives(a.grad, eps, dim);
          s.expansion +=
              tq.weights[k] * (contract3(da.third, a.hess, xi.grad) + contract(da.hessian, xi.hess) - base_terms);
        }
        out.push_back(s);
      }
    }
  }
  return out;
}

void write_triplets(std::ostream& os, const SparseMatrix& m) {
  char buf[96];
  for (int r = 0; r < m.outerSize(); ++r) {
    for (SparseMatrix::InnerIterator it(m, r); it; ++it) {
      std::snprintf(buf, sizeof buf, "%d %d %.17g\n", static_cast<int>(it.row()), static_cast<int>(it.col()),
                    it.value());
      os << buf;
    }
  }
}

}  // namespace curvflow
