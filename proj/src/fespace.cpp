#include "curvflow/fespace.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <random>

namespace curvflow {

namespace {

Jet jet_from_row(const BasisJets& b, int k) {
  Jet j;
  j.value = b(k, 0);
  j.grad = Vec2(b(k, 1), b(k, 2));
  j.hess << b(k, 3), b(k, 4), b(k, 4), b(k, 5);
  return j;
}

// Jets of the scaled monomials ((x - c)/s)^i ((y - c)/s)^j, i + j <= p in 2D
// or ((x - c)/s)^i in 1D.
BasisJets monomial_jets(int dim, int p, const Vec2& centre, double s, const Vec2& x) {
  const Vec2 xi = (x - centre) / s;
  auto pw = [](double b, int e) { return e < 0 ? 0.0 : std::pow(b, e); };
  if (dim == 1) {
    BasisJets m = BasisJets::Zero(p + 1, 6);
    for (int i = 0; i <= p; ++i) {
      m(i, 0) = pw(xi.x(), i);
      m(i, 1) = i * pw(xi.x(), i - 1) / s;
      m(i, 3) = i * (i - 1) * pw(xi.x(), i - 2) / (s * s);
    }
    return m;
  }
  BasisJets m = BasisJets::Zero((p + 1) * (p + 2) / 2, 6);
  int r = 0;
  for (int d = 0; d <= p; ++d) {
    for (int j = 0; j <= d; ++j, ++r) {
      const int i = d - j;
      const double a0 = pw(xi.x(), i), a1 = i * pw(xi.x(), i - 1), a2 = i * (i - 1) * pw(xi.x(), i - 2);
      const double b0 = pw(xi.y(), j), b1 = j * pw(xi.y(), j - 1), b2 = j * (j - 1) * pw(xi.y(), j - 2);
      m(r, 0) = a0 * b0;
      m(r, 1) = a1 * b0 / s;
      m(r, 2) = a0 * b1 / s;
      m(r, 3) = a2 * b0 / (s * s);
      m(r, 4) = a1 * b1 / (s * s);
      m(r, 5) = a0 * b2 / (s * s);
    }
  }
  return m;
}

Vec2 rotate_cw(const Vec2& t) { return Vec2(t.y(), -t.x()); }

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

int ElementKind::local_dofs() const {
  switch (family) {
    case ElementFamily::hermite3: return 4;
    case ElementFamily::hermite5: return 6;
    case ElementFamily::argyris: return 21;
  }
  return 0;
}

std::string ElementKind::name() const {
  switch (family) {
    case ElementFamily::hermite3: return "hermite3";
    case ElementFamily::hermite5: return "hermite5";
    case ElementFamily::argyris: return "argyris";
  }
  return "";
}

ElementKind ElementKind::parse(const std::string& name) {
  if (name == "hermite3") return {ElementFamily::hermite3};
  if (name == "hermite5") return {ElementFamily::hermite5};
  if (name == "argyris") return {ElementFamily::argyris};
  throw ConfigError("unknown element '" + name + "' (expected hermite3, hermite5 or argyris)");
}

double DofFunctional::apply(const Jet& j) const {
  switch (order) {
    case 0: return j.value;
    case 1: return j.grad.dot(dir1);
    default: return dir1.dot(j.hess * dir2) + grad_weight * j.grad.dot(grad_dir);
  }
}

// ---------------------------------------------------------------------------

FESpace::FESpace(std::shared_ptr<const Mesh> mesh, ElementKind kind, bool constrained, int quad_degree)
    : mesh_(std::move(mesh)), kind_(kind), constrained_(constrained) {
  if (!mesh_) throw ConfigError("FESpace: null mesh");
  if (mesh_->dim() != kind_.dim()) {
    throw ConfigError("element " + kind_.name() + " needs a " + std::to_string(kind_.dim()) + "D mesh");
  }
  const int deg = kind_.degree();
  if (quad_degree < 0) quad_degree = 2 * deg;
  if (quad_degree < 2 * (deg - 1)) {
    throw ConfigError("quadrature degree " + std::to_string(quad_degree) + " below 2(deg-1) = " +
                      std::to_string(2 * (deg - 1)));
  }
  rule_ = reference_rule(mesh_->dim(), quad_degree);
  build_dofs();
}

void FESpace::build_dofs() {
  const Mesh& m = *mesh_;
  const int nv = m.num_vertices();
  const int nc = m.num_cells();
  const int deg = kind_.degree();
  cell_dofs_.assign(nc, {});

  if (m.dim() == 1) {
    const int per = deg == 3 ? 2 : 3;
    functionals_.resize(static_cast<size_t>(per) * nv);
    for (int v = 0; v < nv; ++v) {
      for (int k = 0; k < per; ++k) {
        auto& f = functionals_[per * v + k];
        f.point = m.vertex(v);
        f.order = k;
      }
      if (m.is_boundary_vertex(v)) boundary_dofs_.push_back(per * v);
    }
    for (int c = 0; c < nc; ++c) {
      for (int i = 0; i < 2; ++i) {
        for (int k = 0; k < per; ++k) cell_dofs_[c].push_back(per * m.cell(c)[i] + k);
      }
    }
  } else {
    // outward normals at boundary vertices from the adjacent chords
    std::vector<Vec2> normal(nv, Vec2::Zero());
    std::vector<std::vector<int>> neighbours(nv);
    for (const auto& f : m.boundary_facets()) {
      neighbours[f.vertices[0]].push_back(f.vertices[1]);
      neighbours[f.vertices[1]].push_back(f.vertices[0]);
      const Vec2 a = m.vertex(f.vertices[0]), b = m.vertex(f.vertices[1]);
      Vec2 n = rotate_cw((b - a).normalized());
      Vec2 centroid = Vec2::Zero();
      for (int i = 0; i < 3; ++i) centroid += m.vertex(m.cell(f.cell)[i]) / 3.0;
      if (n.dot(a - centroid) < 0.0) n = -n;
      normal[f.vertices[0]] += n;
      normal[f.vertices[1]] += n;
    }
    functionals_.resize(6 * static_cast<size_t>(nv) + m.num_edges());
    for (int v = 0; v < nv; ++v) {
      Vec2 e1 = Vec2::UnitX(), e2 = Vec2::UnitY();
      if (m.is_boundary_vertex(v)) {
        e1 = normal[v].normalized();
        e2 = Vec2(-e1.y(), e1.x());
        boundary_dofs_.push_back(6 * v);
        boundary_dofs_.push_back(6 * v + 2);
        boundary_dofs_.push_back(6 * v + 5);
      }
      const Vec2 dirs[6][2] = {{e1, e1}, {e1, e1}, {e2, e2}, {e1, e1}, {e1, e2}, {e2, e2}};
      const int orders[6] = {0, 1, 1, 2, 2, 2};
      for (int k = 0; k < 6; ++k) {
        auto& f = functionals_[6 * v + k];
        f.point = m.vertex(v);
        f.order = orders[k];
        f.dir1 = dirs[k][0];
        f.dir2 = dirs[k][1];
      }
      if (m.is_boundary_vertex(v) && neighbours[v].size() == 2) {
        const Vec2 a = m.vertex(neighbours[v][0]) - m.vertex(v), b = m.vertex(neighbours[v][1]) - m.vertex(v);
        const double area2 = std::abs(a.x() * b.y() - a.y() * b.x());
        const double kappa = 2.0 * area2 / (a.norm() * b.norm() * (a - b).norm());
        auto& f = functionals_[6 * v + 5];
        f.grad_weight = -kappa;
        f.grad_dir = e1;
      }
    }
    for (int e = 0; e < m.num_edges(); ++e) {
      const Vec2 a = m.vertex(m.edge(e)[0]), b = m.vertex(m.edge(e)[1]);
      auto& f = functionals_[6 * nv + e];
      f.point = 0.5 * (a + b);
      f.order = 1;
      f.dir1 = f.dir2 = rotate_cw((b - a).normalized());
    }
    for (int c = 0; c < nc; ++c) {
      for (int i = 0; i < 3; ++i) {
        for (int k = 0; k < 6; ++k) cell_dofs_[c].push_back(6 * m.cell(c)[i] + k);
      }
      for (int i = 0; i < 3; ++i) cell_dofs_[c].push_back(6 * nv + m.cell_edges(c)[i]);
    }
  }
  std::sort(boundary_dofs_.begin(), boundary_dofs_.end());

  free_index_.assign(functionals_.size(), 0);
  if (constrained_) {
    for (int d : boundary_dofs_) free_index_[d] = -1;
  }
  num_free_ = 0;
  for (auto& fi : free_index_) {
    if (fi == 0) fi = num_free_++;
  }

  centre_.resize(nc);
  scale_.resize(nc);
  coeffs_.resize(nc);
  const int nl = kind_.local_dofs();
  for (int c = 0; c < nc; ++c) {
    Vec2 centre = Vec2::Zero();
    for (int i = 0; i <= m.dim(); ++i) centre += m.vertex(m.cell(c)[i]);
    centre_[c] = centre / (m.dim() + 1);
    scale_[c] = m.cell_diameter(c);
    Eigen::MatrixXd V(nl, nl);
    for (int k = 0; k < nl; ++k) {
      const auto& f = functionals_[cell_dofs_[c][k]];
      const BasisJets mj = monomial_jets(m.dim(), deg, centre_[c], scale_[c], f.point);
      for (int r = 0; r < nl; ++r) V(k, r) = f.apply(jet_from_row(mj, r));
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(V);
    if (!lu.isInvertible()) throw Error("FESpace: singular local dof system in cell " + std::to_string(c));
    coeffs_[c] = lu.inverse();
  }
}

BasisJets FESpace::basis(int c, const Vec2& x) const {
  const BasisJets mj = monomial_jets(mesh_->dim(), kind_.degree(), centre_[c], scale_[c], x);
  return coeffs_[c].transpose() * mj;
}

const FESpace::CellQuadrature& FESpace::cell_quadrature(int c) const {
  std::call_once(quad_once_, [this] {
    const Mesh& m = *mesh_;
    quad_.resize(m.num_cells());
    const int nq = rule_.size();
    const int nl = kind_.local_dofs();
    for (int cell = 0; cell < m.num_cells(); ++cell) {
      auto& cq = quad_[cell];
      cq.weight.resize(nq);
      cq.x.resize(nq);
      for (auto& j : cq.jets) j.resize(nl, nq);
      for (int q = 0; q < nq; ++q) {
        const Vec2& r = rule_.points[q];
        cq.x[q] = m.map(cell, r);
        cq.weight(q) = rule_.weights[q] * m.jacobian_det(cell, r);
        const BasisJets b = basis(cell, cq.x[q]);
        for (int k = 0; k < 6; ++k) cq.jets[k].col(q) = b.col(k);
      }
    }
  });
  return quad_[c];
}

FESpace FESpace::with_constraint(bool constrained) const {
  return FESpace(mesh_, kind_, constrained, rule_.degree);
}

std::shared_ptr<const FESpace> build_space(std::shared_ptr<const Mesh> mesh, ElementKind kind, bool constrained,
                                           int quad_degree) {
  return std::make_shared<const FESpace>(std::move(mesh), kind, constrained, quad_degree);
}

// ---------------------------------------------------------------------------

DiscreteField::DiscreteField(std::shared_ptr<const FESpace> space, Eigen::VectorXd coefficients)
    : space_(std::move(space)), coeffs_(std::move(coefficients)) {
  if (coeffs_.size() != space_->num_dofs()) throw Error("DiscreteField: coefficient length mismatch");
}

DiscreteField DiscreteField::zero(std::shared_ptr<const FESpace> space) {
  const int n = space->num_dofs();
  return DiscreteField(std::move(space), Eigen::VectorXd::Zero(n));
}

Eigen::VectorXd DiscreteField::local(int cell) const {
  const auto& dofs = space_->cell_dofs(cell);
  Eigen::VectorXd v(dofs.size());
  for (size_t k = 0; k < dofs.size(); ++k) v(k) = coeffs_(dofs[k]);
  return v;
}

Eigen::VectorXd DiscreteField::free_coefficients() const {
  Eigen::VectorXd v(space_->num_free());
  for (int d = 0; d < space_->num_dofs(); ++d) {
    if (space_->free_index(d) >= 0) v(space_->free_index(d)) = coeffs_(d);
  }
  return v;
}

void DiscreteField::set_free_coefficients(const Eigen::VectorXd& v) {
  for (int d = 0; d < space_->num_dofs(); ++d) {
    const int f = space_->free_index(d);
    coeffs_(d) = f >= 0 ? v(f) : 0.0;
  }
}

Jet DiscreteField::evaluate(int cell, const Vec2& x) const {
  const BasisJets b = space_->basis(cell, x);
  const auto& dofs = space_->cell_dofs(cell);
  Eigen::Matrix<double, 1, 6> s = Eigen::Matrix<double, 1, 6>::Zero();
  for (int k = 0; k < static_cast<int>(dofs.size()); ++k) s += coeffs_(dofs[k]) * b.row(k);
  Jet j;
  j.value = s(0);
  j.grad = Vec2(s(1), s(2));
  j.hess << s(3), s(4), s(4), s(5);
  return j;
}

Jet DiscreteField::evaluate(const Vec2& x) const {
  const auto loc = space_->mesh().locate(x);
  if (!loc) throw Error("evaluate: point outside the mesh");
  return evaluate(loc->cell, x);
}

DiscreteField DiscreteField::operator-(const DiscreteField& o) const {
  return DiscreteField(space_, coeffs_ - o.coeffs_);
}
DiscreteField DiscreteField::operator+(const DiscreteField& o) const {
  return DiscreteField(space_, coeffs_ + o.coeffs_);
}
DiscreteField DiscreteField::operator*(double s) const { return DiscreteField(space_, s * coeffs_); }

DiscreteField interpolate(std::shared_ptr<const FESpace> space, const JetFn& fn) {
  Eigen::VectorXd c(space->num_dofs());
  for (int d = 0; d < space->num_dofs(); ++d) {
    const auto& f = space->functional(d);
    c(d) = space->is_constrained(d) ? 0.0 : f.apply(fn(f.point));
  }
  return DiscreteField(std::move(space), std::move(c));
}

DiscreteField boundary_corrected_interpolant(std::shared_ptr<const FESpace> unconstrained,
                                             std::shared_ptr<const FESpace> constrained, const JetFn& fn) {
  if (unconstrained->constrained() || !constrained->constrained()) {
    throw ConfigError("boundary_corrected_interpolant: expects (unconstrained, constrained) spaces");
  }
  if (unconstrained->num_dofs() != constrained->num_dofs()) {
    throw ConfigError("boundary_corrected_interpolant: spaces differ");
  }
  DiscreteField full = interpolate(unconstrained, fn);
  Eigen::VectorXd z = Eigen::VectorXd::Zero(full.coefficients().size());
  for (int d : unconstrained->boundary_dofs()) z(d) = full.coefficients()(d);
  return DiscreteField(std::move(constrained), full.coefficients() - z);
}

// ---------------------------------------------------------------------------

double sobolev_norm(const Mesh& mesh, const QuadratureRule& rule, const CellJetFn& f, int m, double p) {
  if (m < 0 || m > 2) throw ConfigError("norm: m must be 0, 1 or 2");
  if (!(p >= 1.0)) throw ConfigError("norm: p must be >= 1");
  auto parts = [m](const Jet& j) {
    std::array<double, 3> a{std::abs(j.value), m >= 1 ? j.grad.norm() : 0.0, m >= 2 ? j.hess.norm() : 0.0};
    return a;
  };
  if (std::isinf(p)) {
    std::vector<Vec2> refs;
    for (int i = 0; i <= 4; ++i) {
      if (mesh.dim() == 1) {
        refs.emplace_back(i / 4.0, 0.0);
      } else {
        for (int j = 0; i + j <= 4; ++j) refs.emplace_back(i / 4.0, j / 4.0);
      }
    }
    refs.insert(refs.end(), rule.points.begin(), rule.points.end());
    double sup = 0.0;
    for (int c = 0; c < mesh.num_cells(); ++c) {
      for (const auto& r : refs) {
        for (double v : parts(f(c, mesh.map(c, r)))) sup = std::max(sup, v);
      }
    }
    return sup;
  }
  double sum = 0.0;
  for (int c = 0; c < mesh.num_cells(); ++c) {
    double cell_sum = 0.0;
    for (int q = 0; q < rule.size(); ++q) {
      const Vec2& r = rule.points[q];
      const double w = rule.weights[q] * mesh.jacobian_det(c, r);
      double s = 0.0;
      for (double v : parts(f(c, mesh.map(c, r)))) s += std::pow(v, p);
      cell_sum += w * s;
    }
    sum += cell_sum;
  }
  return std::pow(sum, 1.0 / p);
}

double field_norm(const DiscreteField& f, int m, double p) {
  const FESpace& s = f.space();
  if (std::isinf(p) || m < 0 || m > 2 || !(p >= 1.0)) {
    return sobolev_norm(s.mesh(), s.rule(), [&](int c, const Vec2& x) { return f.evaluate(c, x); }, m, p);
  }
  double sum = 0.0;
  for (int c = 0; c < s.mesh().num_cells(); ++c) {
    const auto& cq = s.cell_quadrature(c);
    const Eigen::VectorXd loc = f.local(c);
    std::array<Eigen::VectorXd, 6> v;
    for (int k = 0; k < 6; ++k) v[k] = cq.jets[k].transpose() * loc;
    for (int q = 0; q < cq.weight.size(); ++q) {
      double t = std::pow(std::abs(v[0](q)), p);
      if (m >= 1) t += std::pow(std::hypot(v[1](q), v[2](q)), p);
      if (m >= 2) {
        t += std::pow(std::sqrt(v[3](q) * v[3](q) + 2.0 * v[4](q) * v[4](q) + v[5](q) * v[5](q)), p);
      }
      sum += cq.weight(q) * t;
    }
  }
  return std::pow(sum, 1.0 / p);
}

double interpolation_error(std::shared_ptr<const FESpace> space, const JetFn& fn, int m, double p) {
  const DiscreteField I = interpolate(space, fn);
  const int deg = space->kind().degree();
  const QuadratureRule rule = reference_rule(space->mesh().dim(), std::max(space->quad_degree(), 2 * deg + 2));
  return sobolev_norm(space->mesh(), rule, [&](int c, const Vec2& x) { return fn(x) - I.evaluate(c, x); }, m, p);
}

double inverse_estimate_ratio(const std::vector<DiscreteField>& fields, int l, double p, int m, double q) {
  if (!(0 <= m && m <= l && l <= 2)) throw ConfigError("inverse estimate: need 0 <= m <= l <= 2");
  double best = 0.0;
  for (const auto& v : fields) {
    const Mesh& mesh = v.space().mesh();
    const double d = mesh.dim();
    const double dp = std::isinf(p) ? 0.0 : d / p;
    const double dq = std::isinf(q) ? 0.0 : d / q;
    const double scale = std::pow(mesh.h(), m - l + std::min(0.0, dp - dq));
    const auto f = [&](int c, const Vec2& x) { return v.evaluate(c, x); };
    const double num = sobolev_norm(mesh, v.space().rule(), f, l, p);
    const double den = sobolev_norm(mesh, v.space().rule(), f, m, q);
    if (den > 0.0) best = std::max(best, num / (scale * den));
  }
  return best;
}

double inverse_estimate_ratio(std::shared_ptr<const FESpace> space, int trials, int l, double p, int m, double q,
                              std::uint64_t seed) {
  if (trials < 1) throw ConfigError("inverse estimate: trials must be >= 1");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  std::vector<DiscreteField> fields;
  for (int t = 0; t < trials; ++t) {
    Eigen::VectorXd v(space->num_free());
    for (int i = 0; i < v.size(); ++i) v(i) = dist(rng);
    DiscreteField f = DiscreteField::zero(space);
    f.set_free_coefficients(v);
    fields.push_back(std::move(f));
  }
  return inverse_estimate_ratio(fields, l, p, m, q);
}

ConformityDefect conformity_defect(const DiscreteField& field, int samples) {
  const Mesh& m = field.space().mesh();
  ConformityDefect d;
  auto compare = [&](int c0, int c1, const Vec2& x) {
    const Jet a = field.evaluate(c0, x), b = field.evaluate(c1, x);
    d.value = std::max(d.value, std::abs(a.value - b.value));
    d.gradient = std::max(d.gradient, (a.grad - b.grad).norm());
    d.hessian = std::max(d.hessian, (a.hess - b.hess).norm());
  };
  if (m.dim() == 1) {
    for (int c = 0; c + 1 < m.num_cells(); ++c) {
      // interval cells share the right vertex of c with the left of the next cell
      for (int c1 = 0; c1 < m.num_cells(); ++c1) {
        if (m.cell(c1)[0] == m.cell(c)[1]) compare(c, c1, m.vertex(m.cell(c)[1]));
      }
    }
    return d;
  }
  for (int e = 0; e < m.num_edges(); ++e) {
    const auto& ec = m.edge_cells(e);
    if (ec[1] < 0) continue;
    const Vec2 a = m.vertex(m.edge(e)[0]), b = m.vertex(m.edge(e)[1]);
    for (int i = 0; i < samples; ++i) {
      const double s = (i + 0.5) / samples;
      compare(ec[0], ec[1], (1.0 - s) * a + s * b);
    }
  }
  return d;
}

BoundaryTrace boundary_trace(const DiscreteField& field, int samples) {
  const Mesh& m = field.space().mesh();
  BoundaryTrace t;
  const auto& facets = m.boundary_facets();
  for (int f = 0; f < static_cast<int>(facets.size()); ++f) {
    const int c = facets[f].cell;
    const int nv = m.dim() == 1 ? 1 : 2;
    for (int i = 0; i < nv; ++i) {
      t.at_vertices = std::max(t.at_vertices, std::abs(field.evaluate(c, m.vertex(facets[f].vertices[i])).value));
    }
    if (m.dim() == 1) continue;
    for (int i = 0; i < samples; ++i) {
      const double s = (i + 0.5) / samples;
      t.on_facets = std::max(t.on_facets, std::abs(field.evaluate(c, m.facet_point(f, s)).value));
    }
  }
  t.on_facets = std::max(t.on_facets, t.at_vertices);
  return t;
}

void write_field_csv(std::ostream& os, const DiscreteField& field, int samples) {
  const Mesh& m = field.space().mesh();
  const bool two = m.dim() == 2;
  os << (two ? "x,y,value,dx,dy,dxx,dxy,dyy\n" : "x,value,dx,dxx\n");
  for (int c = 0; c < m.num_cells(); ++c) {
    for (int i = 0; i < samples; ++i) {
      for (int j = 0; j < (two ? samples - i : 1); ++j) {
        const Vec2 ref = two ? Vec2((i + 1.0 / 3.0) / samples, (j + 1.0 / 3.0) / samples) : Vec2((i + 0.5) / samples, 0.0);
        const Vec2 x = m.map(c, ref);
        const Jet jt = field.evaluate(c, x);
        if (two) {
          os << fmt17(x.x()) << ',' << fmt17(x.y()) << ',' << fmt17(jt.value) << ',' << fmt17(jt.grad.x()) << ','
             << fmt17(jt.grad.y()) << ',' << fmt17(jt.hess(0, 0)) << ',' << fmt17(jt.hess(0, 1)) << ','
             << fmt17(jt.hess(1, 1)) << '\n';
        } else {
          os << fmt17(x.x()) << ',' << fmt17(jt.value) << ',' << fmt17(jt.grad.x()) << ',' << fmt17(jt.hess(0, 0))
             << '\n';
        }
      }
    }
  }
}

nlohmann::json field_sidecar(const DiscreteField& field) {
  const auto& s = field.space();
  const auto& c = field.coefficients();
  return {{"element", s.kind().name()},
          {"constrained", s.constrained()},
          {"num_dofs", s.num_dofs()},
          {"num_cells", s.mesh().num_cells()},
          {"h", s.mesh().h()},
          {"coefficients", std::vector<double>(c.data(), c.data() + c.size())}};
}

}  // namespace curvflow
