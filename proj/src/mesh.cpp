#include "curvflow/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>

namespace curvflow {

namespace {

double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

double bernstein(int q, int k, double s) {
  return binomial(q, k) * std::pow(s, k) * std::pow(1.0 - s, q - k);
}

// Interior Bernstein coefficients of the displacement between the chord
// a->b and the degree-q interpolant of the circle of radius R at q+1 equally
// spaced angles.
std::vector<Vec2> circle_controls(const Vec2& a, const Vec2& b, double R, int q) {
  if (q <= 1) return {};
  const double ta = std::atan2(a.y(), a.x());
  const double dt = std::remainder(std::atan2(b.y(), b.x()) - ta, 2.0 * std::numbers::pi);
  const int m = q - 1;
  Eigen::MatrixXd B(m, m);
  Eigen::MatrixXd rhs(m, 2);
  for (int j = 1; j <= m; ++j) {
    const double s = double(j) / q;
    const double t = ta + s * dt;
    const Vec2 target(R * std::cos(t), R * std::sin(t));
    const Vec2 d = target - ((1.0 - s) * a + s * b);
    rhs.row(j - 1) = d.transpose();
    for (int k = 1; k <= m; ++k) B(j - 1, k - 1) = bernstein(q, k, s);
  }
  const Eigen::MatrixXd beta = B.partialPivLu().solve(rhs);
  std::vector<Vec2> out(m);
  for (int k = 0; k < m; ++k) out[k] = beta.row(k).transpose();
  return out;
}

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

double Domain::volume() const {
  return kind == Kind::interval ? 2.0 * R : std::numbers::pi * R * R;
}

Domain interval_domain(double R) {
  if (!(R > 0.0)) throw ConfigError("domain radius must be > 0");
  return {Domain::Kind::interval, R};
}

Domain disk_domain(double R) {
  if (!(R > 0.0)) throw ConfigError("domain radius must be > 0");
  return {Domain::Kind::disk, R};
}

double signed_distance(const Domain& domain, const Vec2& x) {
  if (domain.kind == Domain::Kind::interval) return std::abs(x.x()) - domain.R;
  return x.norm() - domain.R;
}

Domain offset_domain(const Domain& domain, double delta, std::optional<double> delta0) {
  if (delta <= -domain.R) throw ConfigError("offset_domain: delta <= -R gives the empty set");
  const double bound = delta0.value_or(domain.delta0());
  if (std::abs(delta) >= bound) {
    throw ConfigError("offset_domain: |delta| = " + fmt17(std::abs(delta)) +
                      " not below delta0 = " + fmt17(bound));
  }
  return {domain.kind, domain.R + delta};
}

// ---------------------------------------------------------------------------

Mesh::Mesh(int dim, std::vector<Vec2> vertices, std::vector<std::array<int, 3>> cells,
           std::vector<BoundaryFacet> boundary)
    : dim_(dim), vertices_(std::move(vertices)), cells_(std::move(cells)), boundary_(std::move(boundary)) {
  if (dim_ != 1 && dim_ != 2) throw ConfigError("mesh dimension must be 1 or 2");
  if (cells_.empty()) throw ConfigError("mesh has no cells");
  const int nv = num_vertices();
  for (const auto& c : cells_) {
    for (int i = 0; i < dim_ + 1; ++i) {
      if (c[i] < 0 || c[i] >= nv) throw ConfigError("cell references missing vertex");
    }
  }
  build_topology();
  build_buckets();
}

void Mesh::build_topology() {
  const int nc = num_cells();
  boundary_vertex_.assign(vertices_.size(), 0);
  cell_curved_facet_.assign(nc, -1);

  if (dim_ == 1) {
    for (const auto& f : boundary_) {
      if (f.vertices[0] < 0 || f.vertices[0] >= num_vertices() || f.cell < 0 || f.cell >= nc) {
        throw ConfigError("boundary facet out of range");
      }
      boundary_vertex_[f.vertices[0]] = 1;
    }
  } else {
    std::map<std::pair<int, int>, int> index;
    cell_edges_.resize(nc);
    for (int c = 0; c < nc; ++c) {
      for (int i = 0; i < 3; ++i) {
        int a = cells_[c][(i + 1) % 3], b = cells_[c][(i + 2) % 3];
        if (a > b) std::swap(a, b);
        auto [it, inserted] = index.try_emplace({a, b}, num_edges());
        if (inserted) {
          edges_.push_back({a, b});
          edge_cells_.push_back({c, -1});
        } else {
          auto& ec = edge_cells_[it->second];
          if (ec[1] != -1) throw ConfigError("non-manifold edge in mesh");
          ec[1] = c;
        }
        cell_edges_[c][i] = it->second;
      }
    }
    int n_boundary_edges = 0;
    for (int e = 0; e < num_edges(); ++e) {
      if (edge_cells_[e][1] == -1) {
        ++n_boundary_edges;
        boundary_vertex_[edges_[e][0]] = 1;
        boundary_vertex_[edges_[e][1]] = 1;
      }
    }
    if (n_boundary_edges != static_cast<int>(boundary_.size())) {
      throw ConfigError("boundary facet list does not match mesh boundary");
    }
    for (int f = 0; f < static_cast<int>(boundary_.size()); ++f) {
      const auto& bf = boundary_[f];
      int a = bf.vertices[0], b = bf.vertices[1];
      if (a > b) std::swap(a, b);
      auto it = index.find({a, b});
      if (it == index.end() || edge_cells_[it->second][1] != -1 || edge_cells_[it->second][0] != bf.cell) {
        throw ConfigError("boundary facet " + std::to_string(f) + " is not a boundary edge of its cell");
      }
      if (bf.order < 1 || static_cast<int>(bf.control.size()) != bf.order - 1) {
        throw ConfigError("boundary facet " + std::to_string(f) + " has inconsistent order");
      }
      if (bf.order > 1) {
        if (cell_curved_facet_[bf.cell] != -1) {
          throw ConfigError("cell " + std::to_string(bf.cell) + " has more than one curved edge");
        }
        cell_curved_facet_[bf.cell] = f;
      }
    }
  }

  h_ = 0.0;
  shape_ratio_ = 0.0;
  for (int c = 0; c < nc; ++c) {
    const double diam = cell_diameter(c);
    h_ = std::max(h_, diam);
    if (dim_ == 1) {
      shape_ratio_ = std::max(shape_ratio_, 2.0);
    } else {
      const Vec2 &a = vertices_[cells_[c][0]], &b = vertices_[cells_[c][1]], &p = vertices_[cells_[c][2]];
      const Vec2 e1 = b - a, e2 = p - a;
      const double area = 0.5 * (e1.x() * e2.y() - e1.y() * e2.x());
      if (!(area > 0.0)) throw ConfigError("cell " + std::to_string(c) + " is degenerate or not counterclockwise");
      const double perimeter = (b - a).norm() + (p - b).norm() + (a - p).norm();
      shape_ratio_ = std::max(shape_ratio_, diam / (2.0 * area / perimeter));
    }
  }
}

double Mesh::cell_diameter(int c) const {
  const auto& cv = cells_[c];
  double d = 0.0;
  for (int i = 0; i <= dim_; ++i) {
    for (int j = i + 1; j <= dim_; ++j) d = std::max(d, (vertices_[cv[i]] - vertices_[cv[j]]).norm());
  }
  return d;
}

Vec2 Mesh::map(int c, const Vec2& ref) const {
  const auto& cv = cells_[c];
  if (dim_ == 1) return vertices_[cv[0]] + ref.x() * (vertices_[cv[1]] - vertices_[cv[0]]);
  const double l[3] = {1.0 - ref.x() - ref.y(), ref.x(), ref.y()};
  Vec2 x = l[0] * vertices_[cv[0]] + l[1] * vertices_[cv[1]] + l[2] * vertices_[cv[2]];
  const int f = cell_curved_facet_[c];
  if (f >= 0) {
    const auto& bf = boundary_[f];
    int ia = 0, ib = 0;
    for (int i = 0; i < 3; ++i) {
      if (cv[i] == bf.vertices[0]) ia = i;
      if (cv[i] == bf.vertices[1]) ib = i;
    }
    const int q = bf.order;
    for (int k = 1; k < q; ++k) {
      x += bf.control[k - 1] * (binomial(q, k) * std::pow(l[ib], k) * std::pow(l[ia], q - k));
    }
  }
  return x;
}

Mat2 Mesh::jacobian(int c, const Vec2& ref) const {
  const auto& cv = cells_[c];
  Mat2 J = Mat2::Zero();
  if (dim_ == 1) {
    J(0, 0) = vertices_[cv[1]].x() - vertices_[cv[0]].x();
    J(1, 1) = 1.0;
    return J;
  }
  J.col(0) = vertices_[cv[1]] - vertices_[cv[0]];
  J.col(1) = vertices_[cv[2]] - vertices_[cv[0]];
  const int f = cell_curved_facet_[c];
  if (f >= 0) {
    const auto& bf = boundary_[f];
    int ia = 0, ib = 0;
    for (int i = 0; i < 3; ++i) {
      if (cv[i] == bf.vertices[0]) ia = i;
      if (cv[i] == bf.vertices[1]) ib = i;
    }
    const double l[3] = {1.0 - ref.x() - ref.y(), ref.x(), ref.y()};
    // d lambda_i / d ref_j
    const double dl[3][2] = {{-1.0, -1.0}, {1.0, 0.0}, {0.0, 1.0}};
    const int q = bf.order;
    for (int k = 1; k < q; ++k) {
      const double C = binomial(q, k);
      const double ga = (q - k) * std::pow(l[ib], k) * std::pow(l[ia], q - k - 1);
      const double gb = k * std::pow(l[ib], k - 1) * std::pow(l[ia], q - k);
      for (int j = 0; j < 2; ++j) {
        J.col(j) += bf.control[k - 1] * (C * (ga * dl[ia][j] + gb * dl[ib][j]));
      }
    }
  }
  return J;
}

double Mesh::jacobian_det(int c, const Vec2& ref) const {
  if (dim_ == 1) return std::abs(vertices_[cells_[c][1]].x() - vertices_[cells_[c][0]].x());
  return std::abs(jacobian(c, ref).determinant());
}

Vec2 Mesh::facet_point(int f, double s) const {
  const auto& bf = boundary_[f];
  const Vec2& a = vertices_[bf.vertices[0]];
  if (dim_ == 1) return a;
  const Vec2& b = vertices_[bf.vertices[1]];
  Vec2 x = (1.0 - s) * a + s * b;
  for (int k = 1; k < bf.order; ++k) x += bf.control[k - 1] * bernstein(bf.order, k, s);
  return x;
}

void Mesh::build_buckets() {
  Vec2 lo = vertices_[0], hi = vertices_[0];
  for (const auto& v : vertices_) {
    lo = lo.cwiseMin(v);
    hi = hi.cwiseMax(v);
  }
  const double pad = 0.05 * h_ + 1e-12;
  lo.array() -= pad;
  hi.array() += pad;
  box_lo_ = lo;
  bucket_size_ = std::max(h_, 1e-12);
  nbx_ = std::max(1, static_cast<int>(std::ceil((hi.x() - lo.x()) / bucket_size_)));
  nby_ = dim_ == 1 ? 1 : std::max(1, static_cast<int>(std::ceil((hi.y() - lo.y()) / bucket_size_)));
  buckets_.assign(static_cast<size_t>(nbx_) * nby_, {});
  for (int c = 0; c < num_cells(); ++c) {
    Vec2 clo = vertices_[cells_[c][0]], chi = clo;
    for (int i = 1; i <= dim_; ++i) {
      clo = clo.cwiseMin(vertices_[cells_[c][i]]);
      chi = chi.cwiseMax(vertices_[cells_[c][i]]);
    }
    if (cell_curved_facet_[c] >= 0) {
      for (int s = 1; s < 8; ++s) {
        const Vec2 p = facet_point(cell_curved_facet_[c], s / 8.0);
        clo = clo.cwiseMin(p);
        chi = chi.cwiseMax(p);
      }
      clo.array() -= 0.05 * h_;
      chi.array() += 0.05 * h_;
    }
    auto clampx = [&](double v) { return std::clamp(static_cast<int>(std::floor((v - box_lo_.x()) / bucket_size_)), 0, nbx_ - 1); };
    auto clampy = [&](double v) { return std::clamp(static_cast<int>(std::floor((v - box_lo_.y()) / bucket_size_)), 0, nby_ - 1); };
    const int x0 = clampx(clo.x()), x1 = clampx(chi.x());
    const int y0 = dim_ == 1 ? 0 : clampy(clo.y()), y1 = dim_ == 1 ? 0 : clampy(chi.y());
    for (int j = y0; j <= y1; ++j) {
      for (int i = x0; i <= x1; ++i) buckets_[static_cast<size_t>(j) * nbx_ + i].push_back(c);
    }
  }
}

std::optional<Vec2> Mesh::inverse_map(int c, const Vec2& x, double tol) const {
  const auto& cv = cells_[c];
  if (dim_ == 1) {
    const double a = vertices_[cv[0]].x(), b = vertices_[cv[1]].x();
    const double t = (x.x() - a) / (b - a);
    if (t < -tol || t > 1.0 + tol) return std::nullopt;
    return Vec2(std::clamp(t, 0.0, 1.0), 0.0);
  }
  Mat2 A;
  A.col(0) = vertices_[cv[1]] - vertices_[cv[0]];
  A.col(1) = vertices_[cv[2]] - vertices_[cv[0]];
  Vec2 ref = A.partialPivLu().solve(x - vertices_[cv[0]]);
  if (cell_curved_facet_[c] >= 0) {
    for (int it = 0; it < 40; ++it) {
      const Vec2 r = map(c, ref) - x;
      if (r.norm() < 1e-15 * (1.0 + x.norm())) break;
      ref -= jacobian(c, ref).partialPivLu().solve(r);
      if (!ref.allFinite() || ref.norm() > 10.0) return std::nullopt;
    }
    if ((map(c, ref) - x).norm() > 1e-12 * (1.0 + x.norm())) return std::nullopt;
  }
  const double l0 = 1.0 - ref.x() - ref.y();
  if (l0 < -tol || ref.x() < -tol || ref.y() < -tol) return std::nullopt;
  return ref;
}

std::optional<CellPoint> Mesh::locate(const Vec2& x, double tol) const {
  const int i = static_cast<int>(std::floor((x.x() - box_lo_.x()) / bucket_size_));
  const int j = dim_ == 1 ? 0 : static_cast<int>(std::floor((x.y() - box_lo_.y()) / bucket_size_));
  if (i < 0 || i >= nbx_ || j < 0 || j >= nby_) return std::nullopt;
  for (int c : buckets_[static_cast<size_t>(j) * nbx_ + i]) {
    if (auto ref = inverse_map(c, x, tol)) return CellPoint{c, *ref};
  }
  return std::nullopt;
}

bool operator==(const Mesh& a, const Mesh& b) {
  if (a.dim_ != b.dim_ || a.vertices_ != b.vertices_ || a.cells_ != b.cells_) return false;
  if (a.boundary_.size() != b.boundary_.size()) return false;
  for (size_t f = 0; f < a.boundary_.size(); ++f) {
    const auto &x = a.boundary_[f], &y = b.boundary_[f];
    if (x.vertices != y.vertices || x.cell != y.cell || x.order != y.order || x.control != y.control) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------

Mesh build_interval_mesh(double R, int cells) {
  if (!(R > 0.0)) throw ConfigError("interval half-length must be > 0");
  if (cells < 1) throw ConfigError("interval mesh needs at least one cell");
  std::vector<Vec2> v(cells + 1);
  for (int i = 0; i <= cells; ++i) v[i] = Vec2(-R + 2.0 * R * i / cells, 0.0);
  v[cells].x() = R;
  std::vector<std::array<int, 3>> c(cells);
  for (int i = 0; i < cells; ++i) c[i] = {i, i + 1, -1};
  std::vector<BoundaryFacet> b(2);
  b[0].vertices = {0, -1};
  b[0].cell = 0;
  b[1].vertices = {cells, -1};
  b[1].cell = cells - 1;
  return Mesh(1, std::move(v), std::move(c), std::move(b));
}

namespace {

// Straight boundary facets for every boundary edge, oriented as in the cell.
std::vector<BoundaryFacet> straight_boundary(const std::vector<std::array<int, 3>>& cells) {
  std::map<std::pair<int, int>, int> count;
  for (const auto& c : cells) {
    for (int i = 0; i < 3; ++i) {
      int a = c[(i + 1) % 3], b = c[(i + 2) % 3];
      ++count[{std::min(a, b), std::max(a, b)}];
    }
  }
  std::vector<BoundaryFacet> out;
  for (int ci = 0; ci < static_cast<int>(cells.size()); ++ci) {
    const auto& c = cells[ci];
    for (int i = 0; i < 3; ++i) {
      int a = c[(i + 1) % 3], b = c[(i + 2) % 3];
      if (count[{std::min(a, b), std::max(a, b)}] == 1) {
        BoundaryFacet f;
        f.vertices = {a, b};
        f.cell = ci;
        out.push_back(f);
      }
    }
  }
  return out;
}

Mesh refine_straight(const Mesh& mesh, const Domain& domain) {
  if (mesh.dim() == 1) {
    std::vector<Vec2> v = mesh.vertices();
    std::vector<std::array<int, 3>> cells;
    for (int c = 0; c < mesh.num_cells(); ++c) {
      const auto& cv = mesh.cell(c);
      const int m = static_cast<int>(v.size());
      v.push_back(0.5 * (mesh.vertex(cv[0]) + mesh.vertex(cv[1])));
      cells.push_back({cv[0], m, -1});
      cells.push_back({m, cv[1], -1});
    }
    std::vector<BoundaryFacet> b;
    for (const auto& f : mesh.boundary_facets()) {
      BoundaryFacet g = f;
      const auto& cv = mesh.cell(f.cell);
      g.cell = 2 * f.cell + (f.vertices[0] == cv[0] ? 0 : 1);
      b.push_back(g);
    }
    return Mesh(1, std::move(v), std::move(cells), std::move(b));
  }

  std::vector<Vec2> v = mesh.vertices();
  std::vector<int> mid(mesh.num_edges());
  for (int e = 0; e < mesh.num_edges(); ++e) {
    const auto& ev = mesh.edge(e);
    Vec2 m = 0.5 * (mesh.vertex(ev[0]) + mesh.vertex(ev[1]));
    if (mesh.edge_cells(e)[1] == -1 && domain.kind == Domain::Kind::disk) m *= domain.R / m.norm();
    mid[e] = static_cast<int>(v.size());
    v.push_back(m);
  }
  std::vector<std::array<int, 3>> cells;
  cells.reserve(4 * mesh.num_cells());
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const auto& cv = mesh.cell(c);
    const auto& ce = mesh.cell_edges(c);
    // edge i is opposite vertex i
    const int m01 = mid[ce[2]], m12 = mid[ce[0]], m20 = mid[ce[1]];
    cells.push_back({cv[0], m01, m20});
    cells.push_back({m01, cv[1], m12});
    cells.push_back({m20, m12, cv[2]});
    cells.push_back({m01, m12, m20});
  }
  auto b = straight_boundary(cells);
  return Mesh(2, std::move(v), std::move(cells), std::move(b));
}

int max_boundary_order(const Mesh& mesh) {
  int q = 1;
  for (const auto& f : mesh.boundary_facets()) q = std::max(q, f.order);
  return q;
}

}  // namespace

Mesh with_boundary_order(const Mesh& mesh, const Domain& domain, int q) {
  if (q < 1) throw ConfigError("boundary order must be >= 1");
  if (mesh.dim() == 1) return mesh;
  if (domain.kind != Domain::Kind::disk) throw ConfigError("curved boundary needs a disk domain");
  std::vector<BoundaryFacet> b = mesh.boundary_facets();
  for (auto& f : b) {
    f.order = q;
    f.control = circle_controls(mesh.vertex(f.vertices[0]), mesh.vertex(f.vertices[1]), domain.R, q);
  }
  std::vector<std::array<int, 3>> cells(mesh.num_cells());
  for (int c = 0; c < mesh.num_cells(); ++c) cells[c] = mesh.cell(c);
  return Mesh(2, mesh.vertices(), std::move(cells), std::move(b));
}

Mesh build_disk_mesh(double R, double h_target, int q) {
  if (!(R > 0.0)) throw ConfigError("disk radius must be > 0");
  if (q < 1) throw ConfigError("boundary order must be >= 1");
  if (!(h_target > 0.0) || !(h_target < R)) {
    throw ConfigError("disk mesh: h_target must lie in (0, R), got " + fmt17(h_target));
  }
  std::vector<Vec2> v{Vec2::Zero()};
  for (int k = 0; k < 6; ++k) {
    const double t = k * std::numbers::pi / 3.0;
    v.emplace_back(R * std::cos(t), R * std::sin(t));
  }
  std::vector<std::array<int, 3>> cells;
  for (int k = 1; k <= 6; ++k) cells.push_back({0, k, k % 6 + 1});
  auto b = straight_boundary(cells);
  Mesh mesh(2, std::move(v), std::move(cells), std::move(b));
  const Domain domain = disk_domain(R);
  while (mesh.h() > h_target) {
    if (mesh.num_cells() > 4'000'000) throw ConfigError("disk mesh: h_target too small");
    mesh = refine_straight(mesh, domain);
  }
  return with_boundary_order(mesh, domain, q);
}

Mesh refine_uniform(const Mesh& mesh, const Domain& domain) {
  Mesh fine = refine_straight(mesh, domain);
  const int q = max_boundary_order(mesh);
  if (mesh.dim() == 2 && q > 1) return with_boundary_order(fine, domain, q);
  return fine;
}

double boundary_deviation(const Mesh& mesh, const Domain& domain, int samples_per_facet) {
  double dev = 0.0;
  const int ns = std::max(samples_per_facet, 2);
  for (int f = 0; f < static_cast<int>(mesh.boundary_facets().size()); ++f) {
    for (int i = 0; i < ns; ++i) {
      const double s = mesh.dim() == 1 ? 0.0 : double(i) / (ns - 1);
      dev = std::max(dev, std::abs(signed_distance(domain, mesh.facet_point(f, s))));
    }
  }
  return dev;
}

double boundary_strip_constant(const Mesh& mesh, const Domain& domain, int wdeg, int samples_per_facet) {
  return boundary_deviation(mesh, domain, samples_per_facet) / std::pow(mesh.h(), wdeg);
}

// ---------------------------------------------------------------------------

void write_mesh(std::ostream& os, const Mesh& mesh) {
  const int d = mesh.dim();
  os << d << ' ' << mesh.num_vertices() << ' ' << mesh.num_cells() << ' ' << mesh.boundary_facets().size() << '\n';
  for (const auto& v : mesh.vertices()) {
    os << fmt17(v.x());
    if (d == 2) os << ' ' << fmt17(v.y());
    os << '\n';
  }
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const auto& cv = mesh.cell(c);
    os << cv[0] << ' ' << cv[1];
    if (d == 2) os << ' ' << cv[2];
    os << '\n';
  }
  for (const auto& f : mesh.boundary_facets()) {
    if (d == 1) {
      os << f.vertices[0] << ' ' << f.cell << '\n';
      continue;
    }
    os << f.vertices[0] << ' ' << f.vertices[1] << ' ' << f.cell << ' ' << f.order;
    for (const auto& p : f.control) os << ' ' << fmt17(p.x()) << ' ' << fmt17(p.y());
    os << '\n';
  }
}

Mesh read_mesh(std::istream& is) {
  auto fail = [](const std::string& what) -> Mesh { throw ConfigError("mesh file: " + what); };
  int d = 0;
  long nv = 0, nc = 0, nb = 0;
  if (!(is >> d >> nv >> nc >> nb) || (d != 1 && d != 2) || nv < 1 || nc < 1 || nb < 0) {
    return fail("bad header, expected 'dim nv nc nb'");
  }
  std::vector<Vec2> v(nv, Vec2::Zero());
  for (auto& p : v) {
    if (!(is >> p.x())) return fail("truncated vertex list");
    if (d == 2 && !(is >> p.y())) return fail("truncated vertex list");
  }
  std::vector<std::array<int, 3>> cells(nc, {-1, -1, -1});
  for (auto& c : cells) {
    for (int i = 0; i <= d; ++i) {
      if (!(is >> c[i])) return fail("truncated cell list");
    }
  }
  std::vector<BoundaryFacet> b(nb);
  for (auto& f : b) {
    if (d == 1) {
      if (!(is >> f.vertices[0] >> f.cell)) return fail("truncated boundary list");
      continue;
    }
    if (!(is >> f.vertices[0] >> f.vertices[1] >> f.cell >> f.order) || f.order < 1 || f.order > 64) {
      return fail("bad boundary facet line");
    }
    f.control.resize(f.order - 1);
    for (auto& p : f.control) {
      if (!(is >> p.x() >> p.y())) return fail("truncated boundary control points");
    }
  }
  return Mesh(d, std::move(v), std::move(cells), std::move(b));
}

}  // namespace curvflow
