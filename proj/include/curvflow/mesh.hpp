#pragma once

#include <array>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "curvflow/types.hpp"

namespace curvflow {

/// Interval (-R, R) or disk of radius R centred at the origin.
struct Domain {
  enum class Kind { interval, disk };
  Kind kind = Kind::disk;
  double R = 1.0;

  int dim() const { return kind == Kind::interval ? 1 : 2; }
  double diameter() const { return 2.0 * R; }
  double volume() const;
  /// Default bound delta_0 for offset domains.
  double delta0() const { return R / 4.0; }
};

Domain interval_domain(double R);
Domain disk_domain(double R);

/// Negative inside, zero on the boundary, positive outside.
double signed_distance(const Domain& domain, const Vec2& x);

/// {d < delta}. Rejects delta <= -R and |delta| >= delta0 (default R/4).
Domain offset_domain(const Domain& domain, double delta, std::optional<double> delta0 = {});

/// Facet on the boundary of the mesh. In 2D an edge (a, b) of `cell`; when
/// `order` > 1 the edge is the polynomial curve
///   gamma(s) = (1-s) a + s b + sum_k control[k-1] C(q,k) s^k (1-s)^(q-k),
/// i.e. `control` holds the interior Bernstein coefficients of the
/// displacement from the chord. In 1D a single vertex (b = -1).
struct BoundaryFacet {
  std::array<int, 2> vertices{-1, -1};
  int cell = -1;
  int order = 1;
  std::vector<Vec2> control;
};

struct CellPoint {
  int cell = -1;
  Vec2 ref = Vec2::Zero();
};

/// Conforming simplicial mesh of an interval or a disk. Boundary cells of a
/// disk mesh may carry one curved edge, extended into the cell by the
/// polynomial blending map x(l) = sum_i l_i v_i + sum_k c_k C(q,k) l_b^k l_a^(q-k).
/// Immutable after construction.
class Mesh {
 public:
  Mesh(int dim, std::vector<Vec2> vertices, std::vector<std::array<int, 3>> cells,
       std::vector<BoundaryFacet> boundary);

  int dim() const { return dim_; }
  int num_vertices() const { return static_cast<int>(vertices_.size()); }
  int num_cells() const { return static_cast<int>(cells_.size()); }
  int num_edges() const { return static_cast<int>(edges_.size()); }

  const Vec2& vertex(int v) const { return vertices_[v]; }
  const std::vector<Vec2>& vertices() const { return vertices_; }
  /// Vertex indices of a cell; the third entry is -1 on the interval.
  const std::array<int, 3>& cell(int c) const { return cells_[c]; }
  int vertices_per_cell() const { return dim_ + 1; }

  /// 2D only. Edges are stored with increasing vertex indices.
  const std::array<int, 2>& edge(int e) const { return edges_[e]; }
  /// Local edge i of a cell is opposite to local vertex i.
  const std::array<int, 3>& cell_edges(int c) const { return cell_edges_[c]; }
  /// Cells adjacent to an edge; the second entry is -1 on the boundary.
  const std::array<int, 2>& edge_cells(int e) const { return edge_cells_[e]; }

  const std::vector<BoundaryFacet>& boundary_facets() const { return boundary_; }
  bool is_boundary_vertex(int v) const { return boundary_vertex_[v] != 0; }
  /// Index into boundary_facets() of the curved edge of a cell, or -1.
  int curved_facet(int c) const { return cell_curved_facet_[c]; }

  double h() const { return h_; }
  double shape_ratio() const { return shape_ratio_; }
  double cell_diameter(int c) const;

  /// Reference cell: [0,1] in 1D, the unit triangle in 2D (ref = (l1, l2)).
  Vec2 map(int c, const Vec2& ref) const;
  Mat2 jacobian(int c, const Vec2& ref) const;
  /// |det| of the reference-to-physical map (length ratio in 1D).
  double jacobian_det(int c, const Vec2& ref) const;
  /// Point on boundary facet f at curve parameter s in [0,1].
  Vec2 facet_point(int f, double s) const;

  std::optional<CellPoint> locate(const Vec2& x, double tol = 1e-10) const;

  friend bool operator==(const Mesh& a, const Mesh& b);

 private:
  void build_topology();
  void build_buckets();
  std::optional<Vec2> inverse_map(int c, const Vec2& x, double tol) const;

  int dim_;
  std::vector<Vec2> vertices_;
  std::vector<std::array<int, 3>> cells_;
  std::vector<BoundaryFacet> boundary_;

  std::vector<std::array<int, 2>> edges_;
  std::vector<std::array<int, 3>> cell_edges_;
  std::vector<std::array<int, 2>> edge_cells_;
  std::vector<char> boundary_vertex_;
  std::vector<int> cell_curved_facet_;
  double h_ = 0.0;
  double shape_ratio_ = 0.0;

  // uniform bucket grid over the bounding box for point location
  Vec2 box_lo_ = Vec2::Zero();
  double bucket_size_ = 1.0;
  int nbx_ = 1, nby_ = 1;
  std::vector<std::vector<int>> buckets_;
};

Mesh build_interval_mesh(double R, int cells);

/// Hexagon of radius R refined uniformly until h <= h_target, boundary
/// vertices on the circle, boundary edges of polynomial order q interpolating
/// the circle at q+1 equally spaced angles.
Mesh build_disk_mesh(double R, double h_target, int q);

/// Uniform refinement (bisection in 1D, red refinement in 2D). New boundary
/// vertices are projected onto the domain boundary; curved edges keep their order.
Mesh refine_uniform(const Mesh& mesh, const Domain& domain);

/// Replace every boundary edge by its order-q interpolant of the circle.
Mesh with_boundary_order(const Mesh& mesh, const Domain& domain, int q);

/// sup over boundary sample points of |d(x)| / h^wdeg.
double boundary_strip_constant(const Mesh& mesh, const Domain& domain, int wdeg,
                               int samples_per_facet = 11);

/// sup over boundary sample points of |d(x)|.
double boundary_deviation(const Mesh& mesh, const Domain& domain, int samples_per_facet = 11);

/// Text format:
///   dim nv nc nb
///   nv lines:  x [y]
///   nc lines:  vertex indices
///   nb lines:  1D: v cell      2D: a b cell q  cx1 cy1 ... cx(q-1) cy(q-1)
/// Doubles are written with 17 significant digits.
void write_mesh(std::ostream& os, const Mesh& mesh);
Mesh read_mesh(std::istream& is);

}  // namespace curvflow
