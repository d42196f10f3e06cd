#include <doctest.h>

#include <sstream>

#include "curvflow/boundary_map.hpp"
#include "curvflow/mesh.hpp"

using namespace curvflow;
using doctest::Approx;

TEST_SUITE("mesh") {
  TEST_CASE("interval mesh") {
    const Mesh m = build_interval_mesh(1.0, 4);
    CHECK(m.h() == Approx(0.5));
    CHECK(m.num_vertices() == 5);
    const Mesh one = build_interval_mesh(1.0, 1);
    CHECK(one.h() == Approx(2.0));
    CHECK(one.num_vertices() == 2);
    CHECK(build_interval_mesh(1.0, 8).h() == Approx(m.h() / 2));
    CHECK_THROWS_AS(build_interval_mesh(1.0, 0), ConfigError);
    CHECK(boundary_strip_constant(m, interval_domain(1.0), 3) == 0.0);
  }

  TEST_CASE("disk mesh boundary vertices on the circle") {
    const Mesh m = build_disk_mesh(1.0, 0.4, 1);
    for (int v = 0; v < m.num_vertices(); ++v) {
      if (m.is_boundary_vertex(v)) CHECK(m.vertex(v).norm() == Approx(1.0).epsilon(1e-14));
    }
    CHECK(m.h() <= 0.4);
    CHECK_THROWS_AS(build_disk_mesh(1.0, 1.5, 1), ConfigError);
  }

  TEST_CASE("chord deviation") {
    const Mesh m = build_disk_mesh(1.0, 0.4, 1);
    const Domain d = disk_domain(1.0);
    double sag = 0.0;
    for (const auto& f : m.boundary_facets()) {
      const double l = (m.vertex(f.vertices[0]) - m.vertex(f.vertices[1])).norm();
      sag = std::max(sag, 1.0 - std::sqrt(1.0 - l * l / 4.0));
    }
    CHECK(boundary_deviation(m, d) == Approx(sag).epsilon(1e-6));
  }

  TEST_CASE("boundary strip constant") {
    const Domain d = disk_domain(1.0);
    Mesh m = build_disk_mesh(1.0, 0.7, 1);
    std::vector<double> c2, c3;
    for (int l = 0; l < 4; ++l) {
      c2.push_back(boundary_strip_constant(m, d, 2));
      c3.push_back(boundary_strip_constant(m, d, 3));
      m = refine_uniform(m, d);
    }
    for (int l = 1; l < 4; ++l) {
      CHECK(c2[l] <= 1.5 * c2[0]);
      CHECK(c3[l] > 1.5 * c3[l - 1]);
    }
  }

  TEST_CASE("curved edges converge faster") {
    const Domain d = disk_domain(1.0);
    double prev = 0.0;
    for (int l = 0; l < 3; ++l) {
      const Mesh m = build_disk_mesh(1.0, 0.7 / std::pow(2.0, l), 2);
      const double dev = boundary_deviation(m, d);
      if (l > 0) CHECK(prev / dev > 7.0);
      prev = dev;
    }
  }

  TEST_CASE("refinement") {
    const Domain d = disk_domain(1.0);
    const Mesh m = build_disk_mesh(1.0, 0.7, 1);
    const Mesh f = refine_uniform(m, d);
    CHECK(f.h() == Approx(m.h() / 2).epsilon(0.1));
    CHECK(f.shape_ratio() <= 2.0 * m.shape_ratio());
    CHECK(f.num_cells() == 4 * m.num_cells());
  }

  TEST_CASE("mesh stays inside the offset domain") {
    const Domain d = disk_domain(1.0);
    for (int q : {1, 2, 3}) {
      const Mesh m = build_disk_mesh(1.0, 0.5, q);
      for (int c = 0; c < m.num_cells(); ++c) {
        for (double s : {0.1, 0.3, 0.5}) {
          CHECK(signed_distance(d, m.map(c, Vec2(s, 1.0 - s))) < d.delta0());
        }
      }
    }
  }

  TEST_CASE("signed distance and offsets") {
    const Domain d = disk_domain(1.0);
    CHECK(signed_distance(d, Vec2::Zero()) == -1.0);
    CHECK(signed_distance(d, Vec2(0.6, 0.8)) == Approx(0.0));
    CHECK(signed_distance(disk_domain(2.0), Vec2(3.0, 0.0)) == 1.0);
    CHECK(offset_domain(d, 0.0).R == 1.0);
    CHECK(offset_domain(d, 0.1).R == Approx(1.1));
    CHECK_THROWS_AS(offset_domain(d, -1.0), ConfigError);
  }

  TEST_CASE("point location and maps") {
    const Mesh m = build_disk_mesh(1.0, 0.3, 2);
    for (int c = 0; c < m.num_cells(); c += 7) {
      const Vec2 x = m.map(c, Vec2(0.2, 0.3));
      auto p = m.locate(x);
      REQUIRE(p);
      CHECK((m.map(p->cell, p->ref) - x).norm() < 1e-10);
    }
    CHECK_FALSE(m.locate(Vec2(2.0, 0.0)));
  }

  TEST_CASE("text format round trip") {
    for (int q : {1, 3}) {
      const Mesh m = build_disk_mesh(1.0, 0.5, q);
      std::stringstream ss;
      write_mesh(ss, m);
      const Mesh back = read_mesh(ss);
      CHECK(back == m);
      std::stringstream again;
      write_mesh(again, back);
      std::stringstream first;
      write_mesh(first, m);
      CHECK(again.str() == first.str());
    }
    const Mesh line = build_interval_mesh(0.7, 5);
    std::stringstream ss;
    write_mesh(ss, line);
    CHECK(read_mesh(ss) == line);
  }

  TEST_CASE("deterministic construction") {
    CHECK(build_disk_mesh(1.0, 0.3, 2) == build_disk_mesh(1.0, 0.3, 2));
  }

  TEST_CASE("boundary map") {
    const Domain d = disk_domain(1.0);
    const double eps = 0.3;  // identity for signed distance <= -2 eps
    const Mesh m = build_disk_mesh(1.0, eps * eps, 1);
    const BoundaryMap phi(d, m, eps);
    CHECK(phi.cutoff(-2.5 * eps) == 0.0);
    CHECK(phi.cutoff(-0.5 * eps) == 1.0);
    for (int v = 0; v < m.num_vertices(); ++v) {
      if (m.is_boundary_vertex(v)) CHECK(phi.apply(m.vertex(v)).norm() == Approx(1.0).epsilon(1e-12));
    }
    const Vec2 inner(0.1, -0.2);
    CHECK((phi.apply(inner) - inner).norm() < 1e-15);
    CHECK(phi.det_min() > 0.5);
    CHECK(phi.det_max() < 1.5);
    // boundary points of the discrete edges land on the circle
    for (const auto& f : m.boundary_facets()) {
      const Vec2 mid = 0.5 * (m.vertex(f.vertices[0]) + m.vertex(f.vertices[1]));
      CHECK(phi.apply(mid).norm() == Approx(1.0).epsilon(1e-3));
    }
    for (double t = -2.0 * eps; t <= 0.0; t += eps / 20) {
      CHECK(phi.cutoff_d1(t) >= 0.0);
      CHECK(phi.cutoff_d1(t) <= 2.0 / eps);
      CHECK(std::abs(phi.cutoff_d2(t)) <= 6.0 / (eps * eps));
    }
    CHECK_THROWS_AS(BoundaryMap(d, build_disk_mesh(1.0, 0.7, 1), 0.3), ConfigError);
  }
}
