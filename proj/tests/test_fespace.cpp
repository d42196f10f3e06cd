#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "curvflow/fespace.hpp"

using namespace curvflow;
using doctest::Approx;

namespace {

const double kPi = std::acos(-1.0);

// Cubic-ish polynomial of total degree p in two variables, with derivatives.
JetFn poly2(int p) {
  return [p](const Vec2& x) {
    Jet j;
    const double a = x.x(), b = x.y();
    // sum over i + k <= p of c_ik a^i b^k with c_ik = 1 / (1 + i + 2k)
    for (int i = 0; i <= p; ++i) {
      for (int k = 0; i + k <= p; ++k) {
        const double c = 1.0 / (1 + i + 2 * k);
        auto pw = [](double t, int e) { return e < 0 ? 0.0 : std::pow(t, e); };
        j.value += c * pw(a, i) * pw(b, k);
        j.grad.x() += c * i * pw(a, i - 1) * pw(b, k);
        j.grad.y() += c * k * pw(a, i) * pw(b, k - 1);
        j.hess(0, 0) += c * i * (i - 1) * pw(a, i - 2) * pw(b, k);
        j.hess(0, 1) += c * i * k * pw(a, i - 1) * pw(b, k - 1);
        j.hess(1, 1) += c * k * (k - 1) * pw(a, i) * pw(b, k - 2);
      }
    }
    j.hess(1, 0) = j.hess(0, 1);
    return j;
  };
}

JetFn poly1(int p) {
  return [p](const Vec2& x) {
    Jet j;
    for (int i = 0; i <= p; ++i) {
      const double c = 1.0 / (1 + i);
      j.value += c * std::pow(x.x(), i);
      if (i >= 1) j.grad.x() += c * i * std::pow(x.x(), i - 1);
      if (i >= 2) j.hess(0, 0) += c * i * (i - 1) * std::pow(x.x(), i - 2);
    }
    return j;
  };
}

Jet sin_pi(const Vec2& x) {
  Jet j;
  j.value = std::sin(kPi * x.x());
  j.grad.x() = kPi * std::cos(kPi * x.x());
  j.hess(0, 0) = -kPi * kPi * std::sin(kPi * x.x());
  return j;
}

// (1 - r^2) exp(x): zero on the unit circle.
Jet disk_bubble(const Vec2& x) {
  const double e = std::exp(x.x()), b = 1.0 - x.squaredNorm();
  const Vec2 db = -2.0 * x, de(e, 0.0);
  Jet j;
  j.value = b * e;
  j.grad = db * e + b * de;
  Mat2 d2e = Mat2::Zero();
  d2e(0, 0) = e;
  j.hess = -2.0 * Mat2::Identity() * e + db * de.transpose() + de * db.transpose() + b * d2e;
  return j;
}

Mat2 hess_xx(double v) {
  Mat2 m = Mat2::Zero();
  m(0, 0) = v;
  return m;
}

std::shared_ptr<const Mesh> disk(double h, int q = 1) {
  return std::make_shared<const Mesh>(build_disk_mesh(1.0, h, q));
}

std::shared_ptr<const Mesh> line(int cells, double R = 1.0) {
  return std::make_shared<const Mesh>(build_interval_mesh(R, cells));
}

}  // namespace

TEST_SUITE("fespace") {
  TEST_CASE("dof counts") {
    const ElementKind h3{ElementFamily::hermite3}, h5{ElementFamily::hermite5}, ar{ElementFamily::argyris};
    auto s = build_space(line(4), h3, true);
    CHECK(s->num_dofs() == 10);
    CHECK(s->num_free() == 8);
    CHECK(build_space(line(4), h5, true)->num_dofs() == 15);
    CHECK(ar.local_dofs() == 21);
    auto m = disk(0.7);
    auto a = build_space(m, ar, false);
    CHECK(a->num_dofs() == 6 * m->num_vertices() + m->num_edges());
    for (int c = 0; c < m->num_cells(); ++c) CHECK(a->cell_dofs(c).size() == 21);
    CHECK_THROWS_AS(build_space(m, h3, false), ConfigError);
    CHECK_THROWS_AS(build_space(line(3), ar, false), ConfigError);
  }

  TEST_CASE("identical meshes give identical dof maps") {
    const ElementKind ar{ElementFamily::argyris};
    auto a = build_space(disk(0.5), ar, true), b = build_space(disk(0.5), ar, true);
    REQUIRE(a->num_dofs() == b->num_dofs());
    for (int c = 0; c < a->mesh().num_cells(); ++c) CHECK(a->cell_dofs(c) == b->cell_dofs(c));
  }

  TEST_CASE("polynomial reproduction") {
    for (auto fam : {ElementFamily::hermite3, ElementFamily::hermite5}) {
      const ElementKind k{fam};
      auto s = build_space(line(5), k, false);
      for (int m = 0; m <= 2; ++m) CHECK(interpolation_error(s, poly1(k.degree()), m, 2.0) < 1e-10);
      const DiscreteField I = interpolate(s, poly1(2));
      CHECK(I.evaluate(Vec2(0.3, 0.0)).hess(0, 0) == Approx(2.0 / 3.0));
    }
    for (int q : {1, 2}) {
      auto s = build_space(disk(0.5, q), ElementKind{ElementFamily::argyris}, false);
      const double scale = field_norm(interpolate(s, poly2(5)), 2, 2.0);
      for (int m = 0; m <= 2; ++m) CHECK(interpolation_error(s, poly2(5), m, 2.0) < 1e-10 * scale);
    }
    auto s = build_space(disk(0.5), ElementKind{ElementFamily::argyris}, false);
    const DiscreteField c = interpolate(s, [](const Vec2&) { return Jet{2.5, Vec2::Zero(), Mat2::Zero()}; });
    CHECK(c.evaluate(Vec2(0.1, 0.2)).value == Approx(2.5));
    CHECK(c.evaluate(Vec2(0.1, 0.2)).grad.norm() < 1e-10);
  }

  TEST_CASE("C1 conformity of random fields") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    auto s = build_space(disk(0.4, 2), ElementKind{ElementFamily::argyris}, false);
    Eigen::VectorXd c(s->num_dofs());
    for (int i = 0; i < c.size(); ++i) c(i) = u(rng);
    const DiscreteField f(s, c);
    const auto d = conformity_defect(f);
    CHECK(d.value < 1e-10 * c.cwiseAbs().maxCoeff());
    CHECK(d.gradient < 1e-9 * c.cwiseAbs().maxCoeff() / s->mesh().h());
    CHECK(d.hessian > 1e-6);  // H^2 but not C^2
    auto l = build_space(line(6), ElementKind{ElementFamily::hermite3}, false);
    Eigen::VectorXd cl(l->num_dofs());
    for (int i = 0; i < cl.size(); ++i) cl(i) = u(rng);
    const auto dl = conformity_defect(DiscreteField(l, cl));
    CHECK(dl.value < 1e-12);
    CHECK(dl.gradient < 1e-11);
  }

  TEST_CASE("constrained fields vanish on the boundary") {
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    auto l = build_space(line(6), ElementKind{ElementFamily::hermite5}, true);
    DiscreteField f = DiscreteField::zero(l);
    Eigen::VectorXd v(l->num_free());
    for (int i = 0; i < v.size(); ++i) v(i) = u(rng);
    f.set_free_coefficients(v);
    CHECK(boundary_trace(f).at_vertices < 1e-12 * v.cwiseAbs().maxCoeff());
    CHECK(boundary_trace(f).on_facets < 1e-12 * v.cwiseAbs().maxCoeff());

    auto d = build_space(disk(0.4), ElementKind{ElementFamily::argyris}, true);
    DiscreteField g = DiscreteField::zero(d);
    Eigen::VectorXd w(d->num_free());
    for (int i = 0; i < w.size(); ++i) w(i) = u(rng);
    g.set_free_coefficients(w);
    CHECK(boundary_trace(g).at_vertices < 1e-12 * w.cwiseAbs().maxCoeff());
  }

  TEST_CASE("boundary trace of smooth constrained fields shrinks with h") {
    double prev = 0.0;
    for (int l = 0; l < 3; ++l) {
      auto m = disk(0.7 / std::pow(2.0, l));
      auto s = build_space(m, ElementKind{ElementFamily::argyris}, false);
      auto c = build_space(m, ElementKind{ElementFamily::argyris}, true);
      const DiscreteField f = boundary_corrected_interpolant(s, c, disk_bubble);
      const double t = boundary_trace(f).on_facets;
      if (l > 0) CHECK(t < prev / 3.0);
      prev = t;
    }
  }

  TEST_CASE("boundary-corrected interpolant") {
    // the interpolant of a function vanishing on the circle needs no correction
    auto m = disk(0.5);
    auto s = build_space(m, ElementKind{ElementFamily::argyris}, false);
    auto c = build_space(m, ElementKind{ElementFamily::argyris}, true);
    const DiscreteField full = interpolate(s, disk_bubble);
    const DiscreteField corr = boundary_corrected_interpolant(s, c, disk_bubble);
    CHECK((full.coefficients() - corr.coefficients()).cwiseAbs().maxCoeff() < 1e-12);
    // on the interval it equals the constrained interpolant
    auto ls = build_space(line(5), ElementKind{ElementFamily::hermite5}, false);
    auto lc = build_space(line(5), ElementKind{ElementFamily::hermite5}, true);
    auto fn = [](const Vec2& x) { return Jet{std::cos(x.x()), Vec2(-std::sin(x.x()), 0), hess_xx(-std::cos(x.x()))}; };
    const DiscreteField a = boundary_corrected_interpolant(ls, lc, fn);
    const DiscreteField b = interpolate(lc, fn);
    CHECK((a.coefficients() - b.coefficients()).cwiseAbs().maxCoeff() < 1e-15);
  }

  TEST_CASE("interpolation rates") {
    std::vector<double> h, e1, e2;
    for (int l = 0; l < 4; ++l) {
      auto s = build_space(line(4 << l), ElementKind{ElementFamily::hermite3}, false);
      h.push_back(s->mesh().h());
      e1.push_back(interpolation_error(s, sin_pi, 1, 2.0));
      e2.push_back(interpolation_error(s, sin_pi, 2, 2.0));
    }
    for (int l = 1; l < 4; ++l) {
      CHECK(std::log(e1[l - 1] / e1[l]) / std::log(h[l - 1] / h[l]) >= 2.0);
      CHECK(std::log(e2[l - 1] / e2[l]) / std::log(h[l - 1] / h[l]) >= 1.0);
    }
  }

  TEST_CASE("evaluation") {
    auto s = build_space(line(3), ElementKind{ElementFamily::hermite3}, false);
    auto sq = [](const Vec2& x) {
      Jet j;
      j.value = x.x() * x.x();
      j.grad.x() = 2 * x.x();
      j.hess(0, 0) = 2;
      return j;
    };
    const DiscreteField f = interpolate(s, sq);
    CHECK(f.evaluate(Vec2(0.3, 0)).hess(0, 0) == Approx(2.0));
    CHECK(f.evaluate(Vec2(0.3, 0)).value == Approx(0.09));
    CHECK_THROWS_AS(f.evaluate(Vec2(1.5, 0)), Error);
  }

  TEST_CASE("norms of fields") {
    auto s = build_space(line(4, 0.5), ElementKind{ElementFamily::hermite5}, false);
    const DiscreteField one = interpolate(s, [](const Vec2&) { return Jet{1.0, Vec2::Zero(), Mat2::Zero()}; });
    CHECK(field_norm(one, 0, 2.0) == Approx(1.0));
    const DiscreteField x = interpolate(s, [](const Vec2& p) { return Jet{p.x(), Vec2(1, 0), Mat2::Zero()}; });
    CHECK(field_norm(x, 1, std::numeric_limits<double>::infinity()) == Approx(1.0));
    CHECK(field_norm(x * -3.0, 1, 2.0) == Approx(3.0 * field_norm(x, 1, 2.0)).epsilon(1e-12));
  }

  TEST_CASE("inverse estimate") {
    auto s = build_space(disk(0.5), ElementKind{ElementFamily::argyris}, true);
    CHECK(inverse_estimate_ratio(s, 5, 1, 2.0, 1, 2.0) == Approx(1.0));
    auto one_cell = build_space(line(1), ElementKind{ElementFamily::hermite3}, false);
    const DiscreteField c = interpolate(one_cell, [](const Vec2&) { return Jet{1.0, Vec2::Zero(), Mat2::Zero()}; });
    // the W^{1,2} norm of a constant equals its L2 norm
    CHECK(inverse_estimate_ratio({c}, 1, 2.0, 0, 2.0) == Approx(one_cell->mesh().h()));
    std::vector<double> r;
    for (int l = 0; l < 4; ++l) {
      auto sp = build_space(line(4 << l), ElementKind{ElementFamily::hermite5}, true);
      r.push_back(inverse_estimate_ratio(sp, 100, 2, 2.0, 1, 2.0, 9));
    }
    const auto [lo, hi] = std::minmax_element(r.begin(), r.end());
    CHECK(*hi < 2.0 * *lo);
  }

  TEST_CASE("field dump") {
    auto s = build_space(disk(0.7), ElementKind{ElementFamily::argyris}, true);
    const DiscreteField f = interpolate(s, disk_bubble);
    std::ostringstream os;
    write_field_csv(os, f);
    CHECK(os.str().rfind("x,y,value,", 0) == 0);
    const auto j = field_sidecar(f);
    CHECK(j["coefficients"].size() == static_cast<size_t>(s->num_dofs()));
  }

  TEST_CASE("quadrature degree guard") {
    CHECK_THROWS_AS(FESpace(disk(0.7), ElementKind{ElementFamily::argyris}, true, 3), ConfigError);
  }
}
