#include <doctest.h>

#include <cmath>
#include <limits>

#include "curvflow/analysis.hpp"
#include "curvflow/oracle.hpp"

using namespace curvflow;
using doctest::Approx;

namespace {

const double kInf = std::numeric_limits<double>::infinity();

struct Setup {
  std::shared_ptr<const FESpace> full, space;
};

Setup line_setup(int cells, double R = 1.0) {
  auto m = std::make_shared<const Mesh>(build_interval_mesh(R, cells));
  const ElementKind k{ElementFamily::hermite5};
  return {build_space(m, k, false), build_space(m, k, true)};
}

Setup disk_setup(double h) {
  auto m = std::make_shared<const Mesh>(build_disk_mesh(1.0, h, 1));
  const ElementKind k{ElementFamily::argyris};
  return {build_space(m, k, false), build_space(m, k, true)};
}

Jet linear_x(const Vec2& x) { return Jet{x.x(), Vec2(1.0, 0.0), Mat2::Zero()}; }

}  // namespace

TEST_SUITE("analysis") {
  TEST_CASE("norms") {
    const Setup s = line_setup(4);
    const DiscreteField one = interpolate(s.full, [](const Vec2&) { return Jet{1.0, Vec2::Zero(), Mat2::Zero()}; });
    CHECK(norm(one, {0, 2.0}) == Approx(std::sqrt(2.0)));
    CHECK(norm(one, {0, kInf}) == Approx(1.0));
    const DiscreteField x = interpolate(s.full, linear_x);
    CHECK(norm(x, {1, 2.0}) == Approx(std::sqrt(2.0 / 3.0 + 2.0)));
    CHECK(norm(x, {2, 1.0}) == Approx(1.0 + 2.0));
    CHECK(error_norm(x, linear_x, {2, 2.0}) < 1e-12);
    // homogeneity and triangle inequality
    CHECK(norm(x * -2.5, {1, 3.0}) == Approx(2.5 * norm(x, {1, 3.0})).epsilon(1e-12));
    CHECK(norm(x + one, {1, 2.0}) <= norm(x, {1, 2.0}) + norm(one, {1, 2.0}) + 1e-12);
  }

  TEST_CASE("eoc") {
    const auto r = eoc({{1.0, 1.0}, {0.5, 0.25}, {0.25, 0.0625}});
    REQUIRE(r.size() == 2);
    CHECK(*r[0] == Approx(2.0));
    CHECK(*r[1] == Approx(2.0));
    const auto z = eoc({{1.0, 1e-3}, {0.5, 0.0}});
    CHECK(!z[0].has_value());
    CHECK(eoc({{1.0, 1.0}}).empty());
    CHECK_THROWS_AS(eoc({{0.5, 1.0}, {0.5, 0.5}}), ConfigError);
  }

  TEST_CASE("Alexandrov constant and bound") {
    const double pi = std::acos(-1.0);
    CHECK(alexandrov_constant(0) == Approx(0.5));
    CHECK(alexandrov_constant(1) == Approx(1.0 / (4.0 * pi)));
    CHECK(alexandrov_constant(2) == Approx(2.0 / (4.0 / 3.0 * pi * 27.0)));

    // -u'' = 1 on (0, 1): lambda = Lambda = 1, f = 1, sup u = 1/8
    AlexandrovInput g;
    g.diam = 1.0;
    g.volume = 1.0;
    g.f_norm = 1.0;
    CHECK(alexandrov_bound(g) == Approx(std::exp(0.5)));
    CHECK(alexandrov_bound(g) >= 0.125);

    AlexandrovInput z = g;
    z.f_norm = 0.0;
    CHECK(alexandrov_bound(z) == 0.0);
    AlexandrovInput big = g;
    big.lambda = 1e-4;  // exponent 5000
    big.Lambda = 1.0;
    CHECK(std::isinf(alexandrov_bound(big)));

    // monotone in the data
    AlexandrovInput a = g;
    a.f_norm = 2.0;
    CHECK(alexandrov_bound(a) == Approx(2.0 * alexandrov_bound(g)));
    a = g;
    a.c1 = 0.5;
    CHECK(alexandrov_bound(a) > alexandrov_bound(g));
    a = g;
    a.lambda = 0.5;
    CHECK(alexandrov_bound(a) > alexandrov_bound(g));

    AlexandrovInput bad = g;
    bad.lambda = 2.0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = g;
    bad.lambda = 0.0;
    CHECK_THROWS_AS(alexandrov_bound(bad), ConfigError);
  }

  TEST_CASE("Alexandrov golden solve") {
    // linearization at zero gradient with eps = 1 is -u''; u = (1/4 - x^2)/2 on (-1/2, 1/2)
    const Setup s = line_setup(4, 0.5);
    auto exact = [](const Vec2& x) {
      Jet j;
      j.value = 0.5 * (0.25 - x.x() * x.x());
      j.grad.x() = -x.x();
      j.hess(0, 0) = -1.0;
      return j;
    };
    const LinearSolve ls = solve_manufactured(DiscreteField::zero(s.space), FlowRegime::imcf(), 1.0, exact);
    CHECK(ls.rhs(0, Vec2(0.1, 0.0)) == Approx(1.0));
    CHECK(sup_abs(ls.solution) == Approx(0.125).epsilon(1e-10));
    const AlexandrovInput in = alexandrov_input(ls, interval_domain(0.5));
    CHECK(in.f_norm == Approx(1.0));
    CHECK(alexandrov_bound(in) >= sup_abs(ls.solution));
  }

  TEST_CASE("Alexandrov bound dominates linearized solves") {
    for (auto regime : {FlowRegime::imcf(), FlowRegime::mcf()}) {
      const double eps = regime.is_mcf() ? 1.0 : 0.5;
      const RadialProfile p(regime, eps, 1.0, 0, 4000);
      const Setup s = line_setup(8);
      const DiscreteField base = boundary_corrected_interpolant(s.full, s.space, p.jet_fn());
      const LinearSolve ls = solve_manufactured(base, regime, eps, bubble_solution(interval_domain(1.0)));
      CHECK(alexandrov_bound(alexandrov_input(ls, interval_domain(1.0))) >= sup_abs(ls.solution));
    }
    const RadialProfile p(FlowRegime::mcf(), 0.5, 1.0, 1, 4000);
    const Setup d = disk_setup(0.5);
    const DiscreteField base = boundary_corrected_interpolant(d.full, d.space, p.jet_fn());
    const LinearSolve ls = solve_manufactured(base, FlowRegime::mcf(), 0.5, bubble_solution(disk_domain(1.0)));
    CHECK(alexandrov_bound(alexandrov_input(ls, disk_domain(1.0))) >= sup_abs(ls.solution));
  }

  TEST_CASE("linearized bounds") {
    const Setup s = line_setup(4);
    const LinearizedBounds b = linearized_bounds(DiscreteField::zero(s.space), FlowRegime::imcf(), 0.25);
    CHECK(b.lambda == Approx(4.0));
    CHECK(b.Lambda == Approx(4.0));
    CHECK(b.c1 == Approx(0.0));
  }

  TEST_CASE("stability diagnostic") {
    const RadialProfile p(FlowRegime::imcf(), 0.5, 1.0, 0, 4000);
    std::vector<double> ratios;
    for (int l = 0; l < 3; ++l) {
      const Setup s = line_setup(4 << l);
      const DiscreteField base = boundary_corrected_interpolant(s.full, s.space, p.jet_fn());
      const LinearSolve ls = solve_manufactured(base, FlowRegime::imcf(), 0.5, bubble_solution(interval_domain(1.0)));
      const StabilityReport r = stability_diagnostic(ls, s.full);
      REQUIRE(r.stability_ratio.has_value());
      REQUIRE(r.best_approx_ratio.has_value());
      CHECK(r.error_h1 > 0.0);
      CHECK(*r.best_approx_ratio < 10.0);
      ratios.push_back(*r.stability_ratio);
    }
    // bounded under refinement
    CHECK(ratios[2] < 2.0 * ratios[0]);
  }

  TEST_CASE("Garding check on a 1D MCF linearization") {
    const FlowRegime regime = FlowRegime::mcf();
    const RadialProfile p(regime, 1.0, 1.0, 0, 4000);
    const Setup s = line_setup(8);
    const DiscreteField base = boundary_corrected_interpolant(s.full, s.space, p.jet_fn());
    const LinearSolve ls = solve_manufactured(base, regime, 1.0, bubble_solution(interval_domain(1.0)));
    const GardingResult g = garding_check(ls.solution, base, regime, 1.0, ls.rhs, 0.1);
    CHECK(g.holds);
    CHECK(g.c_eps == Approx(2.5));
    CHECK(g.lhs > 0.0);
    CHECK(g.lhs <= g.rhs);
  }

  TEST_CASE("embedding precondition truth table") {
    struct Case {
      int m;
      double p;
      int k;
      double alpha;
      int n;
      bool expect;
    };
    const Case cases[] = {
        {2, 2, 0, 0.5, 1, true},   {2, 2, 1, 0.0, 1, true},   {2, 2, 1, 0.5, 1, false},
        {2, 3, 1, 0.3, 1, true},   {2, 3, 1, 0.4, 1, false},  {1, 2, 0, 0.5, 0, true},
        {1, 2, 0, 0.6, 0, false},  {1, 1, 0, 0.0, 0, true},   {1, 1, 0, 0.1, 0, false},
        {2, kInf, 1, 0.99, 1, true}, {2, kInf, 2, 0.0, 1, true}, {2, kInf, 2, 0.5, 1, false},
        {3, 2, 1, 0.5, 1, true},   {3, 2, 2, 0.0, 1, true},   {3, 4, 2, 0.5, 1, true},
        {3, 4, 2, 0.6, 1, false},  {1, 2, 0, 0.1, 1, false},  {2, 1.5, 0, 0.5, 1, true},
        {2, 6, 1, 0.66, 1, true},  {2, 6, 1, 0.67, 1, false},
    };
    for (const Case& c : cases) {
      CAPTURE(c.m);
      CAPTURE(c.p);
      CAPTURE(c.k);
      CAPTURE(c.alpha);
      CAPTURE(c.n);
      CHECK(embedding_precondition(c.m, c.p, c.k, c.alpha, c.n) == c.expect);
    }
  }

  TEST_CASE("Holder norm") {
    const Setup s = line_setup(8);
    const DiscreteField x = interpolate(s.full, linear_x);
    const double hn = holder_norm(x, 0, 1.0);
    CHECK(hn <= 2.0 + 1e-9);
    CHECK(hn >= 1.99);
    CHECK(holder_norm(x * 3.0, 0, 1.0) == Approx(3.0 * hn).epsilon(1e-12));
    CHECK(holder_norm(x, 0, 1.0, 500, 9) == holder_norm(x, 0, 1.0, 500, 9));
  }

  TEST_CASE("Sobolev embedding check") {
    const Setup s = line_setup(8);
    const DiscreteField f = interpolate(s.full, [](const Vec2& x) {
      return Jet{std::sin(x.x()), Vec2(std::cos(x.x()), 0.0), Mat2{{-std::sin(x.x()), 0.0}, {0.0, 0.0}}};
    });
    const EmbeddingReport ok = sobolev_embedding_check({f, f * 2.0}, 2, 2.0, 1, 0.5, 0, 2000, 5);
    CHECK(ok.precondition);
    REQUIRE(ok.ratios.size() == 2);
    CHECK(ok.ratios[0] == Approx(ok.ratios[1]).epsilon(1e-10));
    CHECK(ok.max_ratio < 10.0);
    CHECK(ok.seed == 5);
    const EmbeddingReport skip = sobolev_embedding_check({f}, 1, 2.0, 1, 0.5, 0, 2000, 5);
    CHECK(!skip.precondition);
    CHECK(skip.ratios.empty());
  }
}
