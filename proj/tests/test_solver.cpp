#include <doctest.h>

#include <cmath>
#include <sstream>

#include "curvflow/analysis.hpp"
#include "curvflow/oracle.hpp"
#include "curvflow/solver.hpp"

using namespace curvflow;

namespace {

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

}  // namespace

TEST_SUITE("solver") {
  TEST_CASE("identity system returns the rhs") {
    LinearSystem s;
    s.matrix.resize(4, 4);
    s.matrix.setIdentity();
    s.rhs = Eigen::Vector4d(1, -2, 3, 0.5);
    s.constrained.assign(4, 0);
    CHECK((solve_linear(s) - s.rhs).norm() == 0.0);
  }

  TEST_CASE("singular system fails") {
    LinearSystem s;
    s.matrix.resize(2, 2);
    s.matrix.insert(0, 0) = 1.0;
    s.matrix.insert(0, 1) = 1.0;
    s.matrix.insert(1, 0) = 1.0;
    s.matrix.insert(1, 1) = 1.0;
    s.rhs = Eigen::Vector2d(1, 0);
    s.constrained.assign(2, 0);
    CHECK_THROWS_AS(solve_linear(s), SolverError);
  }

  TEST_CASE("Poisson problem at zero gradient") {
    // linearization at w = 0 with eps = 1: -u'' = g; u = cos(pi x / 2)
    const double pi = std::acos(-1.0);
    auto exact = [pi](const Vec2& x) {
      Jet j;
      j.value = std::cos(pi * x.x() / 2);
      j.grad.x() = -pi / 2 * std::sin(pi * x.x() / 2);
      j.hess(0, 0) = -pi * pi / 4 * std::cos(pi * x.x() / 2);
      return j;
    };
    std::vector<std::pair<double, double>> errs;
    for (int l = 0; l < 3; ++l) {
      const Setup s = line_setup(4 << l);
      const Eigen::VectorXd rhs =
          assemble_functional(*s.space, nullptr, [&](int, const Vec2& x) { return -exact(x).hess(0, 0); });
      const LinearSystem sys = linearized_system(DiscreteField::zero(s.space), FlowRegime::imcf(), 1.0, rhs);
      const DiscreteField u(s.space, solve_linear(sys));
      errs.emplace_back(s.space->mesh().h(), error_norm(u, exact, {1, 2.0}));
    }
    const auto rates = eoc(errs);
    for (const auto& r : rates) {
      REQUIRE(r.has_value());
      CHECK(*r > 4.5);
    }
  }

  TEST_CASE("IMCF interval: fixed point and Newton") {
    const FlowRegime regime = FlowRegime::imcf();
    const double eps = 0.5;
    const RadialProfile p(regime, eps, 1.0, 0, 8000);
    const Setup s = line_setup(8);
    const DiscreteField base = boundary_corrected_interpolant(s.full, s.space, p.jet_fn());
    FixedPointOptions opt;
    opt.rho = 1e3;
    opt.tol = 1e-12;
    const FixedPointResult fp = fixed_point_solve(base, regime, eps, opt);
    REQUIRE(fp.converged);
    CHECK(fp.status == "converged");
    CHECK(fp.trace.all_in_ball());
    CHECK(assemble_residual(fp.solution, regime, eps).cwiseAbs().maxCoeff() < 1e-10);
    // sigma = 1: div(Du/|Du|) = eta > 0, u is convex and negative inside
    CHECK(fp.solution.evaluate(Vec2(0.0, 0.0)).value < 0.0);

    const NewtonResult nt = newton_solve(base, regime, eps);
    REQUIRE(nt.converged);
    CHECK(error_norm(nt.solution, [&](const Vec2& x) { return fp.solution.evaluate(x); }, {1, 2.0}) < 1e-10);

    // quadratic convergence over the last steps
    const auto& r = nt.residuals;
    REQUIRE(r.size() >= 3);
    const size_t k = r.size() - 1;
    if (r[k - 1] > 1e-13 && r[k - 2] < 1e-2) CHECK(r[k] <= 10.0 * r[k - 1] * r[k - 1] / r[k - 2] + 1e-12);

    // Newton started at the solution needs no iteration
    const NewtonResult again = newton_solve(nt.solution, regime, eps, 30, 1e-10);
    CHECK(again.iterations == 0);

    // fixed point of T
    const DiscreteField t = apply_T(fp.solution, base, regime, eps);
    CHECK((t.coefficients() - fp.solution.coefficients()).cwiseAbs().maxCoeff() < 1e-10);
  }

  TEST_CASE("loose tolerance stops after one step") {
    const FlowRegime regime = FlowRegime::imcf();
    const RadialProfile p(regime, 0.5, 1.0, 0, 4000);
    const Setup s = line_setup(4);
    const DiscreteField base = boundary_corrected_interpolant(s.full, s.space, p.jet_fn());
    FixedPointOptions opt;
    opt.tol = 1e6;
    const FixedPointResult fp = fixed_point_solve(base, regime, 0.5, opt);
    CHECK(fp.trace.records.size() == 1);
    CHECK(fp.converged);
    std::ostringstream os;
    fp.trace.write_csv(os);
    CHECK(os.str().rfind("k,step_norm,residual,in_ball", 0) == 0);
  }

  TEST_CASE("T is affine in the residual") {
    const FlowRegime regime = FlowRegime::mcf();
    const Setup s = line_setup(6);
    const RadialProfile p(regime, 1.0, 1.0, 0, 4000);
    const DiscreteField base = boundary_corrected_interpolant(s.full, s.space, p.jet_fn());
    const FixedPointMap T(base, regime, 1.0);
    const Eigen::VectorXd r1 = assemble_residual(base, regime, 1.0);
    const Eigen::VectorXd r2 = Eigen::VectorXd::LinSpaced(r1.size(), -1.0, 1.0);
    const Eigen::VectorXd a = T.solve(r1 + 2.0 * r2), b = T.solve(r1) + 2.0 * T.solve(r2);
    CHECK((a - b).cwiseAbs().maxCoeff() < 1e-9 * (1.0 + b.cwiseAbs().maxCoeff()));
  }

  TEST_CASE("MCF disk: one step reduces the residual") {
    const FlowRegime regime = FlowRegime::mcf();
    const double eps = 0.5;
    const RadialProfile p(regime, eps, 1.0, 1, 8000);
    const Setup s = disk_setup(0.35);
    const DiscreteField base = boundary_corrected_interpolant(s.full, s.space, p.jet_fn());
    const double r0 = assemble_residual(base, regime, eps, Form::strong).cwiseAbs().maxCoeff();
    const DiscreteField t = apply_T(base, base, regime, eps, Form::strong);
    const double r1 = assemble_residual(t, regime, eps, Form::strong).cwiseAbs().maxCoeff();
    CHECK(r1 < r0 / 10.0);
  }

  TEST_CASE("contraction rate of the frozen map") {
    const FlowRegime regime = FlowRegime::mcf();
    const double eps = 1.0;
    const RadialProfile p(regime, eps, 1.0, 0, 8000);
    std::vector<double> rates;
    for (int l = 0; l < 3; ++l) {
      const Setup s = line_setup(4 << l);
      const DiscreteField base = boundary_corrected_interpolant(s.full, s.space, p.jet_fn());
      const FixedPointMap T(base, regime, eps, Form::strong);
      ContractionOptions opt;
      opt.rho = 0.5;
      const ContractionResult c = contraction_rate(T, opt);
      CHECK(c.seed == opt.seed);
      CHECK(c.ratios.size() == static_cast<size_t>(opt.pairs));
      rates.push_back(c.rate);
      // same seed, same result
      CHECK(contraction_rate(T, opt).rate == c.rate);
    }
    for (double r : rates) CHECK(r < 1.0);
    CHECK(rates[2] < rates[0]);
  }

  TEST_CASE("zero perturbation radius is rejected") {
    const Setup s = line_setup(4);
    const FixedPointMap T(DiscreteField::zero(s.space), FlowRegime::imcf(), 1.0);
    ContractionOptions opt;
    opt.rho = 0.0;
    CHECK_THROWS_AS(contraction_rate(T, opt), ConfigError);
  }
}
