#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "curvflow/assembly.hpp"
#include "curvflow/oracle.hpp"

using namespace curvflow;

namespace {

struct Setup {
  std::shared_ptr<const FESpace> full, space;
};

Setup disk_setup(double h) {
  auto m = std::make_shared<const Mesh>(build_disk_mesh(1.0, h, 1));
  const ElementKind k{ElementFamily::argyris};
  return {build_space(m, k, false), build_space(m, k, true)};
}

Setup line_setup(int cells, ElementFamily fam = ElementFamily::hermite5) {
  auto m = std::make_shared<const Mesh>(build_interval_mesh(1.0, cells));
  const ElementKind k{fam};
  return {build_space(m, k, false), build_space(m, k, true)};
}

DiscreteField random_field(std::shared_ptr<const FESpace> s, std::mt19937_64& rng, double scale) {
  std::uniform_real_distribution<double> u(-scale, scale);
  DiscreteField f = DiscreteField::zero(s);
  Eigen::VectorXd v(s->num_free());
  for (int i = 0; i < v.size(); ++i) v(i) = u(rng);
  f.set_free_coefficients(v);
  return f;
}

// Base field: interpolated reference profile plus a small perturbation.
DiscreteField base_field(const Setup& s, const FlowRegime& regime, double eps, std::mt19937_64& rng) {
  const int n = s.space->kind().dim() - 1;
  const RadialProfile p(regime, eps, 1.0, n, 4000);
  return boundary_corrected_interpolant(s.full, s.space, p.jet_fn()) + random_field(s.space, rng, 0.01);
}

double fd_jacobian_error(const DiscreteField& w, const FlowRegime& regime, double eps, Form form, int dirs,
                         std::mt19937_64& rng) {
  const SparseMatrix J = assemble_linearized(w, regime, eps, form);
  double worst = 0.0;
  for (int d = 0; d < dirs; ++d) {
    const DiscreteField v = random_field(w.space_ptr(), rng, 1.0);
    const double t = 1e-5;
    const Eigen::VectorXd fd =
        (assemble_residual(w + v * t, regime, eps, form) - assemble_residual(w - v * t, regime, eps, form)) /
        (2.0 * t);
    const Eigen::VectorXd jv = J * v.coefficients();
    worst = std::max(worst, (jv - fd).norm() / fd.norm());
  }
  return worst;
}

}  // namespace

TEST_SUITE("assembly") {
  TEST_CASE("form names") {
    CHECK(parse_form("weak") == Form::weak);
    CHECK(form_name(parse_form("strong")) == "strong");
    CHECK_THROWS_AS(parse_form("mixed"), ConfigError);
  }

  TEST_CASE("residual at zero is the eta term") {
    for (auto regime : {FlowRegime::mcf(), FlowRegime::mcf(2), FlowRegime::imcf()}) {
      for (const Setup& s : {line_setup(4), disk_setup(0.6)}) {
        const double eps = 0.3;
        const Eigen::VectorXd ones = assemble_functional(*s.space, nullptr, [](int, const Vec2&) { return 1.0; });
        const double eta_eps = regime.sigma * std::pow(eps, regime.alpha);
        for (Form form : {Form::weak, Form::strong}) {
          const Eigen::VectorXd r = assemble_residual(DiscreteField::zero(s.space), regime, eps, form);
          for (int i = 0; i < r.size(); ++i) {
            const double want = s.space->is_constrained(i) ? 0.0 : eta_eps * ones(i);
            CHECK(std::abs(r(i) - want) <= 1e-13 * (1.0 + std::abs(want)));
          }
        }
      }
    }
  }

  TEST_CASE("Jacobian matches finite differences") {
    std::mt19937_64 rng(11);
    for (auto regime : {FlowRegime::mcf(), FlowRegime::imcf()}) {
      for (double eps : {0.5, 0.1}) {
        for (Form form : {Form::weak, Form::strong}) {
          CAPTURE(regime.name());
          CAPTURE(eps);
          CAPTURE(form_name(form));
          const Setup l = line_setup(6);
          const Setup d = disk_setup(0.6);
          if (!(regime.is_mcf() && eps < 0.9)) CHECK(fd_jacobian_error(base_field(l, regime, eps, rng), regime, eps, form, 5, rng) < 1e-5);
          CHECK(fd_jacobian_error(random_field(l.space, rng, 0.3), regime, eps, form, 5, rng) < 1e-5);
          CHECK(fd_jacobian_error(random_field(d.space, rng, 0.3), regime, eps, form, 5, rng) < 1e-5);
        }
      }
    }
  }

  TEST_CASE("linearization at zero gradient is symmetric diffusion") {
    const Setup s = disk_setup(0.6);
    const double eps = 0.25;
    const SparseMatrix J = assemble_linearized(DiscreteField::zero(s.space), FlowRegime::imcf(), eps);
    const Eigen::MatrixXd A(J);
    CHECK((A - A.transpose()).cwiseAbs().maxCoeff() < 1e-12 * A.cwiseAbs().maxCoeff());
    // (1/eps) int Du.Dv on the free block: positive definite
    std::mt19937_64 rng(2);
    const DiscreteField v = random_field(s.space, rng, 1.0);
    const Eigen::VectorXd c = v.coefficients();
    CHECK(c.dot(A * c) > 0.0);
    // nonzero base gradient: c-part makes it asymmetric
    auto fn = [](const Vec2& x) {
      Jet j;
      j.value = 1.0 - x.squaredNorm();
      j.grad = -2.0 * x;
      j.hess = -2.0 * Mat2::Identity();
      return j;
    };
    const DiscreteField b = boundary_corrected_interpolant(s.full, s.space, fn);
    const Eigen::MatrixXd B(assemble_linearized(b, FlowRegime::imcf(), eps));
    CHECK((B - B.transpose()).cwiseAbs().maxCoeff() > 1e-6 * B.cwiseAbs().maxCoeff());
  }

  TEST_CASE("constrained rows are identity") {
    const Setup s = disk_setup(0.6);
    const Eigen::VectorXd rhs = Eigen::VectorXd::Ones(s.space->num_dofs());
    const LinearSystem sys = linearized_system(DiscreteField::zero(s.space), FlowRegime::mcf(), 0.5, rhs);
    const Eigen::MatrixXd A(sys.matrix);
    for (int i = 0; i < A.rows(); ++i) {
      if (!sys.constrained[i]) continue;
      CHECK(A(i, i) == 1.0);
      CHECK(A.row(i).cwiseAbs().sum() == 1.0);
      CHECK(A.col(i).cwiseAbs().sum() == 1.0);
      CHECK(sys.rhs(i) == 0.0);
    }
  }

  TEST_CASE("weak and strong forms agree in 1D") {
    // identical integrals; only the quadrature errors differ
    auto fn = [](const Vec2& x) {
      const double t = x.x(), e = std::exp(t), b = 1.0 - t * t;
      Jet j;
      j.value = 0.5 * b * e;
      j.grad.x() = 0.5 * (b - 2.0 * t) * e;
      j.hess(0, 0) = 0.5 * (b - 4.0 * t - 2.0) * e;
      return j;
    };
    auto m = std::make_shared<const Mesh>(build_interval_mesh(1.0, 5));
    double prev = 0.0;
    for (int qd : {10, 20, 40}) {
      auto s = build_space(m, ElementKind{ElementFamily::hermite5}, true, qd);
      const DiscreteField w = interpolate(s, fn);
      const Eigen::VectorXd a = assemble_residual(w, FlowRegime::mcf(), 0.3, Form::weak);
      const Eigen::VectorXd b = assemble_residual(w, FlowRegime::mcf(), 0.3, Form::strong);
      const double d = (a - b).cwiseAbs().maxCoeff() / a.cwiseAbs().maxCoeff();
      if (qd > 10) CHECK(d < prev);
      prev = d;
    }
    CHECK(prev < 1e-10);
  }

  TEST_CASE("fixed point rhs equals the residual") {
    std::mt19937_64 rng(5);
    for (const Setup& s : {line_setup(5), disk_setup(0.6)}) {
      for (Form form : {Form::weak, Form::strong}) {
        const DiscreteField w = random_field(s.space, rng, 0.5);
        const Eigen::VectorXd a = assemble_residual(w, FlowRegime::imcf(), 0.2, form);
        const Eigen::VectorXd b = fixed_point_rhs(w, FlowRegime::imcf(), 0.2, form);
        CHECK((a - b).cwiseAbs().maxCoeff() <= 1e-14 * (1.0 + a.cwiseAbs().maxCoeff()));
      }
    }
  }

  TEST_CASE("assembly is deterministic") {
    std::mt19937_64 rng(6);
    const Setup s = disk_setup(0.5);
    const DiscreteField w = random_field(s.space, rng, 0.5);
    const Eigen::VectorXd a = assemble_residual(w, FlowRegime::mcf(), 0.2, Form::strong);
    const Eigen::VectorXd b = assemble_residual(w, FlowRegime::mcf(), 0.2, Form::strong);
    CHECK((a - b).cwiseAbs().maxCoeff() == 0.0);
    std::ostringstream x, y;
    write_triplets(x, assemble_linearized(w, FlowRegime::mcf(), 0.2));
    write_triplets(y, assemble_linearized(w, FlowRegime::mcf(), 0.2));
    CHECK(x.str() == y.str());
    CHECK(!x.str().empty());
  }

  TEST_CASE("functionals") {
    const Setup s = disk_setup(0.5);
    const Eigen::VectorXd ones = assemble_functional(*s.full, nullptr, [](int, const Vec2&) { return 1.0; });
    // int 1 tested with the interpolant of 1 gives the area
    const DiscreteField one =
        interpolate(s.full, [](const Vec2&) { return Jet{1.0, Vec2::Zero(), Mat2::Zero()}; });
    const double area = field_norm(one, 0, 1.0);
    CHECK(ones.dot(one.coefficients()) == doctest::Approx(area).epsilon(1e-12));

    // f = D(|x|^2): div f = 4
    const Eigen::VectorXd lap = assemble_functional(
        *s.full, [](int, const Vec2& x) { return VectorJet{2.0 * x, 2.0 * Mat2::Identity()}; }, nullptr);
    CHECK((lap - 4.0 * ones).cwiseAbs().maxCoeff() < 1e-12);

    // compactly supported f: pointwise and integrated-by-parts assembly agree
    auto bump = [](int, const Vec2& x) {
      const double s2 = 0.25, r2 = x.squaredNorm();
      VectorJet v;
      if (r2 >= s2) return v;
      const double q = 1.0 - r2 / s2;  // f = D (q^4)
      v.value = -8.0 / s2 * q * q * q * x;
      v.jac = -8.0 / s2 * q * q * q * Mat2::Identity() + 48.0 / (s2 * s2) * q * q * x * x.transpose();
      return v;
    };
    const Eigen::VectorXd a = assemble_functional(*s.full, bump, nullptr);
    const Eigen::VectorXd b = assemble_functional_weak(*s.full, bump, nullptr);
    CHECK((a - b).cwiseAbs().maxCoeff() < 1e-3 * a.cwiseAbs().maxCoeff());

    // 1D, f vanishing at the ends: exact
    const Setup l = line_setup(4);
    auto f1 = [](int, const Vec2& x) {
      const double t = x.x(), q = 1.0 - t * t;
      VectorJet v;
      v.value = Vec2(t * q * q, 0.0);
      v.jac(0, 0) = q * q - 4.0 * t * t * q;
      return v;
    };
    const Eigen::VectorXd c = assemble_functional(*l.full, f1, nullptr);
    const Eigen::VectorXd d = assemble_functional_weak(*l.full, f1, nullptr);
    CHECK((c - d).cwiseAbs().maxCoeff() < 1e-13);
  }

  TEST_CASE("residual of the interpolated reference profile shrinks") {
    const FlowRegime regime = FlowRegime::imcf();
    const RadialProfile p(regime, 0.5, 1.0, 0, 8000);
    double prev = 0.0;
    for (int l = 0; l < 3; ++l) {
      const Setup s = line_setup(4 << l);
      const DiscreteField w = boundary_corrected_interpolant(s.full, s.space, p.jet_fn());
      const double r = assemble_residual(w, regime, 0.5).cwiseAbs().maxCoeff();
      if (l > 0) CHECK(r < prev / 4.0);
      prev = r;
    }
    const RadialProfile q(FlowRegime::mcf(), 0.5, 1.0, 1, 8000);
    prev = 0.0;
    for (int l = 0; l < 2; ++l) {
      const Setup s = disk_setup(0.6 / (1 << l));
      const DiscreteField w = boundary_corrected_interpolant(s.full, s.space, q.jet_fn());
      const double r = assemble_residual(w, FlowRegime::mcf(), 0.5, Form::strong).cwiseAbs().maxCoeff();
      if (l > 0) CHECK(r < prev);
      prev = r;
    }
  }

  TEST_CASE("expansion diagnostic") {
    std::mt19937_64 rng(8);
    const Setup s = disk_setup(0.6);
    const DiscreteField base = random_field(s.space, rng, 0.3);
    const DiscreteField w = base + random_field(s.space, rng, 0.05);
    const DiscreteField v = w + random_field(s.space, rng, 0.05);
    for (const auto& e : expansion_difi_diagnostic(w, w, base, 0.3)) CHECK(std::abs(e.direct) < 1e-14);
    const auto a = expansion_difi_diagnostic(w, v, base, 0.3);
    double scale = 0.0;
    for (const auto& e : a) scale = std::max(scale, std::abs(e.direct));
    REQUIRE(scale > 0.0);
    for (const auto& e : a) CHECK(std::abs(e.direct - e.expansion) <= 1e-6 * scale);
    // swapping v and w: the xi-linear part flips, the base terms stay
    const auto b = expansion_difi_diagnostic(v, w, base, 0.3);
    REQUIRE(a.size() == b.size());
    for (size_t i = 0; i < a.size(); ++i) CHECK(std::abs(b[i].direct - b[i].expansion) <= 1e-6 * scale);
  }
}
