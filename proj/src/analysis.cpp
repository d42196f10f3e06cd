#include "curvflow/analysis.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "curvflow/solver.hpp"

namespace curvflow {

namespace {

// Gradient, hessian and the drift b = D_i a_ij + c of the linearization at
// one point of `base`.
struct PointCoeffs {
  LinearizedCoeffs k;
  Vec2 b = Vec2::Zero();
};

PointCoeffs point_coeffs(const Jet& base, const FlowRegime& regime, double eps, int dim) {
  PointCoeffs p;
  p.k = linearized_coeffs(regime, eps, base.grad, dim);
  const auto d = f_eps_derivatives(base.grad, eps, dim);
  p.b = p.k.c;
  for (int j = 0; j < 2; ++j) {
    for (int i = 0; i < 2; ++i) {
      for (int m = 0; m < 2; ++m) p.b(j) -= d.third[i](j, m) * base.hess(i, m);
    }
  }
  return p;
}

Jet field_jet(const std::array<Eigen::VectorXd, 6>& v, int q) {
  Jet j;
  j.value = v[0](q);
  j.grad = Vec2(v[1](q), v[2](q));
  j.hess << v[3](q), v[4](q), v[4](q), v[5](q);
  return j;
}

std::array<Eigen::VectorXd, 6> values_at_points(const DiscreteField& f, int c) {
  const auto& cq = f.space().cell_quadrature(c);
  const Eigen::VectorXd loc = f.local(c);
  std::array<Eigen::VectorXd, 6> v;
  for (int k = 0; k < 6; ++k) v[k] = cq.jets[k].transpose() * loc;
  return v;
}

double unit_ball_volume(int d) {
  return std::pow(std::numbers::pi, d / 2.0) / std::tgamma(d / 2.0 + 1.0);
}

}  // namespace

double norm(const DiscreteField& field, const NormSpec& spec) { return field_norm(field, spec.m, spec.p); }

double norm(const Mesh& mesh, const CellJetFn& f, const NormSpec& spec, int quad_degree) {
  return sobolev_norm(mesh, reference_rule(mesh.dim(), quad_degree), f, spec.m, spec.p);
}

double error_norm(const DiscreteField& field, const JetFn& exact, const NormSpec& spec, int quad_degree) {
  return norm(
      field.space().mesh(), [&](int c, const Vec2& x) { return exact(x) - field.evaluate(c, x); }, spec,
      quad_degree);
}

std::vector<std::optional<double>> eoc(const std::vector<std::pair<double, double>>& errors) {
  std::vector<std::optional<double>> rates;
  for (size_t i = 0; i + 1 < errors.size(); ++i) {
    const auto [h0, e0] = errors[i];
    const auto [h1, e1] = errors[i + 1];
    if (!(h1 < h0) || !(h1 > 0.0)) throw ConfigError("eoc: h must be positive and strictly decreasing");
    if (e0 < 0.0 || e1 < 0.0) throw ConfigError("eoc: errors must be non-negative");
    if (e0 == 0.0 || e1 == 0.0) {
      rates.emplace_back();
    } else {
      rates.emplace_back(std::log(e0 / e1) / std::log(h0 / h1));
    }
  }
  return rates;
}

void AlexandrovInput::validate() const {
  if (!(lambda > 0.0 && lambda <= Lambda)) throw ConfigError("alexandrov: need 0 < lambda <= Lambda");
  if (!(c1 >= 0.0 && c2 >= 0.0)) throw ConfigError("alexandrov: c1, c2 must be >= 0");
  if (!(diam > 0.0 && volume > 0.0)) throw ConfigError("alexandrov: diam and volume must be > 0");
  if (!(f_norm >= 0.0)) throw ConfigError("alexandrov: f_norm must be >= 0");
  if (n < 0) throw ConfigError("alexandrov: n must be >= 0");
}

double alexandrov_constant(int n) {
  const int d = n + 1;
  return std::pow(2.0, std::max(n - 1, 0)) / (unit_ball_volume(d) * std::pow(d, d));
}

double alexandrov_bound(const AlexandrovInput& in) {
  in.validate();
  if (in.f_norm == 0.0) return 0.0;
  const int d = in.n + 1;
  const double exponent =
      alexandrov_constant(in.n) * std::pow(in.lambda, -d) * (std::pow(in.c1, d) * in.volume + 1.0) / d;
  if (exponent > 700.0) return std::numeric_limits<double>::infinity();
  return in.diam * in.f_norm * std::exp(exponent);
}

JetFn bubble_solution(const Domain& domain) {
  const double R2 = domain.R * domain.R;
  const bool disk = domain.dim() == 2;
  return [R2, disk](const Vec2& x) {
    const Vec2 y = disk ? x : Vec2(x.x(), 0.0);
    const double e = std::exp(0.5 * y.x());
    const double b = R2 - y.squaredNorm();
    const Vec2 db = -2.0 * y;
    Mat2 d2b = -2.0 * Mat2::Identity();
    if (!disk) d2b(1, 1) = 0.0;
    const Vec2 de(0.5 * e, 0.0);
    Mat2 d2e = Mat2::Zero();
    d2e(0, 0) = 0.25 * e;
    Jet j;
    j.value = b * e;
    j.grad = db * e + b * de;
    j.hess = d2b * e + db * de.transpose() + de * db.transpose() + b * d2e;
    return j;
  };
}

LinearizedBounds linearized_bounds(const DiscreteField& base, const FlowRegime& regime, double eps) {
  const FESpace& s = base.space();
  const int dim = s.mesh().dim();
  LinearizedBounds b;
  b.lambda = std::numeric_limits<double>::infinity();
  for (int c = 0; c < s.mesh().num_cells(); ++c) {
    const auto& cq = s.cell_quadrature(c);
    const auto v = values_at_points(base, c);
    for (int q = 0; q < cq.weight.size(); ++q) {
      const auto p = point_coeffs(field_jet(v, q), regime, eps, dim);
      b.lambda = std::min(b.lambda, p.k.lambda);
      b.Lambda = std::max(b.Lambda, p.k.Lambda);
      b.c1 = std::max(b.c1, p.b.norm());
    }
  }
  return b;
}

LinearSolve solve_manufactured(const DiscreteField& base, const FlowRegime& regime, double eps, const JetFn& exact,
                               Form form) {
  const auto space = base.space_ptr();
  const int dim = space->mesh().dim();
  ScalarFieldFn g;
  if (exact) {
    g = [base, regime, eps, exact, dim](int c, const Vec2& x) {
      const auto p = point_coeffs(base.evaluate(c, x), regime, eps, dim);
      const Jet u = exact(x);
      return (p.k.a.array() * u.hess.array()).sum() + p.b.dot(u.grad);
    };
  } else {
    g = [](int, const Vec2&) { return 0.0; };
  }
  const Eigen::VectorXd rhs = assemble_functional(*space, {}, g);
  const LinearSystem sys = linearized_system(base, regime, eps, rhs, form);
  LinearSolve out{DiscreteField(space, solve_linear(sys)), exact, g, linearized_bounds(base, regime, eps), eps};
  return out;
}

AlexandrovInput alexandrov_input(const LinearSolve& s, const Domain& domain) {
  const Mesh& mesh = s.solution.space().mesh();
  const int d = mesh.dim();
  AlexandrovInput in;
  in.n = d - 1;
  in.lambda = s.bounds.lambda;
  in.Lambda = s.bounds.Lambda;
  in.c1 = s.bounds.c1;
  in.c2 = 0.0;
  in.diam = domain.diameter();
  in.volume = domain.volume();
  const auto& g = s.rhs;
  in.f_norm = sobolev_norm(
      mesh, s.solution.space().rule(), [&](int c, const Vec2& x) { return Jet{g(c, x), Vec2::Zero(), Mat2::Zero()}; },
      0, d);
  return in;
}

double sup_abs(const DiscreteField& field) { return field_norm(field, 0, std::numeric_limits<double>::infinity()); }

StabilityReport stability_diagnostic(const LinearSolve& s, std::shared_ptr<const FESpace> unconstrained) {
  const Mesh& mesh = s.solution.space().mesh();
  const int d = mesh.dim();
  StabilityReport r;
  r.h = mesh.h();
  r.eps = s.eps;
  r.h2_norm = field_norm(s.solution, 2, 2.0);
  const auto& g = s.rhs;
  r.rhs_norm = sobolev_norm(
      mesh, s.solution.space().rule(), [&](int c, const Vec2& x) { return Jet{g(c, x), Vec2::Zero(), Mat2::Zero()}; },
      0, d);
  if (r.rhs_norm > 0.0) r.stability_ratio = r.h2_norm / r.rhs_norm;
  if (s.exact) {
    r.error_h1 = error_norm(s.solution, s.exact, {1, 2.0});
    const DiscreteField I = boundary_corrected_interpolant(unconstrained, s.solution.space_ptr(), s.exact);
    r.interp_error_h1 = error_norm(I, s.exact, {1, 2.0});
    if (r.interp_error_h1 > 0.0) r.best_approx_ratio = r.error_h1 / r.interp_error_h1;
  }
  return r;
}

GardingResult garding_check(const DiscreteField& u, const DiscreteField& base, const FlowRegime& regime, double eps,
                            const ScalarFieldFn& g, double eps_test, std::optional<double> c_eps) {
  if (!(eps_test > 0.0)) throw ConfigError("garding_check: eps_test must be > 0");
  const FESpace& s = u.space();
  const int dim = s.mesh().dim();
  GardingResult r;
  r.c_eps = c_eps ? *c_eps : 1.0 / (4.0 * eps_test);
  double lambda = std::numeric_limits<double>::infinity();
  double grad2 = 0.0;
  for (int c = 0; c < s.mesh().num_cells(); ++c) {
    const auto& cq = s.cell_quadrature(c);
    const auto vu = values_at_points(u, c);
    const auto vb = values_at_points(base, c);
    for (int q = 0; q < cq.weight.size(); ++q) {
      const Jet ju = field_jet(vu, q);
      const auto k = linearized_coeffs(regime, eps, Vec2(vb[1](q), vb[2](q)), dim);
      lambda = std::min(lambda, k.lambda);
      const double w = cq.weight(q);
      const double gq = g ? g(c, cq.x[q]) : 0.0;
      grad2 += w * ju.grad.squaredNorm();
      const double cdu = k.c.dot(ju.grad);
      r.rhs += w * (eps_test * cdu * cdu + r.c_eps * ju.value * ju.value + gq * gq + ju.value * ju.value);
    }
  }
  r.lhs = lambda * grad2;
  r.holds = r.lhs <= r.rhs;
  return r;
}

bool embedding_precondition(int m, double p, int k, double alpha, int n) {
  const double dp = std::isinf(p) ? 0.0 : (n + 1.0) / p;
  return m - dp >= k + alpha - 1e-12;
}

double holder_norm(const DiscreteField& f, int k, double alpha, int pairs, std::uint64_t seed) {
  if (k < 0 || k > 2) throw ConfigError("holder_norm: k must be 0, 1 or 2");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw ConfigError("holder_norm: alpha must be in [0, 1]");
  const Mesh& mesh = f.space().mesh();
  const double inf = std::numeric_limits<double>::infinity();
  // sup |D^j f| for j <= k, by sampling
  std::array<double, 3> sup{};
  sobolev_norm(
      mesh, f.space().rule(),
      [&](int c, const Vec2& x) {
        const Jet a = f.evaluate(c, x);
        sup[0] = std::max(sup[0], std::abs(a.value));
        sup[1] = std::max(sup[1], a.grad.norm());
        sup[2] = std::max(sup[2], a.hess.norm());
        return Jet{};
      },
      0, inf);
  double total = 0.0;
  for (int j = 0; j <= k; ++j) total += sup[j];
  auto derivative = [k](const Jet& a) -> Eigen::VectorXd {
    if (k == 0) return Eigen::VectorXd::Constant(1, a.value);
    if (k == 1) return a.grad;
    return Eigen::Map<const Eigen::VectorXd>(a.hess.data(), 4);
  };
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> cell(0, mesh.num_cells() - 1);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  auto sample = [&]() {
    const int c = cell(rng);
    Vec2 ref(u01(rng), mesh.dim() == 2 ? u01(rng) : 0.0);
    if (ref.x() + ref.y() > 1.0) ref = Vec2(1.0 - ref.x(), 1.0 - ref.y());
    return std::make_pair(c, mesh.map(c, ref));
  };
  const double min_sep = mesh.h() / 10.0;
  double semi = 0.0;
  for (int i = 0; i < pairs; ++i) {
    const auto [c0, x0] = sample();
    auto [c1, x1] = sample();
    for (int tries = 0; (x1 - x0).norm() < min_sep && tries < 20; ++tries) std::tie(c1, x1) = sample();
    const double dist = (x1 - x0).norm();
    if (dist < min_sep) continue;
    const double diff = (derivative(f.evaluate(c0, x0)) - derivative(f.evaluate(c1, x1))).norm();
    semi = std::max(semi, diff / std::pow(dist, alpha));
  }
  return total + semi;
}

EmbeddingReport sobolev_embedding_check(const std::vector<DiscreteField>& fields, int m, double p, int k,
                                        double alpha, int n, int pairs, std::uint64_t seed) {
  EmbeddingReport r;
  r.precondition = embedding_precondition(m, p, k, alpha, n);
  r.pairs = pairs;
  r.seed = seed;
  if (!r.precondition) return r;
  for (const auto& f : fields) {
    const double w = field_norm(f, m, p);
    const double c = holder_norm(f, k, alpha, pairs, seed);
    r.ratios.push_back(w > 0.0 ? c / w : (c == 0.0 ? 0.0 : std::numeric_limits<double>::infinity()));
    r.max_ratio = std::max(r.max_ratio, r.ratios.back());
  }
  return r;
}

}  // namespace curvflow
