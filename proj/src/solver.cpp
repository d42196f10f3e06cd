#include "curvflow/solver.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>

namespace curvflow {

namespace {

using ColMatrix = Eigen::SparseMatrix<double>;

std::shared_ptr<Eigen::SparseLU<ColMatrix>> factorize(const SparseMatrix& A) {
  auto lu = std::make_shared<Eigen::SparseLU<ColMatrix>>();
  ColMatrix M = A;
  M.makeCompressed();
  lu->analyzePattern(M);
  lu->factorize(M);
  if (lu->info() != Eigen::Success) {
    throw SolverError("sparse LU failed: " + lu->lastErrorMessage() + " (matrix singular or nearly so)");
  }
  return lu;
}

double sup_norm(const Eigen::VectorXd& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace

Eigen::VectorXd solve_linear(const LinearSystem& system) {
  const auto lu = factorize(system.matrix);
  Eigen::VectorXd x = lu->solve(system.rhs);
  // two steps of iterative refinement against the unfactorised matrix
  for (int it = 0; it < 2 && x.allFinite(); ++it) x += lu->solve(system.rhs - system.matrix * x);
  const double scale = system.matrix.norm() * x.norm() + system.rhs.norm();
  const double rn = (system.matrix * x - system.rhs).norm();
  if (!x.allFinite() || rn > 1e-10 * std::max(scale, std::numeric_limits<double>::min())) {
    std::ostringstream os;
    os << "linear solve inaccurate: residual " << rn << " relative to |A||x|+|b| = " << scale
       << " (ill-conditioned system)";
    throw SolverError(os.str());
  }
  return x;
}

FixedPointMap::FixedPointMap(const DiscreteField& base, const FlowRegime& regime, double eps, Form form)
    : base_(base), regime_(regime), eps_(eps), form_(form) {
  const LinearSystem s =
      linearized_system(base, regime, eps, Eigen::VectorXd::Zero(base.space().num_dofs()), form);
  constrained_ = s.constrained;
  lu_ = factorize(s.matrix);
}

Eigen::VectorXd FixedPointMap::solve(const Eigen::VectorXd& rhs) const {
  Eigen::VectorXd b = rhs;
  for (size_t d = 0; d < constrained_.size(); ++d) {
    if (constrained_[d]) b(d) = 0.0;
  }
  Eigen::VectorXd x = lu_->solve(b);
  if (!x.allFinite()) throw SolverError("frozen Jacobian solve produced non-finite values");
  return x;
}

DiscreteField FixedPointMap::apply(const DiscreteField& w) const {
  const Eigen::VectorXd delta = solve(fixed_point_rhs(w, regime_, eps_, form_));
  return DiscreteField(w.space_ptr(), w.coefficients() - delta);
}

DiscreteField apply_T(const DiscreteField& w, const DiscreteField& base, const FlowRegime& regime, double eps,
                      Form form) {
  return FixedPointMap(base, regime, eps, form).apply(w);
}

bool IterationTrace::all_in_ball() const {
  for (const auto& r : records) {
    if (!r.in_ball) return false;
  }
  return true;
}

void IterationTrace::write_csv(std::ostream& os) const {
  os << "k,step_norm,residual,in_ball\n";
  char buf[128];
  for (const auto& r : records) {
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%d\n", r.k, r.step_norm, r.residual, r.in_ball ? 1 : 0);
    os << buf;
  }
}

FixedPointResult fixed_point_solve(const DiscreteField& base, const FlowRegime& regime, double eps,
                                   const FixedPointOptions& options) {
  const FixedPointMap T(base, regime, eps, options.form);
  FixedPointResult res{base, {}, false, "max_iter"};
  res.trace.rho = options.rho;
  res.trace.mu = options.mu;
  DiscreteField w = base;
  int growth = 0;
  double prev = std::numeric_limits<double>::infinity();
  for (int k = 0; k < options.max_iter; ++k) {
    DiscreteField next = T.apply(w);
    IterationRecord r;
    r.k = k;
    r.step_norm = field_norm(next - w, 2, options.mu);
    r.residual = sup_norm(assemble_residual(next, regime, eps, options.form));
    r.distance = field_norm(next - base, 2, options.mu);
    r.in_ball = r.distance <= options.rho;
    res.trace.records.push_back(r);
    w = std::move(next);
    if (!std::isfinite(r.step_norm)) {
      res.status = "diverged";
      break;
    }
    if (r.step_norm <= options.tol) {
      res.converged = true;
      res.status = "converged";
      break;
    }
    growth = r.step_norm > prev ? growth + 1 : 0;
    prev = r.step_norm;
    if (growth >= 3) {
      res.status = "diverged";
      break;
    }
  }
  res.solution = w;
  return res;
}

NewtonResult newton_solve(const DiscreteField& initial, const FlowRegime& regime, double eps, int max_iter,
                          double tol, Form form) {
  NewtonResult res{initial, {}, 0, false, "max_iter"};
  DiscreteField w = initial;
  Eigen::VectorXd R = assemble_residual(w, regime, eps, form);
  res.residuals.push_back(sup_norm(R));
  int growth = 0;
  while (true) {
    if (res.residuals.back() <= tol) {
      res.converged = true;
      res.status = "converged";
      break;
    }
    if (res.iterations >= max_iter) break;
    const LinearSystem s = linearized_system(w, regime, eps, R, form);
    const Eigen::VectorXd delta = solve_linear(s);
    w.coefficients() -= delta;
    ++res.iterations;
    R = assemble_residual(w, regime, eps, form);
    const double rn = sup_norm(R);
    growth = rn > res.residuals.back() ? growth + 1 : 0;
    res.residuals.push_back(rn);
    if (!std::isfinite(rn) || growth >= 3) {
      res.status = "diverged";
      break;
    }
  }
  res.solution = w;
  return res;
}

ContractionResult contraction_rate(const FixedPointMap& T, const ContractionOptions& options) {
  if (options.pairs < 1) throw ConfigError("contraction: pairs must be >= 1");
  if (!(options.rho > 0.0) || !(options.radius_fraction > 0.0)) {
    throw ConfigError("contraction: perturbation radius must be > 0");
  }
  const DiscreteField& base = T.base();
  const auto space = base.space_ptr();
  std::mt19937_64 rng(options.seed);
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  std::uniform_real_distribution<double> size(0.1, 1.0);
  auto perturbed = [&]() {
    Eigen::VectorXd d(space->num_free());
    for (int i = 0; i < d.size(); ++i) d(i) = coef(rng);
    DiscreteField p = DiscreteField::zero(space);
    p.set_free_coefficients(d);
    const double norm = field_norm(p, 2, options.mu);
    const double target = options.radius_fraction * options.rho * size(rng);
    return base + p * (target / norm);
  };
  ContractionResult out;
  out.seed = options.seed;
  for (int k = 0; k < options.pairs; ++k) {
    const DiscreteField v = perturbed();
    const DiscreteField w = perturbed();
    const double num = field_norm(T.apply(v) - T.apply(w), 2, options.mu);
    const double den = field_norm(v - w, 2, options.mu);
    out.ratios.push_back(num / den);
    out.rate = std::max(out.rate, num / den);
  }
  return out;
}

}  // namespace curvflow
