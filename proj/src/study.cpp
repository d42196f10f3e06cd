#include "curvflow/study.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <limits>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <Eigen/Core>
#include <toml.hpp>

#include "curvflow/analysis.hpp"
#include "curvflow/oracle.hpp"
#include "curvflow/solver.hpp"

namespace curvflow::study {

namespace {

std::string num(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string num(const std::optional<double>& v) { return v ? num(*v) : "saturated"; }

nlohmann::json jnum(double v) {
  if (std::isfinite(v)) return v;
  return num(v);
}

nlohmann::json jnum(const std::optional<double>& v) { return v ? jnum(*v) : nlohmann::json(nullptr); }

class Table {
 public:
  explicit Table(std::vector<std::string> header) : header_(std::move(header)) {}
  void add(std::vector<std::string> row) { rows_.push_back(std::move(row)); }
  std::string csv() const {
    std::ostringstream os;
    auto line = [&os](const std::vector<std::string>& r) {
      for (size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << r[i];
      os << '\n';
    };
    line(header_);
    for (const auto& r : rows_) line(r);
    return os.str();
  }

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

// Rate at each level against the previous one; empty when either level has
// no value. The inner optional is empty for saturated rates.
using LevelRate = std::optional<std::optional<double>>;

std::vector<LevelRate> level_rates(const std::vector<std::optional<std::pair<double, double>>>& he) {
  std::vector<LevelRate> out(he.size());
  for (size_t l = 1; l < he.size(); ++l) {
    if (he[l - 1] && he[l]) out[l] = eoc({*he[l - 1], *he[l]}).front();
  }
  return out;
}

std::string num(const LevelRate& r) { return r ? num(*r) : ""; }

nlohmann::json jnum(const LevelRate& r) { return r ? jnum(*r) : nlohmann::json(nullptr); }

std::string eps_tag(double eps) {
  std::string s = num(eps);
  for (char& c : s) {
    if (c == '.') c = 'p';
  }
  return s;
}

// sin(pi x) cos(pi y / 2); on the interval the y-dependence is dropped.
JetFn interpolation_target(int dim) {
  const double pi = std::acos(-1.0);
  return [pi, dim](const Vec2& x) {
    const double s = std::sin(pi * x.x()), cx = std::cos(pi * x.x());
    const double y = dim == 2 ? x.y() : 0.0;
    const double c = std::cos(0.5 * pi * y), sy = std::sin(0.5 * pi * y);
    Jet j;
    j.value = s * c;
    j.grad = Vec2(pi * cx * c, dim == 2 ? -0.5 * pi * s * sy : 0.0);
    j.hess(0, 0) = -pi * pi * s * c;
    if (dim == 2) {
      j.hess(0, 1) = j.hess(1, 0) = -0.5 * pi * pi * cx * sy;
      j.hess(1, 1) = -0.25 * pi * pi * s * c;
    }
    return j;
  };
}

// Everything shared by the cells of one study.
struct Context {
  const StudyConfig& cfg;
  Domain domain;
  ElementKind element;
  FlowRegime regime;
  Form form;
  std::vector<std::shared_ptr<const Mesh>> meshes;
  std::vector<std::shared_ptr<const FESpace>> free_spaces, spaces;
  std::map<double, std::shared_ptr<const RadialProfile>> profiles;
};

struct CellTheory {
  conditions::ConditionReport report;
  bool in_theory = false;
  double rho = std::numeric_limits<double>::infinity();
};

CellTheory cell_theory(const StudyConfig& cfg, double eps, double h) {
  CellTheory t;
  t.report = conditions::sufficient_conditions(cell_parameters(cfg, eps, h));
  t.in_theory = t.report.sufficient.all() && t.report.rho.has_value();
  if (t.report.rho) t.rho = *t.report.rho;
  return t;
}

void ensure_meshes(Context& ctx) {
  if (!ctx.meshes.empty()) return;
  ctx.meshes = build_levels(ctx.cfg);
  for (const auto& m : ctx.meshes) {
    ctx.free_spaces.push_back(build_space(m, ctx.element, false));
    ctx.spaces.push_back(build_space(m, ctx.element, true));
  }
}

void ensure_profiles(Context& ctx) {
  if (!ctx.profiles.empty()) return;
  const auto& eps = ctx.cfg.eps;
  std::vector<std::shared_ptr<const RadialProfile>> out(eps.size());
  std::vector<std::string> errors(eps.size());
  parallel_for(static_cast<int>(eps.size()), [&](int i) {
    try {
      out[i] = std::make_shared<const RadialProfile>(
          radial_solve(ctx.regime, eps[i], ctx.domain.R, ctx.domain.dim() - 1, ctx.cfg.resolution));
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  });
  for (size_t i = 0; i < eps.size(); ++i) {
    if (!errors[i].empty()) throw SolverError(errors[i]);
    ctx.profiles[eps[i]] = out[i];
  }
}

// ---------------------------------------------------------------------------

void run_conditions(Context& ctx, StudyResult& res) {
  const auto& cfg = ctx.cfg;
  const double h = cfg.domain == "interval" ? 2.0 * cfg.R / cfg.cells0 : cfg.h0;
  const auto p = cell_parameters(cfg, cfg.eps.front(), h);
  const auto rep = conditions::sufficient_conditions(p);
  nlohmann::json j = conditions::to_json(rep);
  j["parameters"] = conditions::to_json(p);
  j["wdeg_lower_bound"] = conditions::wdeg_lower_bound(p.mu);
  res.report["results"]["conditions"] = j;

  Table t({"field", "value"});
  t.add({"nu", num(rep.nu)});
  t.add({"delta_lower", rep.delta_interval ? num(rep.delta_interval->first) : "none"});
  t.add({"delta_upper", rep.delta_interval ? num(rep.delta_interval->second) : "none"});
  t.add({"wdeg_lower_bound", num(conditions::wdeg_lower_bound(p.mu))});
  for (int i = 0; i < 5; ++i) t.add({"exponent_" + std::to_string(i + 1), num(rep.exponents[i])});
  t.add({"rho", rep.rho ? num(*rep.rho) : "overflow"});
  t.add({"all_sufficient", rep.sufficient.all() ? "true" : "false"});
  res.tables["conditions.csv"] = t.csv();
  if (!rep.delta_interval || !(p.delta > rep.delta_interval->first && p.delta < rep.delta_interval->second)) {
    res.messages.push_back("conditions: delta = " + num(p.delta) + " is not inside the admissible interval (" +
                           (rep.delta_interval ? "lower " + num(rep.delta_interval->first) : std::string("empty")) +
                           ", nu = " + num(rep.nu) + "); checked separately from the sufficient conditions");
  }
  if (!rep.sufficient.all() || !rep.rho) {
    res.out_of_theory = true;
    res.messages.push_back("conditions: parameters outside the sufficient conditions");
  }
}

void run_mesh_info(Context& ctx, StudyResult& res) {
  ensure_meshes(ctx);
  Table t({"level", "h", "shape_ratio", "vertices", "cells", "boundary_facets", "boundary_deviation",
           "strip_constant"});
  nlohmann::json rows = nlohmann::json::array();
  for (size_t l = 0; l < ctx.meshes.size(); ++l) {
    const Mesh& m = *ctx.meshes[l];
    const double dev = boundary_deviation(m, ctx.domain);
    const double strip = boundary_strip_constant(m, ctx.domain, ctx.cfg.wdeg);
    t.add({std::to_string(l), num(m.h()), num(m.shape_ratio()), std::to_string(m.num_vertices()),
           std::to_string(m.num_cells()), std::to_string(m.boundary_facets().size()), num(dev), num(strip)});
    rows.push_back({{"level", l},
                    {"h", m.h()},
                    {"shape_ratio", m.shape_ratio()},
                    {"vertices", m.num_vertices()},
                    {"cells", m.num_cells()},
                    {"boundary_deviation", dev},
                    {"strip_constant", strip}});
  }
  res.report["results"]["mesh"] = rows;
  res.tables["mesh.csv"] = t.csv();
}

void run_interp(Context& ctx, StudyResult& res) {
  ensure_meshes(ctx);
  const JetFn target = interpolation_target(ctx.domain.dim());
  const int L = static_cast<int>(ctx.meshes.size());
  std::vector<std::array<double, 3>> err(L);
  parallel_for(L, [&](int l) {
    for (int m = 0; m <= 2; ++m) err[l][m] = interpolation_error(ctx.free_spaces[l], target, m, 2.0);
  });
  std::array<std::vector<std::optional<double>>, 3> rates;
  for (int m = 0; m <= 2; ++m) {
    std::vector<std::pair<double, double>> he;
    for (int l = 0; l < L; ++l) he.emplace_back(ctx.meshes[l]->h(), err[l][m]);
    rates[m] = eoc(he);
  }
  Table t({"level", "h", "err_L2", "err_H1", "err_H2", "eoc_L2", "eoc_H1", "eoc_H2"});
  nlohmann::json rows = nlohmann::json::array();
  for (int l = 0; l < L; ++l) {
    std::vector<std::string> row{std::to_string(l), num(ctx.meshes[l]->h())};
    nlohmann::json jr{{"level", l}, {"h", ctx.meshes[l]->h()}};
    const char* names[3] = {"L2", "H1", "H2"};
    for (int m = 0; m <= 2; ++m) {
      row.push_back(num(err[l][m]));
      jr[std::string("err_") + names[m]] = err[l][m];
    }
    for (int m = 0; m <= 2; ++m) {
      row.push_back(l ? num(rates[m][l - 1]) : "");
      jr[std::string("eoc_") + names[m]] = l ? jnum(rates[m][l - 1]) : nlohmann::json(nullptr);
    }
    t.add(row);
    rows.push_back(jr);
  }
  res.report["results"]["interpolation"] = {{"element", ctx.element.name()},
                                            {"function", ctx.domain.dim() == 1 ? "sin(pi x)" : "sin(pi x) cos(pi y / 2)"},
                                            {"rows", rows}};
  res.tables["interpolation.csv"] = t.csv();
}

// Boundary-corrected interpolant of the reference solution.
DiscreteField reference_interpolant(const Context& ctx, int level, double eps) {
  return boundary_corrected_interpolant(ctx.free_spaces[level], ctx.spaces[level], ctx.profiles.at(eps)->jet_fn());
}

struct Cell {
  int eps_index;
  int level;
};

std::vector<Cell> cells_of(const Context& ctx) {
  std::vector<Cell> cells;
  for (int e = 0; e < static_cast<int>(ctx.cfg.eps.size()); ++e) {
    for (int l = 0; l < static_cast<int>(ctx.meshes.size()); ++l) cells.push_back({e, l});
  }
  return cells;
}

void note_theory(StudyResult& res, const CellTheory& th, double eps, double h, const std::string& study) {
  if (th.in_theory) return;
  res.out_of_theory = true;
  res.messages.push_back(study + ": eps = " + num(eps) + ", h = " + num(h) + " outside the sufficient conditions" +
                         (th.report.rho ? "" : " (radius overflow)"));
}

void run_linear(Context& ctx, StudyResult& res) {
  ensure_meshes(ctx);
  ensure_profiles(ctx);
  const auto cells = cells_of(ctx);
  const JetFn exact = bubble_solution(ctx.domain);
  struct Out {
    StabilityReport stab;
    double sup = 0.0, bound = 0.0;
    AlexandrovInput alex;
    GardingResult garding;
    std::string error;
  };
  std::vector<Out> out(cells.size());
  parallel_for(static_cast<int>(cells.size()), [&](int i) {
    const double eps = ctx.cfg.eps[cells[i].eps_index];
    const int l = cells[i].level;
    try {
      const DiscreteField base = reference_interpolant(ctx, l, eps);
      const LinearSolve s = solve_manufactured(base, ctx.regime, eps, exact, ctx.form);
      out[i].stab = stability_diagnostic(s, ctx.free_spaces[l]);
      out[i].sup = sup_abs(s.solution);
      out[i].alex = alexandrov_input(s, ctx.domain);
      out[i].bound = alexandrov_bound(out[i].alex);
      out[i].garding = garding_check(s.solution, base, ctx.regime, eps, s.rhs, ctx.cfg.eps_test);
    } catch (const SolverError& e) {
      out[i].error = e.what();
    }
  });
  Table t({"eps", "h", "sup_u", "alexandrov_bound", "bound_valid", "h2_norm", "rhs_norm", "stability_ratio",
           "error_h1", "interp_error_h1", "best_approx_ratio", "garding_lhs", "garding_rhs", "garding_holds"});
  nlohmann::json rows = nlohmann::json::array();
  for (size_t i = 0; i < cells.size(); ++i) {
    const double eps = ctx.cfg.eps[cells[i].eps_index];
    const double h = ctx.meshes[cells[i].level]->h();
    note_theory(res, cell_theory(ctx.cfg, eps, h), eps, h, "linear-study");
    const auto& o = out[i];
    if (!o.error.empty()) {
      res.failed = true;
      res.messages.push_back("linear-study: " + o.error);
      rows.push_back({{"eps", eps}, {"h", h}, {"error", o.error}});
      continue;
    }
    const bool valid = o.bound >= o.sup;
    t.add({num(eps), num(h), num(o.sup), num(o.bound), valid ? "true" : "false", num(o.stab.h2_norm),
           num(o.stab.rhs_norm), o.stab.stability_ratio ? num(*o.stab.stability_ratio) : "undefined",
           num(o.stab.error_h1), num(o.stab.interp_error_h1),
           o.stab.best_approx_ratio ? num(*o.stab.best_approx_ratio) : "undefined", num(o.garding.lhs),
           num(o.garding.rhs), o.garding.holds ? "true" : "false"});
    rows.push_back({{"eps", eps},
                    {"h", h},
                    {"sup_u", o.sup},
                    {"alexandrov",
                     {{"bound", jnum(o.bound)},
                      {"lambda", o.alex.lambda},
                      {"Lambda", o.alex.Lambda},
                      {"c1", o.alex.c1},
                      {"f_norm", o.alex.f_norm},
                      {"valid", valid}}},
                    {"stability_ratio", jnum(o.stab.stability_ratio)},
                    {"best_approx_ratio", jnum(o.stab.best_approx_ratio)},
                    {"log_stability_ratio", o.stab.stability_ratio ? jnum(std::log(*o.stab.stability_ratio))
                                                                    : nlohmann::json(nullptr)},
                    {"log_inv_eps", std::log(1.0 / eps)},
                    {"error_h1", o.stab.error_h1},
                    {"interp_error_h1", o.stab.interp_error_h1},
                    {"garding", {{"lhs", o.garding.lhs}, {"rhs", o.garding.rhs}, {"c_eps", o.garding.c_eps},
                                 {"holds", o.garding.holds}}}});
  }
  res.report["results"]["linear"] = {{"manufactured_solution", "(R^2 - |x|^2) exp(x_1 / 2)"},
                                     {"eps_test", ctx.cfg.eps_test},
                                     {"rows", rows}};
  res.tables["linear.csv"] = t.csv();
}

void run_solve(Context& ctx, StudyResult& res) {
  ensure_meshes(ctx);
  ensure_profiles(ctx);
  const auto& cfg = ctx.cfg;
  const auto cells = cells_of(ctx);
  struct Out {
    CellTheory theory;
    std::optional<FixedPointResult> fp;
    std::optional<NewtonResult> nw;
    double diff_h1 = 0.0, err_h1 = 0.0, interp_w2mu = 0.0, final_residual = 0.0;
    int dofs = 0;
    std::string error;
  };
  std::vector<Out> out(cells.size());
  parallel_for(static_cast<int>(cells.size()), [&](int i) {
    const double eps = cfg.eps[cells[i].eps_index];
    const int l = cells[i].level;
    auto& o = out[i];
    o.theory = cell_theory(cfg, eps, ctx.meshes[l]->h());
    o.dofs = ctx.spaces[l]->num_free();
    try {
      const auto& profile = *ctx.profiles.at(eps);
      const DiscreteField base = reference_interpolant(ctx, l, eps);
      FixedPointOptions opt;
      opt.max_iter = cfg.max_iter;
      opt.tol = cfg.tol;
      opt.mu = cfg.mu;
      opt.rho = o.theory.rho;
      opt.form = ctx.form;
      o.fp = fixed_point_solve(base, ctx.regime, eps, opt);
      o.nw = newton_solve(base, ctx.regime, eps, cfg.max_iter, cfg.newton_tol, ctx.form);
      o.diff_h1 = field_norm(o.fp->solution - o.nw->solution, 1, 2.0);
      o.err_h1 = error_norm(o.fp->solution, profile.jet_fn(), {1, 2.0});
      o.interp_w2mu = error_norm(base, profile.jet_fn(), {2, cfg.mu});
      o.final_residual = assemble_residual(o.fp->solution, ctx.regime, eps, ctx.form).cwiseAbs().maxCoeff();
    } catch (const SolverError& e) {
      o.error = e.what();
    }
  });

  Table t({"eps", "h", "dofs", "in_theory", "rho", "fp_status", "fp_iterations", "fp_residual", "in_ball",
           "newton_status", "newton_iterations", "newton_residual", "diff_h1", "err_h1", "eoc_h1",
           "interp_w2mu"});
  nlohmann::json rows = nlohmann::json::array();
  const size_t L = ctx.meshes.size();
  std::map<int, std::vector<std::optional<std::pair<double, double>>>> errors;
  for (size_t i = 0; i < cells.size(); ++i) {
    auto& e = errors[cells[i].eps_index];
    e.resize(L);
    if (out[i].error.empty()) e[cells[i].level] = std::make_pair(ctx.meshes[cells[i].level]->h(), out[i].err_h1);
  }
  std::map<int, std::vector<LevelRate>> rates;
  for (const auto& [e, he] : errors) rates[e] = level_rates(he);

  for (size_t i = 0; i < cells.size(); ++i) {
    const double eps = cfg.eps[cells[i].eps_index];
    const int l = cells[i].level;
    const double h = ctx.meshes[l]->h();
    const auto& o = out[i];
    note_theory(res, o.theory, eps, h, "solve");
    nlohmann::json jr{{"eps", eps}, {"h", h}, {"dofs", o.dofs}, {"in_theory", o.theory.in_theory},
                      {"rho", jnum(o.theory.rho)}};
    if (!o.error.empty()) {
      res.failed = true;
      res.messages.push_back("solve: eps = " + num(eps) + ", h = " + num(h) + ": " + o.error);
      jr["error"] = o.error;
      rows.push_back(jr);
      continue;
    }
    if (!o.fp->converged || !o.nw->converged) {
      res.failed = true;
      res.messages.push_back("solve: eps = " + num(eps) + ", h = " + num(h) + ": fixed point " + o.fp->status +
                             ", newton " + o.nw->status);
    }
    if (o.theory.in_theory && !o.fp->trace.all_in_ball()) {
      res.messages.push_back("solve: eps = " + num(eps) + ", h = " + num(h) +
                             ": iterate left the ball although the sufficient conditions hold");
    }
    const LevelRate rate = rates[cells[i].eps_index][l];
    t.add({num(eps), num(h), std::to_string(o.dofs), o.theory.in_theory ? "true" : "false", num(o.theory.rho),
           o.fp->status, std::to_string(o.fp->trace.records.size()), num(o.final_residual),
           o.fp->trace.all_in_ball() ? "true" : "false", o.nw->status, std::to_string(o.nw->iterations),
           num(o.nw->residuals.back()), num(o.diff_h1), num(o.err_h1), num(rate),
           num(o.interp_w2mu)});
    jr["fixed_point"] = {{"status", o.fp->status},
                         {"iterations", o.fp->trace.records.size()},
                         {"final_residual", o.final_residual},
                         {"all_in_ball", o.fp->trace.all_in_ball()}};
    jr["newton"] = {{"status", o.nw->status}, {"iterations", o.nw->iterations},
                    {"final_residual", o.nw->residuals.back()}};
    jr["diff_h1"] = o.diff_h1;
    jr["err_h1"] = o.err_h1;
    jr["eoc_h1"] = jnum(rate);
    jr["interp_w2mu"] = o.interp_w2mu;
    rows.push_back(jr);

    std::ostringstream trace;
    o.fp->trace.write_csv(trace);
    res.tables["trace_eps" + eps_tag(eps) + "_L" + std::to_string(l) + ".csv"] = trace.str();
  }
  res.report["results"]["solve"] = {{"form", form_name(ctx.form)}, {"rows", rows}};
  res.tables["solve.csv"] = t.csv();
}

void run_contraction(Context& ctx, StudyResult& res) {
  ensure_meshes(ctx);
  ensure_profiles(ctx);
  const auto& cfg = ctx.cfg;
  const auto cells = cells_of(ctx);
  struct Out {
    CellTheory theory;
    ContractionResult rate;
    double rho_used = 0.0;
    std::string error;
  };
  std::vector<Out> out(cells.size());
  parallel_for(static_cast<int>(cells.size()), [&](int i) {
    const double eps = cfg.eps[cells[i].eps_index];
    const int l = cells[i].level;
    auto& o = out[i];
    o.theory = cell_theory(cfg, eps, ctx.meshes[l]->h());
    try {
      const FixedPointMap T(reference_interpolant(ctx, l, eps), ctx.regime, eps, ctx.form);
      ContractionOptions opt;
      opt.pairs = cfg.pairs;
      opt.mu = cfg.mu;
      opt.rho = std::isfinite(o.theory.rho) ? o.theory.rho : 1.0;
      opt.radius_fraction = cfg.radius_fraction;
      opt.seed = cfg.seed;
      o.rho_used = opt.rho;
      o.rate = contraction_rate(T, opt);
    } catch (const SolverError& e) {
      o.error = e.what();
    }
  });
  const size_t L = ctx.meshes.size();
  std::map<int, std::vector<std::optional<std::pair<double, double>>>> series;
  for (size_t i = 0; i < cells.size(); ++i) {
    auto& e = series[cells[i].eps_index];
    e.resize(L);
    if (out[i].error.empty()) e[cells[i].level] = std::make_pair(ctx.meshes[cells[i].level]->h(), out[i].rate.rate);
  }
  std::map<int, std::vector<LevelRate>> eta;
  for (const auto& [e, s] : series) eta[e] = level_rates(s);

  Table t({"eps", "h", "in_theory", "rho", "rate", "eta", "pairs", "seed"});
  nlohmann::json rows = nlohmann::json::array();
  double max_rate = 0.0;
  for (size_t i = 0; i < cells.size(); ++i) {
    const double eps = cfg.eps[cells[i].eps_index];
    const int l = cells[i].level;
    const double h = ctx.meshes[l]->h();
    const auto& o = out[i];
    note_theory(res, o.theory, eps, h, "contraction-study");
    if (!std::isfinite(o.theory.rho)) {
      res.messages.push_back("contraction-study: radius overflows at eps = " + num(eps) + ", sampled with radius 1");
    }
    if (!o.error.empty()) {
      res.failed = true;
      res.messages.push_back("contraction-study: " + o.error);
      rows.push_back({{"eps", eps}, {"h", h}, {"error", o.error}});
      continue;
    }
    max_rate = std::max(max_rate, o.rate.rate);
    if (o.theory.in_theory && o.rate.rate >= 1.0) {
      res.messages.push_back("contraction-study: rate " + num(o.rate.rate) + " >= 1 at eps = " + num(eps) +
                             ", h = " + num(h) + " with the sufficient conditions satisfied");
    }
    const LevelRate e = eta[cells[i].eps_index][l];
    t.add({num(eps), num(h), o.theory.in_theory ? "true" : "false", num(o.rho_used), num(o.rate.rate),
           num(e), std::to_string(cfg.pairs), std::to_string(o.rate.seed)});
    rows.push_back({{"eps", eps},
                    {"h", h},
                    {"in_theory", o.theory.in_theory},
                    {"rho", o.rho_used},
                    {"rate", o.rate.rate},
                    {"ratios", o.rate.ratios},
                    {"eta", jnum(e)},
                    {"seed", o.rate.seed}});
  }
  res.report["results"]["contraction"] = {{"max_rate", max_rate},
                                          {"pairs", cfg.pairs},
                                          {"seed", cfg.seed},
                                          {"radius_fraction", cfg.radius_fraction},
                                          {"rows", rows}};
  res.tables["contraction.csv"] = t.csv();
}

void run_oracle(Context& ctx, StudyResult& res) {
  const auto& cfg = ctx.cfg;
  const int n = ctx.domain.dim() - 1;
  std::vector<std::optional<RadialProfile>> out(cfg.eps.size());
  std::vector<std::string> errors(cfg.eps.size());
  parallel_for(static_cast<int>(cfg.eps.size()), [&](int i) {
    try {
      out[i].emplace(radial_solve(ctx.regime, cfg.eps[i], ctx.domain.R, n, cfg.resolution));
    } catch (const SolverError& e) {
      errors[i] = e.what();
    }
  });
  nlohmann::json profiles = nlohmann::json::array();
  Table gap({"eps", "gap", "accuracy", "ode_residual"});
  const bool exact = ctx.regime.is_mcf() && ctx.regime.alpha == -1.0 && n >= 1;
  for (size_t i = 0; i < cfg.eps.size(); ++i) {
    if (!errors[i].empty()) {
      res.failed = true;
      res.messages.push_back("oracle: " + errors[i]);
      profiles.push_back({{"eps", cfg.eps[i]}, {"error", errors[i]}});
      continue;
    }
    const auto& p = *out[i];
    std::ostringstream csv;
    write_profile_csv(csv, p);
    res.tables["profile_eps" + eps_tag(cfg.eps[i]) + ".csv"] = csv.str();
    nlohmann::json meta = p.metadata();
    if (exact) {
      double g = 0.0;
      for (size_t j = 0; j < p.r().size() && p.r()[j] <= p.R(); ++j) {
        g = std::max(g, std::abs(p.u()[j] - exact_mcf_arrival(p.R(), n, p.r()[j])));
      }
      meta["gap"] = g;
      gap.add({num(cfg.eps[i]), num(g), num(p.accuracy()), num(p.ode_residual())});
    }
    profiles.push_back(meta);
  }
  res.report["results"]["oracle"] = profiles;
  if (exact) res.tables["gap.csv"] = gap.csv();
}

std::string now_utc() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

template <class T>
T get_field(const nlohmann::json& j, const std::string& key) {
  try {
    return j.get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError("config field '" + key + "': wrong type (" + j.dump() + ")");
  }
}

}  // namespace

// ---------------------------------------------------------------------------

Domain StudyConfig::resolved_domain() const {
  if (domain == "interval") return interval_domain(R);
  if (domain == "disk") return disk_domain(R);
  throw ConfigError("config field 'domain': expected interval or disk, got '" + domain + "'");
}

ElementKind StudyConfig::resolved_element() const {
  if (element.empty()) return ElementKind{domain == "interval" ? ElementFamily::hermite5 : ElementFamily::argyris};
  try {
    return ElementKind::parse(element);
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("config field 'element': ") + e.what());
  }
}

void StudyConfig::validate() const {
  static const std::set<std::string> studies{"conditions",   "mesh-info", "interp-study",      "linear-study",
                                             "solve",        "oracle",    "contraction-study", "full-study"};
  auto fail = [](const std::string& field, const std::string& what) {
    throw ConfigError("config field '" + field + "': " + what);
  };
  if (!studies.count(study)) fail("study", "unknown study '" + study + "'");
  const Domain d = resolved_domain();
  const ElementKind k = resolved_element();
  if (k.dim() != d.dim()) fail("element", k.name() + " does not live on a " + domain);
  if (!(R > 0.0)) fail("R", "must be > 0");
  if (boundary_order < 1 || boundary_order > 4) fail("boundary_order", "must be in 1..4");
  try {
    FlowRegime::parse(regime);
  } catch (const ConfigError& e) {
    fail("regime", e.what());
  }
  if (eps.empty()) fail("eps", "must not be empty");
  for (double e : eps) {
    if (!(e > 0.0)) fail("eps", "entries must be > 0");
  }
  if (!(h0 > 0.0 && h0 < R)) fail("h0", "must be in (0, R)");
  if (cells0 < 1) fail("cells0", "must be >= 1");
  if (levels < 1 || levels > 8) fail("levels", "must be in 1..8");
  try {
    parse_form(form);
  } catch (const ConfigError& e) {
    fail("form", e.what());
  }
  if (!(mu >= 2.0)) fail("mu", "must be >= 2");
  if (wdeg < 1) fail("wdeg", "must be >= 1");
  if (!(gamma > 0.0)) fail("gamma", "must be > 0");
  if (!(delta > 0.0)) fail("delta", "must be > 0");
  if (max_iter < 1) fail("max_iter", "must be >= 1");
  if (!(tol > 0.0)) fail("tol", "must be > 0");
  if (!(newton_tol > 0.0)) fail("newton_tol", "must be > 0");
  if (pairs < 1) fail("pairs", "must be >= 1");
  if (!(radius_fraction > 0.0)) fail("radius_fraction", "must be > 0");
  if (resolution < 100) fail("resolution", "must be >= 100");
  if (!(eps_test > 0.0)) fail("eps_test", "must be > 0");
  if (output.empty()) fail("output", "must not be empty");
}

nlohmann::json to_json(const StudyConfig& c) {
  return {{"schema_version", kSchemaVersion},
          {"study", c.study},
          {"domain", c.domain},
          {"R", c.R},
          {"boundary_order", c.boundary_order},
          {"regime", c.regime},
          {"eps", c.eps},
          {"element", c.resolved_element().name()},
          {"h0", c.h0},
          {"cells0", c.cells0},
          {"levels", c.levels},
          {"form", c.form},
          {"mu", c.mu},
          {"wdeg", c.wdeg},
          {"gamma", c.gamma},
          {"delta", c.delta},
          {"max_iter", c.max_iter},
          {"tol", c.tol},
          {"newton_tol", c.newton_tol},
          {"pairs", c.pairs},
          {"radius_fraction", c.radius_fraction},
          {"seed", c.seed},
          {"resolution", c.resolution},
          {"eps_test", c.eps_test},
          {"output", c.output}};
}

StudyConfig config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("config: expected a table of fields");
  StudyConfig c;
  for (const auto& [key, v] : j.items()) {
    if (key == "schema_version") {
      if (get_field<int>(v, key) != kSchemaVersion) {
        throw ConfigError("config field 'schema_version': unsupported version " + v.dump());
      }
    } else if (key == "study") {
      c.study = get_field<std::string>(v, key);
    } else if (key == "domain") {
      c.domain = get_field<std::string>(v, key);
    } else if (key == "R") {
      c.R = get_field<double>(v, key);
    } else if (key == "boundary_order") {
      c.boundary_order = get_field<int>(v, key);
    } else if (key == "regime") {
      c.regime = get_field<std::string>(v, key);
    } else if (key == "eps") {
      c.eps = v.is_array() ? get_field<std::vector<double>>(v, key) : std::vector<double>{get_field<double>(v, key)};
    } else if (key == "element") {
      c.element = get_field<std::string>(v, key);
    } else if (key == "h0") {
      c.h0 = get_field<double>(v, key);
    } else if (key == "cells0") {
      c.cells0 = get_field<int>(v, key);
    } else if (key == "levels") {
      c.levels = get_field<int>(v, key);
    } else if (key == "form") {
      c.form = get_field<std::string>(v, key);
    } else if (key == "mu") {
      c.mu = get_field<double>(v, key);
    } else if (key == "wdeg") {
      c.wdeg = get_field<int>(v, key);
    } else if (key == "gamma") {
      c.gamma = get_field<double>(v, key);
    } else if (key == "delta") {
      c.delta = get_field<double>(v, key);
    } else if (key == "max_iter") {
      c.max_iter = get_field<int>(v, key);
    } else if (key == "tol") {
      c.tol = get_field<double>(v, key);
    } else if (key == "newton_tol") {
      c.newton_tol = get_field<double>(v, key);
    } else if (key == "pairs") {
      c.pairs = get_field<int>(v, key);
    } else if (key == "radius_fraction") {
      c.radius_fraction = get_field<double>(v, key);
    } else if (key == "seed") {
      c.seed = get_field<std::uint64_t>(v, key);
    } else if (key == "resolution") {
      c.resolution = get_field<int>(v, key);
    } else if (key == "eps_test") {
      c.eps_test = get_field<double>(v, key);
    } else if (key == "output") {
      c.output = get_field<std::string>(v, key);
    } else {
      throw ConfigError("config field '" + key + "': unknown field");
    }
    if ((key == "cells0" || key == "levels" || key == "boundary_order" || key == "wdeg" || key == "max_iter" ||
         key == "pairs" || key == "resolution") &&
        !v.is_number_integer()) {
      throw ConfigError("config field '" + key + "': expected an integer");
    }
  }
  c.validate();
  return c;
}

StudyConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot read " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  nlohmann::json j;
  if (path.extension() == ".toml") {
    try {
      const toml::table t = toml::parse(buf.str(), path.string());
      std::ostringstream os;
      os << toml::json_formatter{t};
      j = nlohmann::json::parse(os.str());
    } catch (const toml::parse_error& e) {
      std::ostringstream os;
      os << "config: " << e.description() << " at " << e.source().begin;
      throw ConfigError(os.str());
    }
  } else {
    try {
      j = nlohmann::json::parse(buf.str());
    } catch (const nlohmann::json::parse_error& e) {
      throw ConfigError(std::string("config: ") + e.what());
    }
  }
  return config_from_json(j);
}

int StudyResult::exit_code() const {
  if (failed) return 1;
  if (out_of_theory) return 2;
  return 0;
}

std::vector<std::shared_ptr<const Mesh>> build_levels(const StudyConfig& c) {
  const Domain d = c.resolved_domain();
  std::vector<std::shared_ptr<const Mesh>> meshes;
  for (int l = 0; l < c.levels; ++l) {
    if (d.dim() == 1) {
      meshes.push_back(std::make_shared<const Mesh>(build_interval_mesh(c.R, c.cells0 << l)));
    } else {
      meshes.push_back(std::make_shared<const Mesh>(build_disk_mesh(c.R, c.h0 / std::pow(2.0, l), c.boundary_order)));
    }
  }
  return meshes;
}

int thread_count() {
  if (const char* env = std::getenv("CURVFLOW_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 1) return static_cast<int>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(int n, const std::function<void(int)>& fn) {
  const int workers = std::min(thread_count(), n);
  if (workers <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (int i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

nlohmann::json environment_stamp() {
  return {{"compiler", __VERSION__},
          {"cxx_standard", __cplusplus},
          {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                        std::to_string(EIGEN_MINOR_VERSION)},
          {"threads", thread_count()},
          {"timestamp", now_utc()}};
}

conditions::ParameterSet cell_parameters(const StudyConfig& c, double eps, double h) {
  conditions::ParameterSet p;
  p.n = c.resolved_domain().dim() - 1;
  p.mu = c.mu;
  p.deg = c.resolved_element().degree();
  p.wdeg = c.wdeg;
  p.epsilon = eps;
  p.gamma = c.gamma;
  p.delta = c.delta;
  p.h = h;
  return p;
}

StudyResult run_study(const StudyConfig& config) {
  config.validate();
  Context ctx{config,
              config.resolved_domain(),
              config.resolved_element(),
              FlowRegime::parse(config.regime),
              parse_form(config.form),
              {},
              {},
              {},
              {}};
  StudyResult res;
  res.report["schema_version"] = kSchemaVersion;
  res.report["config"] = to_json(config);
  res.report["environment"] = environment_stamp();
  res.report["results"] = nlohmann::json::object();

  const std::string& s = config.study;
  try {
    if (s == "conditions" || s == "full-study") run_conditions(ctx, res);
    if (s == "mesh-info" || s == "full-study") run_mesh_info(ctx, res);
    if (s == "interp-study" || s == "full-study") run_interp(ctx, res);
    if (s == "oracle") run_oracle(ctx, res);
    if (s == "linear-study" || s == "full-study") run_linear(ctx, res);
    if (s == "solve" || s == "full-study") run_solve(ctx, res);
    if (s == "contraction-study" || s == "full-study") run_contraction(ctx, res);
  } catch (const SolverError& e) {
    res.failed = true;
    res.messages.push_back(e.what());
  }
  res.report["out_of_theory"] = res.out_of_theory;
  res.report["status"] = res.failed ? "failed" : "ok";
  res.report["messages"] = res.messages;
  res.report["exit_code"] = res.exit_code();
  return res;
}

void write_outputs(const StudyResult& result, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream os(dir / "report.json");
    os << result.report.dump(2) << '\n';
    if (!os) throw Error("cannot write " + (dir / "report.json").string());
  }
  for (const auto& [name, text] : result.tables) {
    std::ofstream os(dir / name);
    os << text;
    if (!os) throw Error("cannot write " + (dir / name).string());
  }
}

}  // namespace curvflow::study
