// curvflow: command line front end of the studies.
//
// Exit codes: 0 success, 1 solver failure, 2 out-of-theory parameters
// (the study still ran), 64 usage or configuration error.

#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "curvflow/study.hpp"

namespace {

using curvflow::study::StudyConfig;

constexpr int kUsage = 64;

void add_common(CLI::App* sub, StudyConfig& c) {
  sub->add_option("--domain", c.domain, "interval or disk")->capture_default_str();
  sub->add_option("--R", c.R, "radius of the domain")->capture_default_str();
  sub->add_option("--q", c.boundary_order, "order of curved boundary edges")->capture_default_str();
  sub->add_option("--regime", c.regime, "mcf, mcf<k> or imcf")->capture_default_str();
  sub->add_option("--eps", c.eps, "regularisation parameters")->capture_default_str();
  sub->add_option("--elem", c.element, "hermite3, hermite5 or argyris (default by domain)");
  sub->add_option("--h0", c.h0, "disk: target h of the coarsest mesh")->capture_default_str();
  sub->add_option("--cells0", c.cells0, "interval: cells of the coarsest mesh")->capture_default_str();
  sub->add_option("--levels", c.levels, "refinement levels")->capture_default_str();
  sub->add_option("--form", c.form, "weak or strong residual")->capture_default_str();
  sub->add_option("--mu", c.mu, "integrability exponent")->capture_default_str();
  sub->add_option("--wdeg", c.wdeg, "boundary approximation order")->capture_default_str();
  sub->add_option("--gamma", c.gamma, "radius exponent gamma")->capture_default_str();
  sub->add_option("--delta", c.delta, "radius exponent delta")->capture_default_str();
  sub->add_option("--max-iter", c.max_iter, "iteration cap")->capture_default_str();
  sub->add_option("--tol", c.tol, "fixed point step tolerance")->capture_default_str();
  sub->add_option("--newton-tol", c.newton_tol, "Newton residual tolerance")->capture_default_str();
  sub->add_option("--pairs", c.pairs, "random pairs for the contraction rate")->capture_default_str();
  sub->add_option("--radius-fraction", c.radius_fraction, "sampling radius relative to rho")
      ->capture_default_str();
  sub->add_option("--seed", c.seed, "random seed")->capture_default_str();
  sub->add_option("--resolution", c.resolution, "oracle grid intervals")->capture_default_str();
  sub->add_option("--eps-test", c.eps_test, "Young parameter of the Garding check")->capture_default_str();
  sub->add_option("--out", c.output, "output directory")->capture_default_str();
}

void print_summary(const curvflow::study::StudyResult& r) {
  const auto& res = r.report.at("results");
  if (res.contains("conditions")) {
    const auto& c = res["conditions"];
    if (c["delta_interval"].is_null()) {
      std::cout << "delta interval: empty\n";
    } else {
      std::cout << "delta interval: (" << c["delta_interval"][0].get<double>() << ", "
                << c["delta_interval"][1].get<double>() << ")\n";
    }
    std::cout << "nu = " << c["nu"].get<double>() << ", wdeg lower bound = " << c["wdeg_lower_bound"].get<double>()
              << ", sufficient conditions: " << (c["sufficient"]["all"].get<bool>() ? "all hold" : "violated")
              << "\n";
  }
  for (const auto& [name, text] : r.tables) {
    if (name.rfind("trace_", 0) == 0 || name.rfind("profile_", 0) == 0 || name == "conditions.csv") continue;
    std::cout << "== " << name << "\n" << text;
  }
  for (const auto& m : r.messages) std::cerr << "note: " << m << "\n";
}

int run(const StudyConfig& c) {
  const auto result = curvflow::study::run_study(c);
  curvflow::study::write_outputs(result, c.output);
  print_summary(result);
  std::cout << "report: " << c.output << "/report.json\n";
  return result.exit_code();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Finite element studies for the regularised level-set equation of curvature flows"};
  app.require_subcommand(1);

  StudyConfig cfg;
  std::string config_path;

  auto* run_cmd = app.add_subcommand("run", "run a study described by a TOML or JSON config");
  run_cmd->add_option("config", config_path, "config file")->required();

  struct Sub {
    const char* name;
    const char* help;
  };
  const Sub subs[] = {
      {"conditions", "admissible delta interval, exponents and radius"},
      {"mesh-info", "mesh sizes, shape ratios and boundary deviation per level"},
      {"interp-study", "interpolation errors and EOC"},
      {"linear-study", "linearized solves: stability ratios, Alexandrov bound, Garding check"},
      {"solve", "fixed point and Newton solves against the reference solution"},
      {"contraction-study", "measured contraction rate of the frozen-Jacobian map"},
      {"oracle", "radial reference profiles"},
      {"full-study", "conditions, meshes, interpolation, linear, solve and contraction studies"},
  };
  int n_dim = -1;
  for (const auto& s : subs) {
    auto* sub = app.add_subcommand(s.name, s.help);
    add_common(sub, cfg);
    if (std::string(s.name) == "oracle") {
      sub->add_option("--n", n_dim, "dimension parameter: 0 interval, 1 disk");
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return kUsage;
  }

  try {
    if (run_cmd->parsed()) return run(curvflow::study::load_config(config_path));
    cfg.study = app.get_subcommands().front()->get_name();
    if (n_dim == 0) cfg.domain = "interval";
    if (n_dim == 1) cfg.domain = "disk";
    if (n_dim > 1) throw curvflow::ConfigError("--n: only 0 (interval) and 1 (disk) are available");
    return run(cfg);
  } catch (const curvflow::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const curvflow::SolverError& e) {
    std::cerr << "solver failure: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
