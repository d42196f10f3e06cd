#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "curvflow/conditions.hpp"
#include "curvflow/fespace.hpp"
#include "curvflow/mesh.hpp"

namespace curvflow::study {

inline constexpr int kSchemaVersion = 1;

/// Fully resolved study configuration. Every field is echoed into the
/// report; there are no hidden defaults.
struct StudyConfig {
  std::string study = "full-study";  ///< conditions | mesh-info | interp-study | linear-study | solve |
                                     ///< contraction-study | oracle | full-study
  std::string domain = "disk";       ///< interval | disk
  double R = 1.0;
  int boundary_order = 1;            ///< polynomial order q of curved boundary edges (disk)
  std::string regime = "mcf";
  std::vector<double> eps{0.25};
  std::string element;               ///< empty: hermite5 on the interval, argyris on the disk
  double h0 = 0.7;                   ///< disk: target mesh size of the coarsest level
  int cells0 = 4;                    ///< interval: cells of the coarsest level
  int levels = 3;
  std::string form = "strong";       ///< weak | strong

  // admissibility parameters; n and deg follow from domain and element, h from the mesh
  double mu = 3.0;
  int wdeg = 2;
  double gamma = 1.0;
  double delta = 0.6;

  int max_iter = 50;
  double tol = 1e-12;
  double newton_tol = 1e-11;
  int pairs = 8;
  double radius_fraction = 1.0;
  std::uint64_t seed = 7;
  int resolution = 20000;
  double eps_test = 0.1;             ///< Young parameter of the Garding check

  std::string output = "curvflow-out";

  Domain resolved_domain() const;
  ElementKind resolved_element() const;
  /// Throws ConfigError naming the offending field.
  void validate() const;
};

nlohmann::json to_json(const StudyConfig& c);
/// Strict: unknown fields and type mismatches raise ConfigError naming the field.
StudyConfig config_from_json(const nlohmann::json& j);
/// TOML (.toml) or JSON (any other extension).
StudyConfig load_config(const std::filesystem::path& path);

/// Tables are CSV text keyed by file name.
struct StudyResult {
  nlohmann::json report;
  std::map<std::string, std::string> tables;
  bool out_of_theory = false;
  bool failed = false;
  std::vector<std::string> messages;

  /// 0 ok, 1 solver failure, 2 out-of-theory warning only.
  int exit_code() const;
};

StudyResult run_study(const StudyConfig& config);

/// report.json plus the tables, in config.output.
void write_outputs(const StudyResult& result, const std::filesystem::path& dir);

/// Meshes of the refinement levels of a config.
std::vector<std::shared_ptr<const Mesh>> build_levels(const StudyConfig& config);

/// Worker count: CURVFLOW_THREADS if set (>= 1), else hardware concurrency.
int thread_count();

/// Runs fn(0..n-1) on up to thread_count() threads; results are ordered by index.
void parallel_for(int n, const std::function<void(int)>& fn);

/// Compiler, library versions, thread cap and UTC timestamp.
nlohmann::json environment_stamp();

/// Parameter set of one (eps, mesh) cell.
conditions::ParameterSet cell_parameters(const StudyConfig& config, double eps, double h);

}  // namespace curvflow::study
