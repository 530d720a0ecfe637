#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "nlfd/barenblatt.hpp"
#include "nlfd/grid.hpp"
#include "nlfd/kernel.hpp"
#include "nlfd/nonlinearity.hpp"
#include "nlfd/solver.hpp"
#include "nlfd/verify.hpp"

namespace nlfd {

struct GridConfig {
  int dim = 1;
  double half_width = 50.0;
  int points = 1024;
  BoundaryMode mode = BoundaryMode::exterior_zero;
};

struct KernelConfig {
  KernelFamily family = KernelFamily::fractional_power;
  double sigma = 1.0;
  double epsilon = 0.0;
  Modulation modulation = Modulation::cosine_decay;
};

struct NonlinearityConfig {
  NonlinearityFamily family = NonlinearityFamily::pure_power;
  double m = 0.75;
  double epsilon = 0.0;
  std::optional<double> A;
  std::optional<double> cap;
};

enum class DatumKind { bump, gaussian, barenblatt, two_bumps, from_file };
const char* to_string(DatumKind kind) noexcept;

/// bump: top hat of the given height on the open ball B_radius(center).
/// gaussian: mass (2 pi scale^2)^{-N/2} exp(-|x - center|^2 / (2 scale^2)).
/// barenblatt: computed profile of mass M reconstructed at time t0.
/// two_bumps: bump plus a second top hat (center2, radius2, height2).
/// from_file: binary field file on an identical grid.
struct InitialDatum {
  DatumKind kind = DatumKind::bump;
  Point center{0.0, 0.0};
  double radius = 1.0;
  double height = 1.0;
  double scale = 1.0;
  double mass = 1.0;
  double t0 = 1.0;
  Point center2{0.0, 0.0};
  double radius2 = 1.0;
  double height2 = 1.0;
  std::string path;
};

struct CheckSpec {
  std::string id;
  nlohmann::json params = nlohmann::json::object();
};

struct ScenarioConfig {
  GridConfig grid;
  KernelConfig kernel;
  NonlinearityConfig nonlinearity;
  InitialDatum initial;
  SolverConfig solver;
  std::vector<CheckSpec> checks;
  std::string output_dir = "out";
  std::uint64_t seed = 20240601;
};

/// Check ids accepted in the "checks" list.
const std::vector<std::string>& known_check_ids();

/// Validates every field and throws ConfigError listing all problems at once.
ScenarioConfig config_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const ScenarioConfig& config);

/// Parses without validating; missing and malformed files throw ConfigError.
nlohmann::json load_config_document(const std::string& path);
ScenarioConfig load_config(const std::string& path);
void save_config(const ScenarioConfig& config, const std::string& path);

/// Applies "a.b.c=value" to a JSON document.  The value is parsed as JSON when possible
/// and kept as a string otherwise.
void apply_override(nlohmann::json& doc, const std::string& assignment);

Grid build_grid(const ScenarioConfig& config);
KernelSpec build_kernel(const ScenarioConfig& config);
NonlinearitySpec build_nonlinearity(const ScenarioConfig& config);
SelfSimilarParams build_self_similar_params(const ScenarioConfig& config, double M);

/// Throws invalid_argument when the datum's support leaves the box.  The barenblatt kind
/// needs `params`.
Field materialize_initial_datum(const InitialDatum& spec, const Grid& grid,
                                const SelfSimilarParams* params = nullptr);

/// k^alpha u0(k^{alpha/N} x).  Parametric data are rescaled analytically, file data by
/// resampling.
Field rescale_datum(const ScenarioConfig& config, const Field& u0, double k, double alpha);

/// For each k, runs the problem with (J_k, phi_k, rescaled datum) from t = 0 to t = 1 on the
/// configured grid and returns u_k(., 1).
std::vector<AsymptoticEntry> run_rescaled_family(const ScenarioConfig& config,
                                                 const std::vector<double>& ladder,
                                                 const SolverConfig& solver);

struct ScenarioOutcome {
  Trajectory trajectory;
  DiagnosticsReport report;
};

/// Solves the configured problem and runs every configured check.
ScenarioOutcome run_scenario(const ScenarioConfig& config);

nlohmann::json to_json(const CheckRecord& record);
nlohmann::json to_json(const DiagnosticsReport& report);

/// Writes output_dir/{manifest.json, mass.csv, snapshots/*.bin, checks/*.json, curves/*.csv}.
void write_artifacts(const ScenarioConfig& config, const ScenarioOutcome& outcome);

/// Curve as CSV with a header row.
void write_curve_csv(const Curve& curve, const std::string& path);

}  // namespace nlfd
