#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "pgal/integrate.hpp"
#include "pgal/stochastic.hpp"

namespace pgal {

inline constexpr int kSchemaVersion = 1;

struct ManifoldConfig {
  std::string kind = "torus1";
  std::array<int, 2> resolution{64, 1};
};

struct ModelConfig {
  std::string name = "heat";
  Parameters parameters;
  std::optional<LambdaRange> lambda_range;
  /// Wrap the model with the truncation χ.
  bool truncate = false;
  /// Density for name == "standard_form".
  std::string density;
};

struct ModeValue {
  int mode = 0;
  double value = 0.0;
};

/// "modes": explicit coefficients. "function_preset": a named function projected on the basis.
struct InitialConfig {
  std::string type = "modes";
  std::vector<ModeValue> modes;
  std::string preset;
  double amplitude = 1.0;
  double offset = 0.0;
};

struct SolverSection {
  int n = 9;
  double dt = 1e-3;
  double T = 1.0;
  std::string scheme = "auto";
  double epsilon = 0.0;
  int output_stride = 1;
  double energy_tolerance = 1e-4;
};

struct StochasticConfig {
  bool enabled = false;
  long M = 1000;
  std::uint64_t seed = 0;
  std::string phi_name;
  double sigma = 0.0;
  std::vector<int> lags{1, 10, 100};
};

struct OutputConfig {
  std::string directory = "out";
  std::vector<std::string> formats{"csv", "json"};
};

struct VerifyConfig {
  int trials = 5;
  std::uint64_t seed = 1;
  bool require_compat = false;
};

struct ConvergenceConfig {
  std::vector<int> n_list;
  std::vector<double> dt_list;
};

struct RunConfig {
  int schema_version = kSchemaVersion;
  ManifoldConfig manifold;
  ModelConfig model;
  InitialConfig initial;
  SolverSection solver;
  StochasticConfig stochastic;
  OutputConfig output;
  VerifyConfig verify;
  ConvergenceConfig convergence;
};

/// Schema-checked parse; ConfigError on unknown keys, wrong types or invalid values.
RunConfig parse_config(const nlohmann::json& j);
RunConfig load_config(const std::string& path);
nlohmann::json to_json(const RunConfig& c);

std::vector<std::string> preset_names();

ManifoldSpec manifold_of(const RunConfig& c);
ModelPtr model_of(const RunConfig& c);
NoisePtr noise_of(const RunConfig& c);
/// Grid, basis of size n (solver.n when n < 0), model, ε and noise.
AssemblyWorkspace workspace_of(const RunConfig& c, int n = -1);
SpectralVector initial_state(const RunConfig& c, const AssemblyWorkspace& ws);
SolverConfig solver_config_of(const RunConfig& c);

}  // namespace pgal
