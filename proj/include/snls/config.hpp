#pragma once

// Run configuration: a JSON document with grid, params, noise and experiment
// blocks. Parsing validates every key and reports errors by key path
// ("params.lambda: must be >= 0").

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "snls/dynamics.hpp"
#include "snls/exponents.hpp"
#include "snls/grid.hpp"
#include "snls/noise.hpp"

namespace snls {

struct GridSpec {
  int d = 2;
  int n = 64;
  double length = 20.0;

  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

enum class InitialKind { zero, gaussian, modes, checkpoint };

struct InitialSpec {
  InitialKind kind = InitialKind::zero;
  double width = 1.0;              ///< gaussian
  double amplitude = 1.0;          ///< gaussian
  std::vector<NoiseEntry> modes;   ///< modes: spectral coefficient per integer mode
  std::string path;                ///< checkpoint

  friend bool operator==(const InitialSpec&, const InitialSpec&) = default;
};

struct ExperimentSpec {
  std::string name;  ///< defaults to the subcommand
  std::size_t paths = 100;
  std::vector<int> powers{1};
  std::vector<double> lambdas;
  std::vector<std::string> observables{"mass", "energy", "v_norm_sq", "linf_pow"};
  std::size_t batches = 20;
  std::optional<double> burn_in;
  double tolerance = 1e-3;  ///< sync envelope slack
  unsigned workers = 1;
  InitialSpec initial;
  InitialSpec initial_b;  ///< second initial condition of a sync pair
  int restarts = 16;      ///< gn
  int iterations = 500;   ///< gn
  std::size_t corpus_size = 1000;  ///< gn hold-out verification
  std::optional<double> g;  ///< modified-energy constant for focusing moment fits

  friend bool operator==(const ExperimentSpec&, const ExperimentSpec&) = default;
};

struct RunConfig {
  GridSpec grid;
  SimParams params;
  NoiseConvention noise_convention = NoiseConvention::two_per_mode;
  std::vector<NoiseEntry> noise;  ///< empty means Phi = 0
  ExperimentSpec experiment;
  std::string output = "out";
  bool force = false;  ///< assumption gate bypassed on request

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

struct ParsedConfig {
  RunConfig config;
  AssumptionVerdict gate;
  bool gate_bypassed = false;  ///< rejected by the gate but run under force
};

/// Validates a JSON document. A gate rejection is a ConfigError naming
/// params.sigma unless `force` (or the config's own "force") is set.
ParsedConfig parse_config(const nlohmann::json& doc, bool force = false);
ParsedConfig parse_config(const std::string& text, bool force = false);

/// Every field written explicitly; parse_config(serialize_config(c)) == c.
nlohmann::json serialize_config(const RunConfig& config);

GridPtr make_grid(const GridSpec& spec);

/// Null optional when the noise list is empty.
std::optional<NoiseOperator> make_noise(const GridPtr& grid, const RunConfig& config);

/// Builds the initial field on `grid`. Checkpoint initial conditions are
/// loaded through load_checkpoint and must match the grid.
Field make_initial(const GridPtr& grid, const InitialSpec& spec);

std::string to_string(Scheme s);
std::string to_string(InitialKind k);

}  // namespace snls
