#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "maser/channels.hpp"

namespace maser {

inline constexpr const char* kVersion = "0.1.0";

struct ModelSection {
  std::optional<double> c_g;
  std::optional<double> c_e;
  std::optional<double> phi;
  std::optional<std::int64_t> m;
  std::optional<std::int64_t> K;
  double nu = 1.0;
  int n_max = 0;
};

struct NoiseSection {
  double kappa = 0.0;
  double n_th = 0.0;
  double gamma_01 = 0.0;
  double gamma_03 = 0.0;
  double gamma_13 = 0.0;
  double gamma_23 = 0.0;
  double gamma_1 = 0.0;
  double gamma_3 = 0.0;
  double t_prep = 0.0;
  double sigma = 0.0;  // beam spread of phi
  std::optional<std::uint64_t> seed;
};

struct RunSection {
  std::string command;
  std::vector<double> times;        // continuous checkpoints
  std::vector<std::int64_t> atoms;  // discrete checkpoints
  std::vector<double> c_e_values;   // sweep grid
  std::vector<std::int64_t> K_values;
  std::string out;  // empty = stdout
  std::string format = "json";
  int jobs = 1;
  std::string beam = "gauss";  // gauss | mc
  int mc_samples = 100;
  int modes = 8;  // spectrum depth
  double wigner_range = 4.0;
  int wigner_resolution = 161;
};

struct RunConfig {
  ModelSection model;
  NoiseSection noise;
  RunSection run;

  // Resolved after validation.
  AtomState atom() const;
  double resolved_phi() const;  // phi, or the wall coupling of (m, K)
};

// Sectioned key=value text. Syntax and per-key range errors only;
// unknown sections, unknown keys and duplicates are ParseErrors.
RunConfig parse_config_raw(const std::string& text);

// Cross-field checks; fills the dependent atom amplitude.
void validate_config(RunConfig& config);

RunConfig parse_config(const std::string& text);
RunConfig parse_config_file(const std::string& path);

// Effective configuration rendered in a fixed key order with 17
// significant digits; its FNV-1a hash labels output artifacts.
std::string canonical_config(const RunConfig& config);
std::uint64_t config_hash(const RunConfig& config);

}  // namespace maser
