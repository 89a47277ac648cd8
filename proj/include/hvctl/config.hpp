#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "hvctl/problem.hpp"

namespace hvctl {

/// Invalid configuration value or unknown key (exit status 1).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// File could not be read or written (exit status 2).
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string_view version_string();

/// One experiment, parsed from a flat `key = value` file. Defaults reproduce
/// ControlProblem::thermostat_default(). Lists are comma separated; x0 and z
/// list spectral coefficients and are zero-padded to `modes`.
struct ExperimentConfig {
  double a = 1.0;
  std::size_t modes = 16;
  std::size_t grid_size = 0;
  std::size_t steps = 256;
  double eps = 0.1;
  std::vector<double> eps_list{0.5, 0.1, 0.02};
  std::vector<double> x0{0.0};
  std::vector<double> z{1.0};

  double s1 = 0.25;
  double s2 = 0.75;
  double g1 = -0.5;
  double g2 = 0.5;
  SelectionPolicy policy = SelectionPolicy::minimal_norm;

  double diffusion_lo = 0.2;
  double diffusion_hi = 0.4;
  double diffusion_boost = 0.5;
  double diffusion_switch = 0.25;
  double diffusion_shape = 0.0;
  SelectionPolicy diffusion_policy = SelectionPolicy::minimal_norm;

  double wiener_decay = 2.0;
  double wiener_scale = 1.0;
  /// Empty: identity. One value: uniform gain. Otherwise one value per mode.
  std::vector<double> gain;
  double conv_constant = 1.0;
  double kink_tol = 1e-9;

  std::size_t paths = 100;
  std::uint64_t seed = 1;
  double fp_tol = 1e-8;
  std::size_t fp_max_iter = 50;

  std::string output_dir = "out";
  std::string output_format = "csv";
  std::vector<std::size_t> report_modes{1};
  double confidence_level = 0.95;
  std::size_t workers = 1;
  std::size_t dump_paths = 0;
  bool timing = false;

  /// Throws ConfigError on any invalid value.
  void validate() const;
  ControlProblem problem() const;

  /// Every key in a fixed order, doubles with round-trip precision.
  std::string canonical() const;
  /// FNV-1a over the keys that affect results (execution and output keys
  /// such as workers or output_dir are excluded), as 16 hex digits.
  std::string hash() const;
};

/// Parses `key = value` lines; `#` starts a comment. Unknown or repeated keys
/// and malformed values throw ConfigError. Unset keys keep their defaults.
ExperimentConfig parse_config(std::string_view text);
/// Throws IoError if the file cannot be read.
ExperimentConfig load_config(const std::filesystem::path& path);
/// Applies one `key = value` assignment.
void set_config_value(ExperimentConfig& config, std::string_view key, std::string_view value);
std::vector<std::string> config_keys();

}  // namespace hvctl
