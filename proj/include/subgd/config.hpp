#pragma once

// Flat key=value experiment configuration and the built-in presets.

#include "subgd/model.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace subgd {

/// Raised for malformed or inconsistent configuration (CLI exit code 1).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline const std::vector<std::string> kExperiments = {
    "robustness-linear", "robustness-uos", "stepsize-sweep", "depth-sweep",
    "subspace-sweep",    "wd-sweep",       "custom"};

struct ExperimentConfig {
  std::string experiment = "custom";
  std::string scale = "desk";

  // problem
  int m = 32, d = 64, s = 4, n = 200;
  int subspaces = 1;  // k > 1 draws a union of subspaces
  double kappa = 1.0;
  int rank_r = 0;     // 0: r = s

  // network
  int L = 3, d_w = 256;
  Param param = Param::normalized;
  bool relu = false;

  // optimization; eta defaults to prefactor * m / (L sigma_max^2(X)),
  // lambda to gamma sigma_min^2(X) sqrt(m/d)
  std::optional<double> eta;
  double prefactor = 1.0;
  std::optional<double> lambda;
  std::optional<double> gamma;
  long T = 1000;
  double C1 = 1.0;
  long log_stride = 10;
  bool reduce = true;  // train linear nets on the equivalent n = s dataset

  // sweep
  std::string sweep_axis;  // empty: single configuration
  std::vector<double> sweep_values;
  int runs = 1;
  std::uint64_t master_seed = 0;
  std::string output_dir = "out";

  // test-time robustness (empty grid: skipped)
  std::vector<double> sigma_grid;
  int trials = 100;

  std::vector<std::string> assumptions;

  /// Applies one key=value pair; throws ConfigError on unknown keys or bad values.
  void set(const std::string& key, const std::string& value);
  /// Numeric override of the sweep axis.
  void set_axis(const std::string& axis, double value);
  void validate() const;
  /// Canonical key=value listing (sorted), used for hashing and metadata.
  std::map<std::string, std::string> to_map() const;
  std::string hash() const;
};

/// Preset for one of kExperiments at scale "desk" or "paper".
ExperimentConfig preset(const std::string& experiment, const std::string& scale = "desk");

/// Parses "key=value" lines ('#' starts a comment).
std::vector<std::pair<std::string, std::string>> parse_kv(std::istream& is);

/// Preset (from the file's `experiment` key) < file < overrides. `scale`, when
/// given, replaces the file's scale before the preset is built.
ExperimentConfig load_config(const std::filesystem::path& path,
                             const std::vector<std::string>& overrides = {},
                             std::optional<std::string> scale = std::nullopt);
ExperimentConfig config_from_pairs(const std::vector<std::pair<std::string, std::string>>& pairs,
                                   const std::vector<std::string>& overrides = {},
                                   std::optional<std::string> scale = std::nullopt);

std::vector<double> parse_list(const std::string& text);
std::string format_value(double v);

}  // namespace subgd
