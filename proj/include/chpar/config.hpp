#pragma once

#include "chpar/parareal.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace chpar {

enum class InitKind { SeededRandom, SmoothSine };
enum class FineSolver { Direct, NeumannNeumann };

class ConfigError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Fully resolved experiment configuration. The mesh is given by the integer
/// denominator of h.
struct RunConfig {
  std::optional<Variant> algorithm;
  int dim = 1;
  double T = 1.0;
  int N = 20;
  int J = 200;
  int h_den = 64;
  double eps = 0.0725;
  double tol = 1e-6;
  std::optional<int> max_iter; // N + 2 when unset
  InitKind init = InitKind::SeededRandom;
  std::uint64_t seed = 20211;
  double amplitude = 0.1;
  FineSolver fine = FineSolver::Direct;
  int nn_sub = 8;
  double theta = 0.25;
  double nn_tol = 1e-10;
  int nn_max_iter = 2000;
  bool nn_warm_start = false;
  int workers = 1;
  int j_downscale = 1;
  std::string preset;
  std::string output;

  int resolved_max_iter() const { return max_iter ? *max_iter : N + 2; }
  TimePartition partition() const { return {T, N, J}; }
  SpatialGrid grid() const { return SpatialGrid::from_denominator(dim, h_den); }
  std::optional<NNParams> nn_params() const;

  void validate() const;
  friend bool operator==(const RunConfig &, const RunConfig &) = default;
};

/// Keys accepted on the command line (as --key) and in config files.
const std::vector<std::string> &config_keys();

/// Sets one key; throws ConfigError on unknown keys or malformed values.
void apply_setting(RunConfig &cfg, const std::string &key, const std::string &value);

/// Ordered key/value view of a config; round-trips through apply_setting.
std::vector<std::pair<std::string, std::string>> to_settings(const RunConfig &cfg);

/// Reads `key=value` lines; blank lines and lines starting with '#' are
/// skipped.
RunConfig parse_config_text(const std::string &text, RunConfig base = {});
RunConfig load_config_file(const std::string &path, RunConfig base = {});

/// Command-line flags for the `run` subcommand (program name excluded).
/// Precedence: defaults < --preset < --config file < explicit flags.
RunConfig parse_config(const std::vector<std::string> &args);

std::vector<std::string> preset_names();
RunConfig preset(const std::string &name);

/// Field formatting with enough digits to round-trip a double.
std::string format_double(double v);

} // namespace chpar
