#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fvd/engine.hpp"
#include "fvd/errors.hpp"

namespace fvd {

using Json = nlohmann::json;

/// Invalid configuration. The message names the line (syntax errors) or
/// the dotted field path (everything else).
class ConfigError : public InputError {
 public:
  using InputError::InputError;
};

/// A run template plus the sweep and output settings around it.
///
/// File layout (every key optional, unknown keys rejected):
///   { "run": {...}, "sweep": {"controller.alpha_star": [0.1, 0.5]},
///     "seeds": [0, 1], "output_dir": "out", "metrics": ["mmd"],
///     "record_wall_time": false, "oracle_lambda": 1.0 }
struct ExperimentConfig {
  /// The "run" object as written; sweep values are applied on top of it.
  Json run_template = Json::object();
  /// Dotted path inside "run" -> values. Expanded as a Cartesian product
  /// over paths in lexicographic order, the last path varying fastest.
  std::map<std::string, std::vector<Json>> sweep;
  std::vector<std::uint64_t> seeds{0};
  std::string output_dir = "out";
  std::vector<std::string> metrics = all_metric_names();
  /// Wall-clock time makes outputs nondeterministic, so it is opt-in.
  bool record_wall_time = false;
  std::optional<double> oracle_lambda;
};

struct SweepPoint {
  std::size_t index = 0;
  std::map<std::string, Json> assignments;
  /// Parsed run settings for this point; seed and workers are left at
  /// their defaults for the caller to fill in.
  RunConfig config;
};

ExperimentConfig parse_experiment(const std::string& text);
ExperimentConfig load_experiment(const std::filesystem::path& path);

/// Parses a "run" object. `where` prefixes field paths in errors.
RunConfig run_config_from_json(const Json& j, const std::string& where = "run");

/// Fully resolved settings including the seed (and never workers, which
/// cannot change results).
Json run_config_to_json(const RunConfig& cfg);

/// Every sweep point, validated. With no sweep there is exactly one.
std::vector<SweepPoint> expand_sweep(const ExperimentConfig& exp);

}  // namespace fvd
