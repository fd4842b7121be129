#ifndef RIESZWAVE_RUN_CONFIG_HPP
#define RIESZWAVE_RUN_CONFIG_HPP

// JSON run configuration:
//   {"model": {"k", "d", "beta", "coefficients", "noise", "enable_drift"},
//    "grid": {"L", "n_space", "dt", "n_time"},
//    "experiment": {"<subcommand>": {...}, ...},
//    "seed": 42, "output_dir": "runs", "workers": 1}
// Unknown keys anywhere are errors.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "rieszwave/grid.hpp"
#include "rieszwave/spde_sim.hpp"

namespace rieszwave {

const std::vector<std::string>& subcommand_names();

struct RunConfig {
  /// Parsed document with "workers" removed.
  nlohmann::json document;
  std::optional<ModelSpec> model;
  std::optional<GridSpec> grid;
  bool enable_drift = false;
  nlohmann::json experiment = nlohmann::json::object();
  std::uint64_t seed = 0;
  std::filesystem::path output_dir;
  unsigned workers = 1;

  /// Throws ConfigError naming the offending field.
  static RunConfig from_json(const nlohmann::json& doc);
  static RunConfig load(const std::filesystem::path& file);

  /// Sorted-key dump of the document; independent of key order in the file.
  std::string canonical() const { return document.dump(); }
  /// 16 hex digits of FNV-1a over canonical() and the subcommand.
  std::string run_id(const std::string& subcommand) const;
  /// Experiment block of one subcommand ({} when absent).
  nlohmann::json experiment_for(const std::string& subcommand) const;
  /// Noise models need 0 < beta < min(2, k); the exponent calculators also
  /// accept beta = min(2, k) < 2.
  const ModelSpec& require_model(bool exponents_only = false) const;
  const GridSpec& require_grid() const;
};

}  // namespace rieszwave

#endif  // RIESZWAVE_RUN_CONFIG_HPP
