#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "nestevo/evaluator.hpp"
#include "nestevo/genome.hpp"
#include "nestevo/ooe.hpp"

namespace nestevo {

struct BackendConfig {
  enum class Kind { Synthetic, Table };
  Kind kind = Kind::Synthetic;
  HardwareModelParams synthetic;
  std::string table_path;  // resolved against the config file's directory
};

struct AblationConfig {
  std::vector<double> gammas{0.0, 1.0};
  std::optional<BackboneGenome> backbone;
  std::optional<std::uint64_t> backbone_seed;
};

/// Everything a batch command needs. Loaded from a JSON document; every key
/// except `seed` is optional and unknown keys are rejected.
struct RunConfig {
  std::uint64_t seed = 0;
  SearchSpaceSpec space;
  std::string device = "agx_gpu";
  BackendConfig backend;
  SurrogateParams surrogate;
  std::uint64_t surrogate_seed = 0;
  OoeConfig ooe;  // ooe.ioe holds the inner engine settings
  std::string output_dir = "out";
  std::uint64_t enumerate_cap = 1'000'000;
  AblationConfig ablation;

  /// Throws ConfigError.
  void validate() const;
};

RunConfig parse_run_config(const nlohmann::json& j, const std::string& base_dir = ".");
RunConfig load_run_config(const std::string& path);

/// Canonical form with every field explicit. Output directory and thread
/// count are excluded: they do not change results.
nlohmann::json canonical_json(const RunConfig& config);
/// 16 hex digits of FNV-1a over the canonical dump.
std::string config_digest(const RunConfig& config);

std::unique_ptr<Evaluator> make_evaluator(const RunConfig& config);

nlohmann::json backbone_to_json(const BackboneGenome& b);
BackboneGenome backbone_from_json(const nlohmann::json& j);

}  // namespace nestevo
