#pragma once

#include "regcot/digest.hpp"
#include "regcot/margin_dpo.hpp"
#include "regcot/region.hpp"
#include "regcot/scoring.hpp"

#include <filesystem>
#include <string>

namespace regcot {

struct AblationFlags {
  bool naive_dpo = false;
  bool no_iteration = false;
  bool gamma_zero = false;
  bool single_evaluator = false;

  friend bool operator==(const AblationFlags&, const AblationFlags&) = default;
};

/// Relative paths are resolved against the config file's directory on load.
struct RunPaths {
  std::filesystem::path hypotheses;
  std::filesystem::path inputs;
  std::filesystem::path heatmaps_dir;
  std::filesystem::path images_dir;
  std::filesystem::path fixture_bank;
  std::filesystem::path output_dir;
  std::filesystem::path initial_checkpoint;  // empty = zero-initialised policy

  friend bool operator==(const RunPaths&, const RunPaths&) = default;
};

struct RunConfig {
  std::size_t timesteps = 3;
  std::size_t pairs_per_step = 2;
  std::size_t rounds = 4;
  double gamma = 0.3;
  double beta = 0.1;
  double margin_scale = 1.0;
  double tau = 0.5;
  int min_area = 1;
  int j_samples = 2;
  int batch_size = 4;
  int epochs = 3;
  double learning_rate = 1.0;
  Seed seed = 0;
  bool pinned_reference = false;
  AblationFlags ablations;
  RunPaths paths;

  /// Throws ConfigError on any out-of-range field.
  void validate() const;

  double effective_gamma() const { return ablations.gamma_zero ? 0.0 : gamma; }
  std::size_t effective_rounds() const { return ablations.no_iteration ? 1 : rounds; }
  RegionParams region_params() const { return {tau, min_area}; }
  ScoringConfig scoring_config() const;
  LossConfig loss_config() const;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

RunConfig parse_config(const std::string& json_text, const std::filesystem::path& base_dir);
RunConfig load_config(const std::filesystem::path& path);

/// Canonical JSON (fixed key order, absolute paths).
std::string dump_config(const RunConfig& cfg);
std::string config_digest(const RunConfig& cfg);

}  // namespace regcot
