#pragma once

#include "regcot/config.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace regcot {

struct RegionsSummary {
  std::vector<std::pair<std::string, long>> written;  // hypothesis id, area
  std::vector<std::string> skipped;
};

/// Writes <out_dir>/<hypothesis>.mask.txt per surviving heatmap; the hypothesis
/// id is the heatmap file stem.
RegionsSummary cmd_regions(const RunConfig& cfg, const std::filesystem::path& image,
                           const std::vector<std::filesystem::path>& heatmaps, const std::filesystem::path& out_dir,
                           std::ostream& out);

struct PipelineSummary {
  std::size_t records = 0;
  std::filesystem::path dataset;
  std::filesystem::path ledger;
  std::filesystem::path chains;
};

/// One round of data generation over `input_ids` (all inputs when empty)
/// with the initial policy; writes dataset.jsonl, scores.log, chains.jsonl.
PipelineSummary cmd_pipeline(const RunConfig& cfg, const std::filesystem::path& out_dir,
                             const std::vector<std::string>& input_ids, std::ostream& out);

/// Trains on a dataset file; writes the checkpoint and an (epoch, loss) file.
std::vector<double> cmd_train(const RunConfig& cfg, const std::filesystem::path& dataset,
                              const std::optional<std::filesystem::path>& checkpoint_in,
                              const std::filesystem::path& checkpoint_out, const std::filesystem::path& loss_out,
                              std::ostream& out);

/// Full m-round run into cfg.paths.output_dir.
void cmd_iterate(const RunConfig& cfg, std::size_t resume_from, std::ostream& out);

/// Property checks on the configured fixtures; returns true when all pass.
bool cmd_verify(const RunConfig& cfg, std::ostream& out);

}  // namespace regcot
