#pragma once

#include "regcot/config.hpp"
#include "regcot/pipeline.hpp"
#include "regcot/policy.hpp"

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace regcot {

/// Seeded shuffle then contiguous split into m subsets whose sizes differ by
/// at most one; each subset is returned sorted.
std::vector<std::vector<std::string>> partition(std::span<const std::string> inputs, std::size_t m, Seed seed);

struct RoundPlan {
  std::size_t m = 0;
  std::vector<std::vector<std::string>> subsets;
  Seed seed = 0;
  std::filesystem::path run_dir;

  std::filesystem::path round_dir(std::size_t round) const;
};

RoundPlan make_plan(const RunConfig& cfg, const FixtureSet& fixtures);

struct RoundMetrics {
  std::size_t round = 0;
  std::vector<std::string> inputs;
  std::size_t records = 0;
  std::size_t skipped_hypotheses = 0;
  std::vector<double> epoch_loss;
  double mean_final_score = 0.0;
  double mean_margin = 0.0;
  Seed round_seed = 0;
  std::string policy_in;   // digest of the policy that generated the data
  std::string policy_out;  // digest of the trained checkpoint
};

std::string format_metrics(const RoundMetrics& metrics);
RoundMetrics parse_metrics(const std::string& text, const std::string& source);

struct RoundOutcome {
  std::vector<PreferenceRecord> dataset;
  PolicyParams policy;
  RoundMetrics metrics;
};

/// Generates D_i on the subset with `policy`, trains on it and persists
/// dataset.jsonl, scores.log, chains.jsonl, loss.dat, policy.ckpt, metrics.json
/// under `round_dir`. `pinned_reference`, when given, replaces the per-round snapshot.
RoundOutcome run_round(std::size_t round, std::span<const std::string> subset, const PolicyParams& policy,
                       const PolicyParams* pinned_reference, const FixtureSet& fixtures, const RunConfig& cfg,
                       const std::filesystem::path& round_dir);

struct RunReport {
  std::vector<RoundMetrics> rounds;
  PolicyParams final_policy;
  std::string text;
};

/// Runs rounds resume_from+1..m, loading round_<resume_from>/policy.ckpt when
/// resuming; writes report.txt and manifest.json.
RunReport run_all(const RoundPlan& plan, const PolicyParams& initial_policy, const FixtureSet& fixtures,
                  const RunConfig& cfg, std::size_t resume_from = 0);

/// Recomputes every checksum listed in run_dir/manifest.json; returns mismatching paths.
std::vector<std::string> verify_manifest(const std::filesystem::path& run_dir);

}  // namespace regcot
