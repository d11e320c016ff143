#pragma once

#include "regcot/chain.hpp"
#include "regcot/config.hpp"
#include "regcot/contracts.hpp"
#include "regcot/pairs.hpp"

#include <memory>
#include <string>
#include <vector>

namespace regcot {

struct Hypothesis {
  std::string id;
  std::string heatmap;  // file name inside heatmaps_dir/<input id>/
};

struct InputPair {
  std::string id;
  std::vector<Token> question;
};

/// Hypothesis set, input pairs, fixture bank and scripted models loaded from
/// the paths of a RunConfig.
class FixtureSet {
 public:
  static FixtureSet load(const RunConfig& cfg);

  const std::vector<Hypothesis>& hypotheses() const noexcept { return hypotheses_; }
  const std::vector<InputPair>& inputs() const noexcept { return inputs_; }
  const InputPair& input(const std::string& id) const;
  std::vector<std::string> input_ids() const;

  const FixtureBank& bank() const noexcept { return *bank_; }
  const Generator& generator() const noexcept { return *generator_; }
  std::array<const Evaluator*, 2> evaluators() const noexcept { return {evaluators_[0].get(), evaluators_[1].get()}; }

  ImageGrid load_image(const std::string& input_id) const;
  ActivationMap load_heatmap(const std::string& input_id, const Hypothesis& hypothesis) const;

 private:
  RunPaths paths_;
  std::vector<Hypothesis> hypotheses_;
  std::vector<InputPair> inputs_;
  std::unique_ptr<FixtureBank> bank_;
  std::unique_ptr<Generator> generator_;
  std::array<std::unique_ptr<Evaluator>, 2> evaluators_;
};

std::vector<Hypothesis> parse_hypotheses(const std::string& json_text, const std::string& source);
std::vector<InputPair> parse_inputs(const std::string& json_text, const std::string& source);

/// Regions for every hypothesis of one input; NoRegion hypotheses are listed in `skipped`.
struct InputRegions {
  std::vector<HypothesisRegion> regions;
  std::vector<std::string> skipped;
};

InputRegions propose_regions(const ImageGrid& image, std::span<const ActivationMap> maps, const RegionParams& params);

struct InputOutcome {
  ReasoningChain chain;
  std::vector<CandidateSet> scored_sets;
  std::vector<PreferenceRecord> records;
  std::vector<std::string> skipped;
};

/// Runs region proposal, T steps of generation, scoring and pair construction for one input.
InputOutcome run_input(const InputPair& input, const FixtureSet& fixtures, const RunConfig& cfg, std::size_t round,
                       Seed round_seed);

struct PipelineResult {
  std::vector<InputOutcome> outcomes;  // in input id order
  std::vector<PreferenceRecord> records;
  std::string ledger;
  std::string chains;
};

/// Processes the inputs in id order and aggregates their outputs.
PipelineResult run_pipeline(std::vector<std::string> input_ids, const FixtureSet& fixtures, const RunConfig& cfg,
                            std::size_t round, Seed round_seed);

/// Seed of the generation stage for one round: depends on the policy that generates the data.
Seed round_seed(Seed root, std::size_t round, const std::string& policy_digest);

/// Zero-initialised rows for every context the dataset references.
void extend_policy(PolicyParams& policy, std::span<const PreferenceRecord> dataset);

}  // namespace regcot
