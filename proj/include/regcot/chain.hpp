#pragma once

#include "regcot/contracts.hpp"
#include "regcot/region.hpp"

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace regcot {

/// Region proposal tagged with its position in the hypothesis set.
struct HypothesisRegion {
  std::size_t hypothesis_index = 0;
  RegionProposal proposal;

  const std::string& hypothesis_id() const noexcept { return proposal.hypothesis_id; }
};

/// Per-candidate scores for two evaluators; index 0 and 1 are evaluators 1 and 2.
struct ScoreBreakdown {
  std::array<double, 2> s_cur{};
  std::array<double, 2> s_nxt{};
  double gamma = 0.0;
  std::array<double, 2> s{};
  double s_final = 0.0;
};

struct CandidateResponse {
  std::size_t hypothesis_index = 0;
  std::string hypothesis_id;
  ResponseText response;
  std::optional<ScoreBreakdown> scores;

  double final_score() const;  // StateError when unscored
};

struct CandidateSet {
  std::size_t timestep = 0;
  std::vector<CandidateResponse> candidates;
};

struct ChainStep {
  ResponseText response;
  std::string hypothesis_id;
  std::size_t hypothesis_index = 0;
  double final_score = 0.0;
};

/// The single preserved forward trajectory for one input pair.
struct ReasoningChain {
  std::string origin;
  std::vector<ChainStep> steps;

  std::size_t t() const noexcept { return steps.size(); }
  std::vector<ResponseText> history() const;
  std::vector<std::string> history_ids() const;
};

/// Seed for the candidate of one hypothesis at one step.
Seed candidate_seed(Seed step_seed, const std::string& hypothesis_id);

/// One unscored candidate per region, in region order. `horizon` is T.
CandidateSet generate_candidates(const Generator& generator, const ReasoningChain& chain, const ImageGrid& image,
                                 std::span<const HypothesisRegion> regions, std::span<const Token> question,
                                 Seed seed, std::size_t horizon);

/// Index of the best final score; ties go to the lower hypothesis index.
std::size_t best_candidate(const CandidateSet& scored);

/// Appends the best candidate to the chain.
ReasoningChain advance_chain(ReasoningChain chain, const CandidateSet& scored);

// Chain dump: one JSON line per step
// {origin, t, hypothesis_id, response_id, tokens, final_score}.
std::string format_chain(const ReasoningChain& chain);

}  // namespace regcot
