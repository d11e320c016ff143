#pragma once

#include "regcot/chain.hpp"
#include "regcot/contracts.hpp"
#include "regcot/errors.hpp"

#include <array>
#include <cmath>
#include <span>
#include <string>
#include <vector>

namespace regcot {

struct ScoringConfig {
  std::size_t horizon = 3;
  double gamma = 0.3;
  int j_samples = 2;
  bool single_evaluator = false;
};

/// s = s_cur + gamma * s_nxt, with the lookahead term dropped on the last step.
template <typename Scalar>
Scalar combine_score(Scalar s_cur, Scalar s_nxt, Scalar gamma, bool is_last) {
  if (!(gamma >= Scalar(0))) throw ConfigError("gamma must be non-negative");
  if (is_last) return s_cur;
  return s_cur + gamma * s_nxt;
}

/// Mean of the two scores, damped by exp(-|s1 - s2|).
template <typename Scalar>
Scalar consensus_weight(Scalar s1, Scalar s2) {
  using std::abs;
  using std::exp;
  if (std::isnan(s1) || std::isnan(s2)) throw NumericError("consensus_weight received NaN");
  return ((s1 + s2) / Scalar(2)) * exp(-abs(s1 - s2));
}

double score_current(const Evaluator& evaluator, const ResponseText& candidate,
                     std::span<const ResponseText> history);

/// Seed of lookahead sample `sample` for the candidate `response_id`.
Seed lookahead_seed(Seed seed, const std::string& response_id, int sample);

/// j next responses conditioned on (history + candidate), drawn with distinct derived seeds.
std::vector<ResponseText> sample_lookahead(const Generator& generator, const GenerationContext& next_ctx,
                                           const std::string& candidate_id, int j_samples, Seed seed);

/// Arithmetic mean of the evaluator over the sampled next responses.
double mean_lookahead_score(const Evaluator& evaluator, std::span<const ResponseText> samples,
                            std::span<const ResponseText> next_history);

/// Expected evaluator score of the next step given the candidate. Returns 0
/// without sampling when the candidate sits on the last step.
double score_lookahead(const Evaluator& evaluator, const Generator& generator, const CandidateResponse& candidate,
                       const ReasoningChain& chain, const ImageGrid& image, const HypothesisRegion& region,
                       std::span<const Token> question, int j_samples, Seed seed, std::size_t horizon);

/// Fills every candidate's ScoreBreakdown. `regions` is the list the set was
/// generated from (candidate i belongs to region i).
CandidateSet score_candidates(CandidateSet set, const Generator& generator,
                              const std::array<const Evaluator*, 2>& evaluators, const ReasoningChain& chain,
                              const ImageGrid& image, std::span<const HypothesisRegion> regions,
                              std::span<const Token> question, Seed seed, const ScoringConfig& cfg);

// Score ledger: one JSON line per candidate
// {origin, t, hypothesis_id, s_cur_1, s_cur_2, s_nxt_1, s_nxt_2, s_1, s_2, s_final}.
std::string format_ledger(const std::string& origin, const CandidateSet& scored);

}  // namespace regcot
