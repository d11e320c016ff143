#include "regcot/scoring.hpp"

#include <json.hpp>

namespace regcot {

double score_current(const Evaluator& evaluator, const ResponseText& candidate,
                     std::span<const ResponseText> history) {
  return checked_evaluate(evaluator, candidate, history);
}

Seed lookahead_seed(Seed seed, const std::string& response_id, int sample) {
  return splitmix64(seed ^ Fnv1a{}.update(response_id).separator().update(static_cast<std::uint64_t>(sample)).value());
}

std::vector<ResponseText> sample_lookahead(const Generator& generator, const GenerationContext& next_ctx,
                                           const std::string& candidate_id, int j_samples, Seed seed) {
  if (j_samples <= 0) throw ConfigError("j_samples must be positive");
  std::vector<ResponseText> samples;
  samples.reserve(static_cast<std::size_t>(j_samples));
  for (int j = 0; j < j_samples; ++j) {
    samples.push_back(generator.generate(next_ctx, lookahead_seed(seed, candidate_id, j)));
  }
  return samples;
}

double mean_lookahead_score(const Evaluator& evaluator, std::span<const ResponseText> samples,
                            std::span<const ResponseText> next_history) {
  if (samples.empty()) throw ConfigError("lookahead needs at least one sample");
  double sum = 0.0;
  for (const auto& s : samples) sum += checked_evaluate(evaluator, s, next_history);
  return sum / static_cast<double>(samples.size());
}

namespace {

GenerationContext next_context(const ReasoningChain& chain, const ResponseText& candidate, const ImageGrid& image,
                               const HypothesisRegion& region, std::span<const Token> question) {
  GenerationContext ctx;
  ctx.image = &image;
  ctx.region = &region.proposal;
  ctx.question.assign(question.begin(), question.end());
  ctx.history = chain.history();
  ctx.history.push_back(candidate);
  return ctx;
}

}  // namespace

double score_lookahead(const Evaluator& evaluator, const Generator& generator, const CandidateResponse& candidate,
                       const ReasoningChain& chain, const ImageGrid& image, const HypothesisRegion& region,
                       std::span<const Token> question, int j_samples, Seed seed, std::size_t horizon) {
  if (j_samples <= 0) throw ConfigError("j_samples must be positive");
  if (chain.t() + 1 >= horizon) return 0.0;
  const auto ctx = next_context(chain, candidate.response, image, region, question);
  const auto samples = sample_lookahead(generator, ctx, candidate.response.response_id, j_samples, seed);
  return mean_lookahead_score(evaluator, samples, ctx.history);
}

CandidateSet score_candidates(CandidateSet set, const Generator& generator,
                              const std::array<const Evaluator*, 2>& evaluators, const ReasoningChain& chain,
                              const ImageGrid& image, std::span<const HypothesisRegion> regions,
                              std::span<const Token> question, Seed seed, const ScoringConfig& cfg) {
  if (set.candidates.size() != regions.size()) throw StateError("candidate and region counts differ");
  if (cfg.j_samples <= 0) throw ConfigError("j_samples must be positive");
  if (!(cfg.gamma >= 0.0)) throw ConfigError("gamma must be non-negative");
  const bool is_last = chain.t() + 1 >= cfg.horizon;
  const auto history = chain.history();
  for (std::size_t i = 0; i < set.candidates.size(); ++i) {
    auto& cand = set.candidates[i];
    ScoreBreakdown b;
    b.gamma = cfg.gamma;
    std::vector<ResponseText> samples;
    GenerationContext next;
    if (!is_last) {
      // Shared samples, scored separately by each evaluator.
      next = next_context(chain, cand.response, image, regions[i], question);
      samples = sample_lookahead(generator, next, cand.response.response_id, cfg.j_samples, seed);
    }
    for (std::size_t e = 0; e < 2; ++e) {
      b.s_cur[e] = score_current(*evaluators[e], cand.response, history);
      b.s_nxt[e] = is_last ? 0.0 : mean_lookahead_score(*evaluators[e], samples, next.history);
      b.s[e] = combine_score(b.s_cur[e], b.s_nxt[e], cfg.gamma, is_last);
    }
    b.s_final = cfg.single_evaluator ? b.s[0] : consensus_weight(b.s[0], b.s[1]);
    cand.scores = b;
  }
  return set;
}

std::string format_ledger(const std::string& origin, const CandidateSet& scored) {
  std::string out;
  for (const auto& c : scored.candidates) {
    if (!c.scores) throw StateError("ledger entry for unscored candidate");
    const auto& b = *c.scores;
    nlohmann::ordered_json j;
    j["origin"] = origin;
    j["t"] = scored.timestep;
    j["hypothesis_id"] = c.hypothesis_id;
    j["s_cur_1"] = b.s_cur[0];
    j["s_cur_2"] = b.s_cur[1];
    j["s_nxt_1"] = b.s_nxt[0];
    j["s_nxt_2"] = b.s_nxt[1];
    j["s_1"] = b.s[0];
    j["s_2"] = b.s[1];
    j["s_final"] = b.s_final;
    out += j.dump() + "\n";
  }
  return out;
}

}  // namespace regcot
