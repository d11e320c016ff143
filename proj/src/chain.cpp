#include "regcot/chain.hpp"

#include "regcot/errors.hpp"

#include <json.hpp>

namespace regcot {

double CandidateResponse::final_score() const {
  if (!scores) throw StateError("candidate '" + response.response_id + "' has no score");
  return scores->s_final;
}

std::vector<ResponseText> ReasoningChain::history() const {
  std::vector<ResponseText> out;
  out.reserve(steps.size());
  for (const auto& s : steps) out.push_back(s.response);
  return out;
}

std::vector<std::string> ReasoningChain::history_ids() const {
  std::vector<std::string> out;
  out.reserve(steps.size());
  for (const auto& s : steps) out.push_back(s.response.response_id);
  return out;
}

Seed candidate_seed(Seed step_seed, const std::string& hypothesis_id) { return derive_seed(step_seed, hypothesis_id); }

CandidateSet generate_candidates(const Generator& generator, const ReasoningChain& chain, const ImageGrid& image,
                                 std::span<const HypothesisRegion> regions, std::span<const Token> question,
                                 Seed seed, std::size_t horizon) {
  if (regions.empty()) throw DataError("no viable hypotheses at timestep " + std::to_string(chain.t()));
  if (chain.t() >= horizon) {
    throw StateError("chain already has " + std::to_string(chain.t()) + " of " + std::to_string(horizon) + " steps");
  }
  CandidateSet set;
  set.timestep = chain.t();
  set.candidates.reserve(regions.size());
  GenerationContext ctx;
  ctx.image = &image;
  ctx.question.assign(question.begin(), question.end());
  ctx.history = chain.history();
  for (const auto& region : regions) {
    ctx.region = &region.proposal;
    CandidateResponse c;
    c.hypothesis_index = region.hypothesis_index;
    c.hypothesis_id = region.hypothesis_id();
    c.response = generator.generate(ctx, candidate_seed(seed, region.hypothesis_id()));
    set.candidates.push_back(std::move(c));
  }
  return set;
}

std::size_t best_candidate(const CandidateSet& scored) {
  if (scored.candidates.empty()) throw StateError("empty candidate set");
  std::size_t best = 0;
  for (std::size_t i = 1; i < scored.candidates.size(); ++i) {
    const auto& c = scored.candidates[i];
    const auto& b = scored.candidates[best];
    const double sc = c.final_score();
    const double sb = b.final_score();
    if (sc > sb || (sc == sb && c.hypothesis_index < b.hypothesis_index)) best = i;
  }
  // Validate every candidate, not only those compared above.
  for (const auto& c : scored.candidates) (void)c.final_score();
  return best;
}

ReasoningChain advance_chain(ReasoningChain chain, const CandidateSet& scored) {
  if (scored.timestep != chain.t()) {
    throw StateError("candidate set for timestep " + std::to_string(scored.timestep) + " applied to chain at t=" +
                     std::to_string(chain.t()));
  }
  const auto& best = scored.candidates[best_candidate(scored)];
  chain.steps.push_back({best.response, best.hypothesis_id, best.hypothesis_index, best.final_score()});
  return chain;
}

std::string format_chain(const ReasoningChain& chain) {
  std::string out;
  for (std::size_t t = 0; t < chain.steps.size(); ++t) {
    const auto& s = chain.steps[t];
    nlohmann::ordered_json j;
    j["origin"] = chain.origin;
    j["t"] = t;
    j["hypothesis_id"] = s.hypothesis_id;
    j["response_id"] = s.response.response_id;
    j["tokens"] = s.response.tokens;
    j["final_score"] = s.final_score;
    out += j.dump() + "\n";
  }
  return out;
}

}  // namespace regcot
