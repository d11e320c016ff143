#include "regcot/pipeline.hpp"

#include "regcot/errors.hpp"
#include "regcot/fsio.hpp"
#include "regcot/scoring.hpp"

#include <json.hpp>

#include <algorithm>
#include <set>

namespace regcot {

using nlohmann::json;

namespace {

json parse_json(const std::string& text, const std::string& source) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw DataError(source + ": " + e.what());
  }
}

template <typename Fn>
auto in_stage(const std::string& stage, const std::string& context, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const StageError&) {
    throw;
  } catch (const Error& e) {
    throw StageError(stage, context, e);
  }
}

}  // namespace

std::vector<Hypothesis> parse_hypotheses(const std::string& json_text, const std::string& source) {
  const auto j = parse_json(json_text, source);
  std::vector<Hypothesis> out;
  std::set<std::string> seen;
  try {
    for (const auto& h : j.at("hypotheses")) {
      Hypothesis hyp{h.at("id").get<std::string>(), h.at("heatmap").get<std::string>()};
      if (hyp.id.empty() || hyp.heatmap.empty()) throw DataError(source + ": hypothesis with empty id or heatmap");
      if (!seen.insert(hyp.id).second) throw DataError(source + ": duplicate hypothesis '" + hyp.id + "'");
      out.push_back(std::move(hyp));
    }
  } catch (const json::exception& e) {
    throw DataError(source + ": " + e.what());
  }
  if (out.empty()) throw DataError(source + ": hypothesis set is empty");
  return out;
}

std::vector<InputPair> parse_inputs(const std::string& json_text, const std::string& source) {
  const auto j = parse_json(json_text, source);
  std::vector<InputPair> out;
  std::set<std::string> seen;
  try {
    for (const auto& item : j.at("inputs")) {
      InputPair in{item.at("id").get<std::string>(), item.at("question").get<std::vector<Token>>()};
      if (in.id.empty()) throw DataError(source + ": input with empty id");
      if (in.question.empty()) throw DataError(source + ": input '" + in.id + "' has an empty question");
      for (Token t : in.question) {
        if (t < 0 || t >= kVocabularySize) throw DataError(source + ": token outside vocabulary in '" + in.id + "'");
      }
      if (!seen.insert(in.id).second) throw DataError(source + ": duplicate input '" + in.id + "'");
      out.push_back(std::move(in));
    }
  } catch (const json::exception& e) {
    throw DataError(source + ": " + e.what());
  }
  return out;
}

FixtureSet FixtureSet::load(const RunConfig& cfg) {
  FixtureSet set;
  set.paths_ = cfg.paths;
  const auto& p = cfg.paths;
  if (p.hypotheses.empty() || p.inputs.empty() || p.fixture_bank.empty() || p.images_dir.empty() ||
      p.heatmaps_dir.empty()) {
    throw ConfigError("config paths must name hypotheses, inputs, fixture_bank, images_dir and heatmaps_dir");
  }
  set.hypotheses_ = parse_hypotheses(read_text_file(p.hypotheses), p.hypotheses.string());
  set.inputs_ = parse_inputs(read_text_file(p.inputs), p.inputs.string());
  set.bank_ = std::make_unique<FixtureBank>(FixtureBank::load(p.fixture_bank));
  set.generator_ = std::make_unique<ScriptedGenerator>(*set.bank_);
  set.evaluators_[0] = std::make_unique<ScriptedEvaluator>("evaluator_1", *set.bank_);
  set.evaluators_[1] = std::make_unique<ScriptedEvaluator>("evaluator_2", *set.bank_);
  return set;
}

const InputPair& FixtureSet::input(const std::string& id) const {
  for (const auto& in : inputs_) {
    if (in.id == id) return in;
  }
  throw ConfigError("unknown input '" + id + "'");
}

std::vector<std::string> FixtureSet::input_ids() const {
  std::vector<std::string> ids;
  for (const auto& in : inputs_) ids.push_back(in.id);
  return ids;
}

ImageGrid FixtureSet::load_image(const std::string& input_id) const {
  return read_grid(paths_.images_dir / (input_id + ".txt"));
}

ActivationMap FixtureSet::load_heatmap(const std::string& input_id, const Hypothesis& hypothesis) const {
  return {hypothesis.id, read_grid(paths_.heatmaps_dir / input_id / hypothesis.heatmap)};
}

InputRegions propose_regions(const ImageGrid& image, std::span<const ActivationMap> maps, const RegionParams& params) {
  InputRegions out;
  for (std::size_t i = 0; i < maps.size(); ++i) {
    try {
      out.regions.push_back({i, propose_region(image, maps[i], params)});
    } catch (const NoRegionError& e) {
      out.skipped.push_back(e.hypothesis_id());
    }
  }
  return out;
}

InputOutcome run_input(const InputPair& input, const FixtureSet& fixtures, const RunConfig& cfg, std::size_t round,
                       Seed round_seed) {
  InputOutcome outcome;
  const auto image = in_stage("regions", "input " + input.id, [&] { return fixtures.load_image(input.id); });
  const auto regions = in_stage("regions", "input " + input.id, [&] {
    std::vector<ActivationMap> maps;
    for (const auto& h : fixtures.hypotheses()) maps.push_back(fixtures.load_heatmap(input.id, h));
    return propose_regions(image, maps, cfg.region_params());
  });
  outcome.skipped = regions.skipped;
  outcome.chain.origin = input.id;
  const auto scoring = cfg.scoring_config();
  for (std::size_t t = 0; t < cfg.timesteps; ++t) {
    const auto where = "input " + input.id + " t=" + std::to_string(t);
    const Seed step_seed = derive_seed(round_seed, input.id, "t" + std::to_string(t));
    auto set = in_stage("generation", where, [&] {
      return generate_candidates(fixtures.generator(), outcome.chain, image, regions.regions, input.question,
                                 step_seed, cfg.timesteps);
    });
    set = in_stage("scoring", where, [&] {
      return score_candidates(std::move(set), fixtures.generator(), fixtures.evaluators(), outcome.chain, image,
                              regions.regions, input.question, step_seed, scoring);
    });
    auto records = in_stage("pairs", where, [&] {
      return build_pairs(set, outcome.chain, cfg.pairs_per_step, input.question, round);
    });
    outcome.records.insert(outcome.records.end(), records.begin(), records.end());
    outcome.chain = in_stage("chain", where, [&] { return advance_chain(std::move(outcome.chain), set); });
    outcome.scored_sets.push_back(std::move(set));
  }
  return outcome;
}

PipelineResult run_pipeline(std::vector<std::string> input_ids, const FixtureSet& fixtures, const RunConfig& cfg,
                            std::size_t round, Seed round_seed) {
  if (input_ids.empty()) throw ConfigError("pipeline needs at least one input");
  std::sort(input_ids.begin(), input_ids.end());
  if (std::adjacent_find(input_ids.begin(), input_ids.end()) != input_ids.end()) {
    throw ConfigError("duplicate input id in pipeline request");
  }
  PipelineResult result;
  for (const auto& id : input_ids) {
    auto outcome = run_input(fixtures.input(id), fixtures, cfg, round, round_seed);
    result.records.insert(result.records.end(), outcome.records.begin(), outcome.records.end());
    for (const auto& set : outcome.scored_sets) result.ledger += format_ledger(id, set);
    result.chains += format_chain(outcome.chain);
    result.outcomes.push_back(std::move(outcome));
  }
  return result;
}

Seed round_seed(Seed root, std::size_t round, const std::string& policy_digest) {
  return derive_seed(root, "round", std::to_string(round), policy_digest);
}

void extend_policy(PolicyParams& policy, std::span<const PreferenceRecord> dataset) {
  for (const auto& rec : dataset) policy.ensure(rec.context_key, rec.candidates);
}

}  // namespace regcot
