#include "regcot/contracts.hpp"

#include "regcot/errors.hpp"
#include "regcot/fsio.hpp"

#include <json.hpp>

#include <cmath>
#include <set>
#include <sstream>

namespace regcot {

using nlohmann::json;

void validate_context(const GenerationContext& ctx) {
  if (ctx.image == nullptr) throw ContractViolation("generation context has no image");
  if (ctx.question.empty()) throw ContractViolation("generation context has an empty question");
  if (ctx.region != nullptr && !ctx.region->masked_image.same_shape(*ctx.image)) {
    throw ContractViolation("region and image shapes differ");
  }
}

double checked_evaluate(const Evaluator& evaluator, const ResponseText& response,
                        std::span<const ResponseText> history) {
  if (response.tokens.empty()) throw ContractViolation("cannot evaluate empty response '" + response.response_id + "'");
  const double score = evaluator.evaluate(response, history);
  if (!(score >= 0.0 && score <= 1.0)) {
    throw ContractViolation("evaluator '" + evaluator.name() + "' returned " + std::to_string(score) + " for '" +
                            response.response_id + "', outside [0,1]");
  }
  return score;
}

namespace {

ResponseText response_from_json(const json& j, const std::string& where) {
  ResponseText r;
  r.response_id = j.at("response_id").get<std::string>();
  r.tokens = j.at("tokens").get<std::vector<Token>>();
  if (r.response_id.empty()) throw DataError(where + ": empty response_id");
  if (r.tokens.empty()) throw DataError(where + ": response '" + r.response_id + "' has no tokens");
  for (Token t : r.tokens) {
    if (t < 0 || t >= kVocabularySize) {
      throw DataError(where + ": token " + std::to_string(t) + " outside the vocabulary");
    }
  }
  return r;
}

}  // namespace

FixtureBank FixtureBank::parse(const std::string& text, const std::string& source) {
  FixtureBank bank;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  std::set<std::string> ids;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw ParseError(source, line_no, e.what());
    }
    try {
      if (!header_seen) {
        if (j.value("format", "") != "regcot-fixture-bank") throw ParseError(source, line_no, "missing header");
        if (j.value("version", 0) != kVersion) throw ParseError(source, line_no, "unsupported fixture bank version");
        header_seen = true;
        continue;
      }
      const auto kind = j.at("kind").get<std::string>();
      const auto where = source + ":" + std::to_string(line_no);
      if (kind == "generation") {
        std::vector<ResponseText> variants;
        for (const auto& v : j.at("payload").at("variants")) {
          auto r = response_from_json(v, where);
          if (!ids.insert(r.response_id).second) throw ParseError(source, line_no, "duplicate response_id '" + r.response_id + "'");
          variants.push_back(std::move(r));
        }
        if (variants.empty()) throw ParseError(source, line_no, "generation record without variants");
        bank.add_generation(j.at("hypothesis_id").get<std::string>(), j.at("timestep").get<std::size_t>(),
                            std::move(variants));
      } else if (kind == "evaluation") {
        const double score = j.at("payload").at("score").get<double>();
        bank.add_evaluation(j.at("evaluator").get<std::string>(), j.at("response_id").get<std::string>(),
                            j.at("history_len").get<std::size_t>(), score);
      } else {
        throw ParseError(source, line_no, "unknown record kind '" + kind + "'");
      }
    } catch (const json::exception& e) {
      throw ParseError(source, line_no, e.what());
    }
  }
  if (!header_seen) throw ParseError(source, 1, "empty fixture bank");
  return bank;
}

FixtureBank FixtureBank::load(const std::filesystem::path& path) { return parse(read_text_file(path), path.string()); }

void FixtureBank::add_generation(const std::string& hypothesis_id, std::size_t timestep,
                                 std::vector<ResponseText> variants) {
  generation_[{hypothesis_id, timestep}] = std::move(variants);
}

void FixtureBank::add_evaluation(const std::string& evaluator, const std::string& response_id,
                                 std::size_t history_len, double score) {
  // Out-of-range table scores are kept: the evaluator contract check reports them.
  evaluation_[{evaluator, response_id, history_len}] = score;
}

const std::vector<ResponseText>& FixtureBank::variants(const std::string& hypothesis_id, std::size_t timestep) const {
  auto it = generation_.find({hypothesis_id, timestep});
  if (it == generation_.end()) {
    throw ConfigError("fixture bank has no generation entry for (hypothesis '" + hypothesis_id + "', timestep " +
                      std::to_string(timestep) + ")");
  }
  return it->second;
}

const double* FixtureBank::find_score(const std::string& evaluator, const std::string& response_id,
                                      std::size_t history_len) const {
  auto it = evaluation_.find({evaluator, response_id, history_len});
  return it == evaluation_.end() ? nullptr : &it->second;
}

std::string FixtureBank::dump() const {
  std::string out = json{{"format", "regcot-fixture-bank"}, {"version", kVersion}}.dump() + "\n";
  for (const auto& [key, variants] : generation_) {
    json vs = json::array();
    for (const auto& v : variants) vs.push_back({{"response_id", v.response_id}, {"tokens", v.tokens}});
    json rec = {{"kind", "generation"}, {"hypothesis_id", key.first}, {"timestep", key.second},
                {"payload", {{"variants", vs}}}};
    out += rec.dump() + "\n";
  }
  for (const auto& [key, score] : evaluation_) {
    json rec = {{"kind", "evaluation"}, {"evaluator", std::get<0>(key)}, {"response_id", std::get<1>(key)},
                {"history_len", std::get<2>(key)}, {"payload", {{"score", score}}}};
    out += rec.dump() + "\n";
  }
  return out;
}

ResponseText ScriptedGenerator::generate(const GenerationContext& ctx, Seed seed) const {
  validate_context(ctx);
  const std::string hypothesis = ctx.region != nullptr ? ctx.region->hypothesis_id : std::string();
  const auto& variants = bank_->variants(hypothesis, ctx.timestep());
  Fnv1a h;
  for (const auto& step : ctx.history) h.update(step.response_id).separator();
  const auto pick = splitmix64(seed ^ h.value()) % variants.size();
  return variants[pick];
}

double ScriptedEvaluator::evaluate(const ResponseText& response, std::span<const ResponseText> history) const {
  if (const double* s = bank_->find_score(name_, response.response_id, history.size())) return *s;
  const auto h = Fnv1a{}.update(name_).separator().update(response.response_id).separator().update(history.size()).value();
  return open_unit(splitmix64(h ^ salt_));
}

}  // namespace regcot
