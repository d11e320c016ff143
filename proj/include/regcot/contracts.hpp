#pragma once

#include "regcot/digest.hpp"
#include "regcot/grid.hpp"
#include "regcot/region.hpp"

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <tuple>
#include <vector>

namespace regcot {

using Token = int;
inline constexpr Token kVocabularySize = 64;

struct ResponseText {
  std::string response_id;
  std::vector<Token> tokens;

  friend bool operator==(const ResponseText&, const ResponseText&) = default;
};

/// Everything the target generator conditions on. The image and region are
/// borrowed; the caller keeps them alive for the duration of the call.
struct GenerationContext {
  const ImageGrid* image = nullptr;
  const RegionProposal* region = nullptr;
  std::vector<Token> question;
  std::vector<ResponseText> history;

  std::size_t timestep() const noexcept { return history.size(); }
};

/// Throws ContractViolation when the context is not well formed.
void validate_context(const GenerationContext& ctx);

/// Target model contract: deterministic in (ctx, seed), safe for concurrent calls.
class Generator {
 public:
  virtual ~Generator() = default;
  virtual ResponseText generate(const GenerationContext& ctx, Seed seed) const = 0;
};

/// Evaluator contract: a score in [0,1] for `response` given the preserved history.
class Evaluator {
 public:
  virtual ~Evaluator() = default;
  virtual const std::string& name() const = 0;
  virtual double evaluate(const ResponseText& response, std::span<const ResponseText> history) const = 0;
};

/// Calls the evaluator and enforces its range; never clamps.
double checked_evaluate(const Evaluator& evaluator, const ResponseText& response,
                        std::span<const ResponseText> history);

/// Fixture bank driving the scripted models. Line-delimited JSON, first line
/// is the versioned header {"format":"regcot-fixture-bank","version":1}.
class FixtureBank {
 public:
  static constexpr int kVersion = 1;

  static FixtureBank load(const std::filesystem::path& path);
  static FixtureBank parse(const std::string& text, const std::string& source = "<memory>");

  void add_generation(const std::string& hypothesis_id, std::size_t timestep, std::vector<ResponseText> variants);
  void add_evaluation(const std::string& evaluator, const std::string& response_id, std::size_t history_len,
                      double score);

  /// Variants for (hypothesis, timestep); ConfigError naming the key when absent.
  const std::vector<ResponseText>& variants(const std::string& hypothesis_id, std::size_t timestep) const;
  const double* find_score(const std::string& evaluator, const std::string& response_id,
                           std::size_t history_len) const;

  std::string dump() const;

 private:
  std::map<std::pair<std::string, std::size_t>, std::vector<ResponseText>> generation_;
  std::map<std::tuple<std::string, std::string, std::size_t>, double> evaluation_;
};

/// Picks a fixture variant keyed by (region hypothesis, timestep); the seed
/// and the history select among variants.
class ScriptedGenerator final : public Generator {
 public:
  explicit ScriptedGenerator(const FixtureBank& bank) : bank_(&bank) {}
  ResponseText generate(const GenerationContext& ctx, Seed seed) const override;

 private:
  const FixtureBank* bank_;
};

/// Table lookup by (response id, history length), falling back to a seeded
/// hash of the same key.
class ScriptedEvaluator final : public Evaluator {
 public:
  ScriptedEvaluator(std::string name, const FixtureBank& bank, Seed salt = 0)
      : name_(std::move(name)), bank_(&bank), salt_(salt) {}
  const std::string& name() const override { return name_; }
  double evaluate(const ResponseText& response, std::span<const ResponseText> history) const override;

 private:
  std::string name_;
  const FixtureBank* bank_;
  Seed salt_;
};

}  // namespace regcot
