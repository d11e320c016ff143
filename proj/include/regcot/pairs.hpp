#pragma once

#include "regcot/chain.hpp"
#include "regcot/policy.hpp"

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace regcot {

/// Significant digits used for scores in the preference dataset.
inline constexpr int kScoreDigits = 12;

struct ScoredResponse {
  std::string response_id;
  double score = 0.0;

  friend bool operator==(const ScoredResponse&, const ScoredResponse&) = default;
};

/// One preference example: winner and loser share the context and history.
/// `candidates` lists every response offered in that context.
struct PreferenceRecord {
  std::string origin;
  std::size_t round = 0;
  std::size_t timestep = 0;
  ContextKey context_key;
  std::vector<std::string> history;
  std::vector<std::string> candidates;
  ScoredResponse winner;
  ScoredResponse loser;

  friend bool operator==(const PreferenceRecord&, const PreferenceRecord&) = default;
};

/// Pairs rank i from the top with rank i from the bottom, i = 1..k, after
/// sorting by final score (ties to the lower hypothesis index). Pairs whose
/// members coincide or whose scores are equal are dropped.
std::vector<PreferenceRecord> build_pairs(const CandidateSet& scored, const ReasoningChain& chain, std::size_t k,
                                          std::span<const Token> question, std::size_t round);

/// Throws DataError when a record breaks its invariants.
void validate_record(const PreferenceRecord& record);

std::string format_record(const PreferenceRecord& record);
PreferenceRecord parse_record(const std::string& line, const std::string& source = "<memory>", std::size_t line_no = 0);

/// Appends one line per record; returns the number written.
std::size_t write_dataset(std::span<const PreferenceRecord> records, std::ostream& sink);

/// Header line followed by the records, written atomically.
std::string format_dataset(std::span<const PreferenceRecord> records);
void save_dataset(const std::filesystem::path& path, std::span<const PreferenceRecord> records);
std::vector<PreferenceRecord> parse_dataset(const std::string& text, const std::string& source = "<memory>");
std::vector<PreferenceRecord> load_dataset(const std::filesystem::path& path);

}  // namespace regcot
