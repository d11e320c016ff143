#include "regcot/pairs.hpp"

#include "regcot/errors.hpp"
#include "regcot/fsio.hpp"

#include <json.hpp>

#include <algorithm>
#include <iostream>
#include <numeric>
#include <ostream>
#include <sstream>

namespace regcot {

using nlohmann::json;

namespace {

constexpr const char* kDatasetFormat = "regcot-preferences";
constexpr int kDatasetVersion = 1;

std::string quoted(const std::string& s) { return json(s).dump(); }

std::string string_list(const std::vector<std::string>& items) {
  std::string out = "[";
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i > 0) out += ',';
    out += quoted(items[i]);
  }
  return out + "]";
}

std::string scored(const ScoredResponse& r) {
  return "{\"response_id\":" + quoted(r.response_id) + ",\"score\":" + format_significant(r.score, kScoreDigits) + "}";
}

}  // namespace

std::vector<PreferenceRecord> build_pairs(const CandidateSet& scored_set, const ReasoningChain& chain, std::size_t k,
                                          std::span<const Token> question, std::size_t round) {
  const auto& cands = scored_set.candidates;
  if (cands.size() < 2) {
    std::clog << "build_pairs: skipping " << chain.origin << " t=" << scored_set.timestep << " with "
              << cands.size() << " candidate(s)\n";
    return {};
  }
  if (scored_set.timestep != chain.t()) throw StateError("pair construction out of step with the chain");
  std::vector<std::size_t> order(cands.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> score(cands.size());
  for (std::size_t i = 0; i < cands.size(); ++i) score[i] = cands[i].final_score();
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (score[a] != score[b]) return score[a] > score[b];
    return cands[a].hypothesis_index < cands[b].hypothesis_index;
  });

  PreferenceRecord base;
  base.origin = chain.origin;
  base.round = round;
  base.timestep = scored_set.timestep;
  base.history = chain.history_ids();
  base.context_key = context_key(question, base.history);
  for (const auto& c : cands) base.candidates.push_back(c.response.response_id);
  std::sort(base.candidates.begin(), base.candidates.end());
  base.candidates.erase(std::unique(base.candidates.begin(), base.candidates.end()), base.candidates.end());

  std::vector<PreferenceRecord> records;
  const std::size_t n = cands.size();
  for (std::size_t i = 0; i < k && i < n; ++i) {
    const std::size_t top = order[i];
    const std::size_t bottom = order[n - 1 - i];
    if (i >= n - 1 - i) break;  // members coincide or the ranks have crossed
    PreferenceRecord rec = base;
    rec.winner = {cands[top].response.response_id, round_significant(score[top], kScoreDigits)};
    rec.loser = {cands[bottom].response.response_id, round_significant(score[bottom], kScoreDigits)};
    if (!(rec.winner.score > rec.loser.score) || rec.winner.response_id == rec.loser.response_id) continue;
    records.push_back(std::move(rec));
  }
  return records;
}

void validate_record(const PreferenceRecord& r) {
  if (r.origin.empty()) throw DataError("record without origin");
  if (r.winner.response_id == r.loser.response_id) throw DataError("winner equals loser '" + r.winner.response_id + "'");
  if (!(r.winner.score > r.loser.score)) throw DataError("record for " + r.origin + " has s_w <= s_l");
  if (r.history.size() != r.timestep) throw DataError("record history length differs from its timestep");
  const auto offered = [&](const std::string& id) {
    return std::binary_search(r.candidates.begin(), r.candidates.end(), id);
  };
  if (!std::is_sorted(r.candidates.begin(), r.candidates.end()) || !offered(r.winner.response_id) ||
      !offered(r.loser.response_id)) {
    throw DataError("record candidates must be sorted and contain winner and loser");
  }
}

std::string format_record(const PreferenceRecord& r) {
  return "{\"origin\":" + quoted(r.origin) + ",\"round\":" + std::to_string(r.round) +
         ",\"timestep\":" + std::to_string(r.timestep) + ",\"context_key\":" + quoted(r.context_key) +
         ",\"history\":" + string_list(r.history) + ",\"candidates\":" + string_list(r.candidates) +
         ",\"winner\":" + scored(r.winner) + ",\"loser\":" + scored(r.loser) + "}";
}

PreferenceRecord parse_record(const std::string& line, const std::string& source, std::size_t line_no) {
  PreferenceRecord r;
  try {
    const auto j = json::parse(line);
    r.origin = j.at("origin").get<std::string>();
    r.round = j.at("round").get<std::size_t>();
    r.timestep = j.at("timestep").get<std::size_t>();
    r.context_key = j.at("context_key").get<std::string>();
    r.history = j.at("history").get<std::vector<std::string>>();
    r.candidates = j.at("candidates").get<std::vector<std::string>>();
    r.winner = {j.at("winner").at("response_id").get<std::string>(), j.at("winner").at("score").get<double>()};
    r.loser = {j.at("loser").at("response_id").get<std::string>(), j.at("loser").at("score").get<double>()};
  } catch (const json::exception& e) {
    throw ParseError(source, line_no, std::string("bad preference record: ") + e.what());
  }
  try {
    validate_record(r);
  } catch (const DataError& e) {
    throw ParseError(source, line_no, e.what());
  }
  return r;
}

std::size_t write_dataset(std::span<const PreferenceRecord> records, std::ostream& sink) {
  std::size_t n = 0;
  for (const auto& r : records) {
    validate_record(r);
    sink << format_record(r) << '\n';
    ++n;
  }
  if (!sink) throw DataError("dataset sink write failed");
  return n;
}

std::string format_dataset(std::span<const PreferenceRecord> records) {
  std::ostringstream out;
  out << json{{"format", kDatasetFormat}, {"version", kDatasetVersion}}.dump() << '\n';
  write_dataset(records, out);
  return out.str();
}

void save_dataset(const std::filesystem::path& path, std::span<const PreferenceRecord> records) {
  write_file_atomic(path, format_dataset(records));
}

std::vector<PreferenceRecord> parse_dataset(const std::string& text, const std::string& source) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  std::vector<PreferenceRecord> records;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (!header_seen) {
      json h;
      try {
        h = json::parse(line);
      } catch (const json::exception& e) {
        throw ParseError(source, line_no, e.what());
      }
      if (!h.is_object() || h.value("format", "") != kDatasetFormat || h.value("version", 0) != kDatasetVersion) {
        throw ParseError(source, line_no, "missing or unsupported dataset header");
      }
      header_seen = true;
      continue;
    }
    records.push_back(parse_record(line, source, line_no));
  }
  if (!header_seen) throw ParseError(source, 1, "empty dataset file");
  return records;
}

std::vector<PreferenceRecord> load_dataset(const std::filesystem::path& path) {
  return parse_dataset(read_text_file(path), path.string());
}

}  // namespace regcot
