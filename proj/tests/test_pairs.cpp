#include "regcot/errors.hpp"
#include "regcot/fsio.hpp"
#include "regcot/pairs.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

namespace regcot {
namespace {

using testing::scored_set;

const std::vector<Token> kQuestion{3, 1, 4};

// Sort-based oracle: indices ordered by descending score, then index.
std::vector<std::size_t> ranking(const std::vector<double>& s) {
  std::vector<std::size_t> idx(s.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return s[a] > s[b]; });
  return idx;
}

TEST(BuildPairs, OutermostRanksArePaired) {
  const std::vector<double> s{0.3, 0.9, 0.1, 0.6, 0.45, 0.2};
  const auto rank = ranking(s);
  const auto recs = build_pairs(scored_set(s), {"in", {}}, 2, kQuestion, 1);
  ASSERT_EQ(recs.size(), 2u);
  EXPECT_EQ(recs[0].winner.response_id, "H" + std::to_string(rank[0]) + ".t0");
  EXPECT_EQ(recs[0].loser.response_id, "H" + std::to_string(rank[5]) + ".t0");
  EXPECT_EQ(recs[1].winner.response_id, "H" + std::to_string(rank[1]) + ".t0");
  EXPECT_EQ(recs[1].loser.response_id, "H" + std::to_string(rank[4]) + ".t0");
  EXPECT_EQ(recs[0].winner.score, 0.9);
  EXPECT_EQ(recs[0].loser.score, 0.1);
  EXPECT_EQ(recs[0].candidates.size(), 6u);
  EXPECT_TRUE(std::is_sorted(recs[0].candidates.begin(), recs[0].candidates.end()));
}

TEST(BuildPairs, TwoCandidatesGiveOnePair) {
  const auto recs = build_pairs(scored_set({0.2, 0.7}), {"in", {}}, 2, kQuestion, 1);
  ASSERT_EQ(recs.size(), 1u);
  EXPECT_EQ(recs[0].winner.response_id, "H1.t0");
}

TEST(BuildPairs, EqualScoresGiveNothing) {
  EXPECT_TRUE(build_pairs(scored_set({0.4, 0.4, 0.4, 0.4}), {"in", {}}, 2, kQuestion, 1).empty());
}

TEST(BuildPairs, FewerThanTwoCandidatesIsSkipped) {
  EXPECT_TRUE(build_pairs(scored_set({0.4}), {"in", {}}, 2, kQuestion, 1).empty());
}

TEST(BuildPairs, EqualInnerPairIsDropped) {
  const auto recs = build_pairs(scored_set({0.9, 0.5, 0.5, 0.1}), {"in", {}}, 2, kQuestion, 1);
  ASSERT_EQ(recs.size(), 1u);
}

TEST(BuildPairs, EmbedsSharedHistoryAndContext) {
  ReasoningChain chain{"case7", {{{"a", {1}}, "H0", 0, 0.5}}};
  const auto recs = build_pairs(scored_set({0.8, 0.1}, 1), chain, 2, kQuestion, 3);
  ASSERT_EQ(recs.size(), 1u);
  EXPECT_EQ(recs[0].origin, "case7");
  EXPECT_EQ(recs[0].round, 3u);
  EXPECT_EQ(recs[0].timestep, 1u);
  EXPECT_EQ(recs[0].history, (std::vector<std::string>{"a"}));
  const std::vector<std::string> hist{"a"};
  EXPECT_EQ(recs[0].context_key, context_key(kQuestion, hist));
}

TEST(BuildPairs, RandomSetsRespectInvariants) {
  std::mt19937_64 rng(12);
  std::uniform_int_distribution<int> n_dist(1, 8);
  std::uniform_int_distribution<int> k_dist(1, 4);
  std::uniform_int_distribution<int> coarse(0, 5);
  for (int trial = 0; trial < 2000; ++trial) {
    std::vector<double> s(static_cast<std::size_t>(n_dist(rng)));
    for (auto& x : s) x = coarse(rng) / 5.0;  // frequent ties
    const auto k = static_cast<std::size_t>(k_dist(rng));
    const auto set = scored_set(s);
    const auto recs = build_pairs(set, {"in", {}}, k, kQuestion, 1);
    EXPECT_LE(recs.size(), k);
    std::set<std::string> used;
    for (const auto& r : recs) {
      EXPECT_GT(r.winner.score, r.loser.score);
      EXPECT_NE(r.winner.response_id, r.loser.response_id);
      EXPECT_TRUE(used.insert(r.winner.response_id).second);
      EXPECT_TRUE(used.insert(r.loser.response_id).second);
      EXPECT_NO_THROW(validate_record(r));
    }
    if (!recs.empty()) {
      const auto chain = advance_chain({"in", {}}, set);
      EXPECT_EQ(recs[0].winner.response_id, chain.steps[0].response.response_id);
    }
  }
}

TEST(BuildPairs, ScoresQuantisedToTwelveDigits) {
  const auto recs = build_pairs(scored_set({0.123456789012345678, 0.1}), {"in", {}}, 1, kQuestion, 1);
  ASSERT_EQ(recs.size(), 1u);
  EXPECT_EQ(recs[0].winner.score, 0.123456789012);
}

std::vector<PreferenceRecord> sample_records() {
  std::vector<PreferenceRecord> all;
  for (int t = 0; t < 2; ++t) {
    ReasoningChain chain{"c\"1", {}};
    for (int i = 0; i < t; ++i) chain.steps.push_back({{"h" + std::to_string(i), {1}}, "H0", 0, 0.5});
    auto recs = build_pairs(scored_set({0.91, 0.33, 0.72, 0.05}, static_cast<std::size_t>(t)), chain, 2, kQuestion, 2);
    all.insert(all.end(), recs.begin(), recs.end());
  }
  return all;
}

TEST(Dataset, WritesOneLinePerRecord) {
  const auto recs = sample_records();
  ASSERT_EQ(recs.size(), 4u);
  std::ostringstream sink;
  EXPECT_EQ(write_dataset(recs, sink), 4u);
  const auto text = sink.str();
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 4);
  std::ostringstream empty;
  EXPECT_EQ(write_dataset({}, empty), 0u);
  EXPECT_TRUE(empty.str().empty());
}

TEST(Dataset, RoundTripIsStructurallyIdenticalAndByteStable) {
  const auto recs = sample_records();
  const auto text = format_dataset(recs);
  EXPECT_EQ(text.substr(0, text.find('\n')), "{\"format\":\"regcot-preferences\",\"version\":1}");
  const auto back = parse_dataset(text);
  EXPECT_EQ(back, recs);
  EXPECT_EQ(format_dataset(back), text);

  const auto dir = std::filesystem::temp_directory_path() / "regcot_test_pairs";
  std::filesystem::remove_all(dir);
  save_dataset(dir / "d.jsonl", recs);
  const auto first = read_text_file(dir / "d.jsonl");
  save_dataset(dir / "d.jsonl", recs);
  EXPECT_EQ(read_text_file(dir / "d.jsonl"), first);
  EXPECT_EQ(load_dataset(dir / "d.jsonl"), recs);
  std::filesystem::remove_all(dir);
}

TEST(Dataset, RejectsInvalidRecords) {
  auto recs = sample_records();
  std::swap(recs[0].winner, recs[0].loser);
  std::ostringstream sink;
  EXPECT_THROW(write_dataset(recs, sink), DataError);
  const auto good = format_record(sample_records()[0]);
  auto broken = good;
  broken.replace(broken.find("\"winner\""), 8, "\"victor\"");
  try {
    parse_dataset("{\"format\":\"regcot-preferences\",\"version\":1}\n" + broken + "\n", "d.jsonl");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
  EXPECT_THROW(parse_dataset(good + "\n"), ParseError);  // no header
}

TEST(Dataset, WriteToMissingDirectoryFailsWithPath) {
  try {
    save_dataset("/proc/does/not/exist/d.jsonl", sample_records());
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("/proc/does/not/exist"), std::string::npos);
  }
}

}  // namespace
}  // namespace regcot
