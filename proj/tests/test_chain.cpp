#include "regcot/chain.hpp"
#include "regcot/errors.hpp"
#include "regcot/pipeline.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <random>

namespace regcot {
namespace {

using testing::full_regions;
using testing::make_bank;
using testing::scored_set;

const std::vector<Token> kQuestion{5, 6, 7};

TEST(GenerateCandidates, OneCandidatePerRegionInOrder) {
  const auto bank = make_bank();
  const ScriptedGenerator gen(bank);
  const ImageGrid image(4, 4, 0.3);
  const auto regions = full_regions({0, 1, 2, 3, 4, 5}, image);
  const auto set = generate_candidates(gen, ReasoningChain{"in", {}}, image, regions, kQuestion, 42, 3);
  ASSERT_EQ(set.candidates.size(), 6u);
  for (std::size_t i = 0; i < 6; ++i) {
    EXPECT_EQ(set.candidates[i].hypothesis_id, regions[i].hypothesis_id());
    EXPECT_EQ(set.candidates[i].response.response_id.substr(0, 5), "H" + std::to_string(i) + ".t0");
    EXPECT_FALSE(set.candidates[i].scores.has_value());
  }
  const auto again = generate_candidates(gen, ReasoningChain{"in", {}}, image, regions, kQuestion, 42, 3);
  for (std::size_t i = 0; i < 6; ++i) EXPECT_EQ(again.candidates[i].response, set.candidates[i].response);
}

TEST(GenerateCandidates, SkippedHypothesesProduceNoCandidate) {
  // Six maps, three of which never reach tau.
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const ImageGrid image(6, 6, 0.8);
  std::vector<ActivationMap> maps;
  for (int h = 0; h < 6; ++h) {
    ImageGrid::Values v(6, 6);
    const double cap = h % 2 == 0 ? 1.0 : 0.49;
    for (Eigen::Index i = 0; i < v.size(); ++i) v.data()[i] = cap * u(rng);
    maps.push_back({"H" + std::to_string(h), ImageGrid(v)});
  }
  std::size_t expected = 0;
  for (const auto& m : maps) expected += oracle::components(oracle::threshold(m.grid, 0.5)).empty() ? 0 : 1;
  ASSERT_EQ(expected, 3u);

  const auto regions = propose_regions(image, maps, {0.5, 1});
  EXPECT_EQ(regions.skipped, (std::vector<std::string>{"H1", "H3", "H5"}));
  const auto bank = make_bank();
  const ScriptedGenerator gen(bank);
  const auto set = generate_candidates(gen, {"in", {}}, image, regions.regions, kQuestion, 1, 3);
  ASSERT_EQ(set.candidates.size(), expected);
  EXPECT_EQ(set.candidates[1].hypothesis_index, 2u);
}

TEST(GenerateCandidates, EmptyRegionsIsPipelineError) {
  const auto bank = make_bank();
  const ScriptedGenerator gen(bank);
  const ImageGrid image(2, 2, 0.3);
  try {
    generate_candidates(gen, {"in", {}}, image, {}, kQuestion, 1, 3);
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("no viable hypotheses at timestep 0"), std::string::npos);
  }
}

TEST(GenerateCandidates, CompletedChainIsStateError) {
  const auto bank = make_bank();
  const ScriptedGenerator gen(bank);
  const ImageGrid image(2, 2, 0.3);
  ReasoningChain chain{"in", {{{"a", {1}}, "H0", 0, 0.5}}};
  EXPECT_THROW(generate_candidates(gen, chain, image, full_regions({0}, image), kQuestion, 1, 1), StateError);
}

TEST(AdvanceChain, AppendsArgmax) {
  const auto chain = advance_chain({"in", {}}, scored_set({0.2, 0.9, 0.4}));
  ASSERT_EQ(chain.t(), 1u);
  EXPECT_EQ(chain.steps[0].hypothesis_id, "H1");
  EXPECT_EQ(chain.steps[0].final_score, 0.9);
}

TEST(AdvanceChain, TieGoesToLowerHypothesisIndex) {
  auto set = scored_set({0.5, 0.5});
  EXPECT_EQ(advance_chain({"in", {}}, set).steps[0].hypothesis_id, "H0");
  std::swap(set.candidates[0], set.candidates[1]);
  EXPECT_EQ(advance_chain({"in", {}}, set).steps[0].hypothesis_id, "H0");
}

TEST(AdvanceChain, SingleCandidateAlwaysAppended) {
  EXPECT_EQ(advance_chain({"in", {}}, scored_set({0.0})).steps[0].hypothesis_id, "H0");
}

TEST(AdvanceChain, UnscoredCandidateIsStateError) {
  auto set = scored_set({0.1, 0.2, 0.3});
  set.candidates[2].scores.reset();
  EXPECT_THROW(advance_chain({"in", {}}, set), StateError);
}

TEST(AdvanceChain, ArgmaxInvariantUnderPositiveScaling) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(0.0, 1.3);
  std::uniform_real_distribution<double> scale(0.01, 100.0);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<double> s(5);
    for (auto& x : s) x = u(rng);
    const double c = scale(rng);
    std::vector<double> scaled = s;
    for (auto& x : scaled) x *= c;
    EXPECT_EQ(best_candidate(scored_set(s)), best_candidate(scored_set(scaled)));
  }
}

TEST(AdvanceChain, ReplayReproducesChain) {
  const std::vector<CandidateSet> sets{scored_set({0.3, 0.1}, 0), scored_set({0.2, 0.7}, 1), scored_set({0.6, 0.6}, 2)};
  ReasoningChain a{"in", {}}, b{"in", {}};
  for (const auto& s : sets) a = advance_chain(std::move(a), s);
  for (const auto& s : sets) b = advance_chain(std::move(b), s);
  EXPECT_EQ(format_chain(a), format_chain(b));
  EXPECT_EQ(a.history_ids(), (std::vector<std::string>{"H0.t0", "H1.t1", "H0.t2"}));
}

TEST(AdvanceChain, WrongTimestepIsStateError) {
  EXPECT_THROW(advance_chain({"in", {}}, scored_set({0.4}, 1)), StateError);
}

TEST(ChainDump, OneLinePerStep) {
  auto chain = advance_chain({"case", {}}, scored_set({0.25}));
  EXPECT_EQ(format_chain(chain),
            "{\"origin\":\"case\",\"t\":0,\"hypothesis_id\":\"H0\",\"response_id\":\"H0.t0\",\"tokens\":[1],"
            "\"final_score\":0.25}\n");
}

}  // namespace
}  // namespace regcot
