#include "regcot/commands.hpp"
#include "regcot/config.hpp"
#include "regcot/errors.hpp"
#include "regcot/fsio.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <sstream>
#include <sys/wait.h>

namespace regcot {
namespace {

namespace fs = std::filesystem;

const fs::path kFixtures = REGCOT_FIXTURE_DIR;

class Scratch : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("regcot_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    cfg_ = load_config(kFixtures / "config.json");
    cfg_.paths.output_dir = dir_ / "out";
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path dir_;
  RunConfig cfg_;
};

TEST(Config, BundledConfigRoundTrips) {
  const auto cfg = load_config(kFixtures / "config.json");
  EXPECT_EQ(cfg.seed, 7u);
  EXPECT_TRUE(cfg.paths.hypotheses.is_absolute());
  const auto again = parse_config(dump_config(cfg), "/");
  EXPECT_EQ(again, cfg);
  EXPECT_EQ(config_digest(again), config_digest(cfg));
  auto other = cfg;
  other.beta = 0.2;
  EXPECT_NE(config_digest(other), config_digest(cfg));
}

TEST(Config, RejectsUnknownKeysAndBadValues) {
  EXPECT_THROW(parse_config(R"({"seeed": 1})", "/"), ConfigError);
  EXPECT_THROW(parse_config(R"({"ablations": {"naive": true}})", "/"), ConfigError);
  EXPECT_THROW(parse_config(R"({"tau": 1.5})", "/"), ConfigError);
  EXPECT_THROW(parse_config(R"({"gamma": -0.1})", "/"), ConfigError);
  EXPECT_THROW(parse_config(R"({"beta": 0})", "/"), ConfigError);
  EXPECT_THROW(parse_config("not json", "/"), ConfigError);
  EXPECT_THROW(load_config("/nonexistent/config.json"), ConfigError);
}

TEST(Config, AblationsMapOntoEffectiveSettings) {
  RunConfig cfg;
  cfg.ablations.gamma_zero = true;
  cfg.ablations.no_iteration = true;
  cfg.ablations.naive_dpo = true;
  cfg.ablations.single_evaluator = true;
  EXPECT_EQ(cfg.effective_gamma(), 0.0);
  EXPECT_EQ(cfg.effective_rounds(), 1u);
  EXPECT_TRUE(cfg.loss_config().naive_dpo);
  EXPECT_TRUE(cfg.scoring_config().single_evaluator);
  EXPECT_EQ(cfg.scoring_config().gamma, 0.0);
}

TEST_F(Scratch, RegionsWritesOneMaskPerSurvivingHypothesis) {
  std::vector<fs::path> maps;
  for (const auto& e : fs::directory_iterator(kFixtures / "heatmaps" / "case01")) maps.push_back(e.path());
  std::sort(maps.begin(), maps.end());
  ASSERT_EQ(maps.size(), 6u);
  std::ostringstream out;
  const auto summary = cmd_regions(cfg_, kFixtures / "images" / "case01.txt", maps, dir_ / "masks", out);
  EXPECT_EQ(summary.written.size(), 4u);
  EXPECT_EQ(summary.skipped.size(), 2u);
  std::size_t files = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir_ / "masks")) ++files;
  EXPECT_EQ(files, 4u);
  for (const auto& s : summary.skipped) {
    EXPECT_NE(out.str().find(s), std::string::npos);
    EXPECT_FALSE(fs::exists(dir_ / "masks" / (s + ".mask.txt")));
  }
}

TEST_F(Scratch, RegionsNamesMissingFile) {
  std::ostringstream out;
  try {
    cmd_regions(cfg_, kFixtures / "images" / "case01.txt", {dir_ / "ghost.txt"}, dir_ / "masks", out);
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("ghost.txt"), std::string::npos);
  }
}

TEST_F(Scratch, TrainNaiveFlagEqualsZeroMarginScale) {
  std::ostringstream out;
  const auto summary = cmd_pipeline(cfg_, dir_ / "p", {}, out);
  ASSERT_GT(summary.records, 0u);
  auto naive = cfg_;
  naive.ablations.naive_dpo = true;
  auto flat = cfg_;
  flat.margin_scale = 0.0;
  const auto la = cmd_train(naive, summary.dataset, std::nullopt, dir_ / "a.ckpt", dir_ / "a.dat", out);
  const auto lb = cmd_train(flat, summary.dataset, std::nullopt, dir_ / "b.ckpt", dir_ / "b.dat", out);
  EXPECT_EQ(la, lb);
  EXPECT_EQ(read_text_file(dir_ / "a.ckpt"), read_text_file(dir_ / "b.ckpt"));
}

TEST_F(Scratch, TrainWithZeroLearningRateKeepsCheckpoint) {
  std::ostringstream out;
  const auto summary = cmd_pipeline(cfg_, dir_ / "p", {}, out);
  cmd_train(cfg_, summary.dataset, std::nullopt, dir_ / "start.ckpt", dir_ / "start.dat", out);
  auto frozen = cfg_;
  frozen.learning_rate = 0.0;
  const auto loss = cmd_train(frozen, summary.dataset, dir_ / "start.ckpt", dir_ / "end.ckpt", dir_ / "end.dat", out);
  EXPECT_EQ(read_text_file(dir_ / "start.ckpt"), read_text_file(dir_ / "end.ckpt"));
  for (double l : loss) EXPECT_DOUBLE_EQ(l, loss.front());
}

TEST_F(Scratch, VerifyPassesOnBundledFixtures) {
  std::ostringstream out;
  EXPECT_TRUE(cmd_verify(cfg_, out)) << out.str();
  EXPECT_EQ(out.str().find("FAIL"), std::string::npos);
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(REGCOT_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

TEST_F(Scratch, CliExitCodes) {
  const auto cfg = (kFixtures / "config.json").string();
  const auto out = (dir_ / "cli").string();
  EXPECT_EQ(run_cli("-c " + cfg + " -o " + out + " pipeline"), 0);
  EXPECT_TRUE(fs::exists(dir_ / "cli" / "dataset.jsonl"));
  EXPECT_EQ(run_cli("-c " + cfg + " -o " + out + " verify"), 0);
  EXPECT_EQ(run_cli("-c /nonexistent.json pipeline"), 1);
  EXPECT_EQ(run_cli("-c " + cfg + " --bogus pipeline"), 1);
  EXPECT_EQ(run_cli("-c " + cfg + " -o " + out + " pipeline --input no_such_case"), 1);
  write_file_atomic(dir_ / "broken.jsonl", "{\"format\":\"regcot-preferences\",\"version\":1}\n{oops\n");
  EXPECT_EQ(run_cli("-c " + cfg + " train --dataset " + (dir_ / "broken.jsonl").string() + " --checkpoint-out " +
                    (dir_ / "x.ckpt").string() + " --loss-out " + (dir_ / "x.dat").string()),
            2);
}

}  // namespace
}  // namespace regcot
