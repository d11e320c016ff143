// Command-line front end: regions, pipeline, train, iterate, verify.

#include "regcot/commands.hpp"
#include "regcot/config.hpp"
#include "regcot/errors.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <optional>

namespace {

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<double> learning_rate;
  std::string output_dir;
  bool naive_dpo = false;
  bool no_iteration = false;
  bool gamma_zero = false;
  bool single_evaluator = false;
};

regcot::RunConfig resolve_config(const std::string& path, const Overrides& o) {
  regcot::RunConfig cfg = path.empty() ? regcot::RunConfig{} : regcot::load_config(path);
  if (o.seed) cfg.seed = *o.seed;
  if (o.learning_rate) cfg.learning_rate = *o.learning_rate;
  if (!o.output_dir.empty()) cfg.paths.output_dir = std::filesystem::absolute(o.output_dir);
  cfg.ablations.naive_dpo |= o.naive_dpo;
  cfg.ablations.no_iteration |= o.no_iteration;
  cfg.ablations.gamma_zero |= o.gamma_zero;
  cfg.ablations.single_evaluator |= o.single_evaluator;
  cfg.validate();
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Region-conditioned chain-of-thought preference data generation and margin-aware DPO training"};
  app.require_subcommand(1);

  std::string config_path;
  Overrides overrides;
  app.add_option("-c,--config", config_path, "Run configuration (JSON)");
  app.add_option("--seed", overrides.seed, "Override the root seed");
  app.add_option("--learning-rate", overrides.learning_rate, "Override the learning rate");
  app.add_option("-o,--output-dir", overrides.output_dir, "Override the output directory");
  app.add_flag("--naive-dpo", overrides.naive_dpo, "Drop the score margin (standard DPO)");
  app.add_flag("--no-iteration", overrides.no_iteration, "Generate all pairs once and train once");
  app.add_flag("--gamma-zero", overrides.gamma_zero, "Ignore the next-step lookahead score");
  app.add_flag("--single-evaluator", overrides.single_evaluator, "Use evaluator 1 only, no consensus weighting");

  auto* regions = app.add_subcommand("regions", "Extract region masks from heatmaps");
  std::string image_path;
  std::vector<std::string> heatmap_paths;
  std::string regions_out = ".";
  regions->add_option("--image", image_path, "Image matrix file")->required();
  regions->add_option("--heatmap", heatmap_paths, "Heatmap matrix file; its stem names the hypothesis")->required();
  regions->add_option("--out", regions_out, "Directory for <hypothesis>.mask.txt files");

  auto* pipeline = app.add_subcommand("pipeline", "Generate one round of preference data");
  std::vector<std::string> input_ids;
  pipeline->add_option("--input", input_ids, "Input ids to process (default: all)");

  auto* train = app.add_subcommand("train", "Train the policy on a preference dataset");
  std::string dataset_path;
  std::string ckpt_in;
  std::string ckpt_out;
  std::string loss_out;
  train->add_option("--dataset", dataset_path, "Preference dataset (JSONL)")->required();
  train->add_option("--checkpoint-in", ckpt_in, "Starting checkpoint (default: zero-initialised)");
  train->add_option("--checkpoint-out", ckpt_out, "Trained checkpoint")->required();
  train->add_option("--loss-out", loss_out, "Per-epoch loss file")->required();

  auto* iterate = app.add_subcommand("iterate", "Run the m-round iterative loop");
  std::size_t resume_from = 0;
  iterate->add_option("--resume-from", resume_from, "Resume after this completed round");

  auto* verify = app.add_subcommand("verify", "Run the property checks on the configured fixtures");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : static_cast<int>(regcot::ExitCode::kConfig);
  }

  try {
    const auto cfg = resolve_config(config_path, overrides);
    if (regions->parsed()) {
      std::vector<std::filesystem::path> maps(heatmap_paths.begin(), heatmap_paths.end());
      regcot::cmd_regions(cfg, image_path, maps, regions_out, std::cout);
    } else if (pipeline->parsed()) {
      regcot::cmd_pipeline(cfg, {}, input_ids, std::cout);
    } else if (train->parsed()) {
      std::optional<std::filesystem::path> in;
      if (!ckpt_in.empty()) in = ckpt_in;
      regcot::cmd_train(cfg, dataset_path, in, ckpt_out, loss_out, std::cout);
    } else if (iterate->parsed()) {
      regcot::cmd_iterate(cfg, resume_from, std::cout);
    } else if (verify->parsed()) {
      if (!regcot::cmd_verify(cfg, std::cout)) return static_cast<int>(regcot::ExitCode::kInvariant);
    }
  } catch (const regcot::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(e.code());
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return static_cast<int>(regcot::ExitCode::kInvariant);
  }
  return 0;
}
