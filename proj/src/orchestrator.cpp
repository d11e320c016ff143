#include "regcot/orchestrator.hpp"

#include "regcot/errors.hpp"
#include "regcot/fsio.hpp"
#include "regcot/margin_dpo.hpp"

#include <json.hpp>

#include <algorithm>
#include <iostream>
#include <sstream>

namespace regcot {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

std::vector<std::vector<std::string>> partition(std::span<const std::string> inputs, std::size_t m, Seed seed) {
  if (m < 1) throw ConfigError("number of rounds must be positive");
  if (inputs.empty()) throw ConfigError("cannot partition an empty input set");
  if (m > inputs.size()) {
    throw ConfigError("cannot split " + std::to_string(inputs.size()) + " inputs into " + std::to_string(m) +
                      " non-empty subsets");
  }
  const auto perm = seeded_permutation(inputs.size(), seed);
  const std::size_t base = inputs.size() / m;
  const std::size_t extra = inputs.size() % m;
  std::vector<std::vector<std::string>> subsets(m);
  std::size_t next = 0;
  for (std::size_t s = 0; s < m; ++s) {
    const std::size_t size = base + (s < extra ? 1 : 0);
    for (std::size_t i = 0; i < size; ++i) subsets[s].push_back(inputs[perm[next++]]);
    std::sort(subsets[s].begin(), subsets[s].end());
  }
  return subsets;
}

fs::path RoundPlan::round_dir(std::size_t round) const { return run_dir / ("round_" + std::to_string(round)); }

RoundPlan make_plan(const RunConfig& cfg, const FixtureSet& fixtures) {
  RoundPlan plan;
  plan.m = cfg.effective_rounds();
  plan.seed = cfg.seed;
  plan.run_dir = cfg.paths.output_dir;
  if (plan.run_dir.empty()) throw ConfigError("config paths.output_dir is required");
  const auto ids = fixtures.input_ids();
  plan.subsets = partition(ids, plan.m, derive_seed(cfg.seed, "partition"));
  return plan;
}

std::string format_metrics(const RoundMetrics& m) {
  ordered_json j;
  j["round"] = m.round;
  j["inputs"] = m.inputs;
  j["records"] = m.records;
  j["skipped_hypotheses"] = m.skipped_hypotheses;
  j["epoch_loss"] = m.epoch_loss;
  j["mean_final_score"] = m.mean_final_score;
  j["mean_margin"] = m.mean_margin;
  j["round_seed"] = m.round_seed;
  j["policy_in"] = m.policy_in;
  j["policy_out"] = m.policy_out;
  return j.dump(2) + "\n";
}

RoundMetrics parse_metrics(const std::string& text, const std::string& source) {
  RoundMetrics m;
  try {
    const auto j = json::parse(text);
    m.round = j.at("round").get<std::size_t>();
    m.inputs = j.at("inputs").get<std::vector<std::string>>();
    m.records = j.at("records").get<std::size_t>();
    m.skipped_hypotheses = j.at("skipped_hypotheses").get<std::size_t>();
    m.epoch_loss = j.at("epoch_loss").get<std::vector<double>>();
    m.mean_final_score = j.at("mean_final_score").get<double>();
    m.mean_margin = j.at("mean_margin").get<double>();
    m.round_seed = j.at("round_seed").get<Seed>();
    m.policy_in = j.at("policy_in").get<std::string>();
    m.policy_out = j.at("policy_out").get<std::string>();
  } catch (const json::exception& e) {
    throw DataError(source + ": " + e.what());
  }
  return m;
}

RoundOutcome run_round(std::size_t round, std::span<const std::string> subset, const PolicyParams& policy,
                       const PolicyParams* pinned_reference, const FixtureSet& fixtures, const RunConfig& cfg,
                       const fs::path& round_dir) {
  if (subset.empty()) throw ConfigError("round " + std::to_string(round) + " has no inputs");
  RoundOutcome out;
  auto& metrics = out.metrics;
  metrics.round = round;
  metrics.inputs.assign(subset.begin(), subset.end());
  metrics.policy_in = policy_digest(policy);
  metrics.round_seed = round_seed(cfg.seed, round, metrics.policy_in);

  const auto generated =
      run_pipeline(std::vector<std::string>(subset.begin(), subset.end()), fixtures, cfg, round, metrics.round_seed);
  const auto dataset_path = round_dir / "dataset.jsonl";
  save_dataset(dataset_path, generated.records);
  write_file_atomic(round_dir / "scores.log", generated.ledger);
  write_file_atomic(round_dir / "chains.jsonl", generated.chains);
  // Train on exactly what was persisted so a standalone train run is equivalent.
  out.dataset = load_dataset(dataset_path);

  PolicyParams next = policy;
  extend_policy(next, out.dataset);
  PolicyParams reference = pinned_reference != nullptr ? *pinned_reference : next;
  extend_policy(reference, out.dataset);

  const auto loss_cfg = cfg.loss_config();
  if (out.dataset.empty()) {
    std::clog << "round " << round << ": no preference pairs, policy carried over unchanged\n";
    out.policy = std::move(next);
  } else {
    auto trained = train_epochs(std::move(next), reference, out.dataset, loss_cfg,
                                derive_seed(metrics.round_seed, "train"));
    out.policy = std::move(trained.policy);
    metrics.epoch_loss = std::move(trained.epoch_loss);
  }
  write_file_atomic(round_dir / "loss.dat", format_loss_curve(metrics.epoch_loss));
  save_checkpoint(round_dir / "policy.ckpt", out.policy);

  metrics.records = out.dataset.size();
  std::size_t candidates = 0;
  double score_sum = 0.0;
  for (const auto& o : generated.outcomes) {
    metrics.skipped_hypotheses += o.skipped.size();
    for (const auto& set : o.scored_sets) {
      for (const auto& c : set.candidates) {
        score_sum += c.final_score();
        ++candidates;
      }
    }
  }
  metrics.mean_final_score = candidates ? score_sum / static_cast<double>(candidates) : 0.0;
  double margin_sum = 0.0;
  for (const auto& r : out.dataset) margin_sum += record_margin(r, loss_cfg);
  metrics.mean_margin = out.dataset.empty() ? 0.0 : margin_sum / static_cast<double>(out.dataset.size());
  metrics.policy_out = policy_digest(out.policy);
  write_file_atomic(round_dir / "metrics.json", format_metrics(metrics));
  return out;
}

namespace {

const char* const kRoundArtifacts[] = {"dataset.jsonl", "scores.log", "chains.jsonl", "loss.dat", "policy.ckpt",
                                       "metrics.json"};

std::string format_report(const RoundPlan& plan, const RunConfig& cfg, const std::vector<RoundMetrics>& rounds) {
  std::ostringstream out;
  out << "rounds " << plan.m << "  seed " << cfg.seed << "  T=" << cfg.timesteps << " k=" << cfg.pairs_per_step
      << " gamma=" << cfg.effective_gamma() << " beta=" << cfg.beta << " lambda=" << cfg.margin_scale
      << " tau=" << cfg.tau << " min_area=" << cfg.min_area << "\n";
  out << "ablations naive_dpo=" << cfg.ablations.naive_dpo << " no_iteration=" << cfg.ablations.no_iteration
      << " gamma_zero=" << cfg.ablations.gamma_zero << " single_evaluator=" << cfg.ablations.single_evaluator << "\n";
  for (const auto& m : rounds) {
    out << "round " << m.round << ": inputs=" << m.inputs.size() << " records=" << m.records
        << " skipped_hypotheses=" << m.skipped_hypotheses << " mean_s_final=" << format_significant(m.mean_final_score, 6)
        << " mean_margin=" << format_significant(m.mean_margin, 6) << " loss=[";
    for (std::size_t e = 0; e < m.epoch_loss.size(); ++e) out << (e ? " " : "") << format_significant(m.epoch_loss[e], 6);
    out << "] policy " << m.policy_in << " -> " << m.policy_out << "\n";
  }
  return out.str();
}

}  // namespace

RunReport run_all(const RoundPlan& plan, const PolicyParams& initial_policy, const FixtureSet& fixtures,
                  const RunConfig& cfg, std::size_t resume_from) {
  if (plan.subsets.size() != plan.m) throw StateError("round plan has mismatched subset count");
  if (resume_from > plan.m) {
    throw ConfigError("cannot resume from round " + std::to_string(resume_from) + " of " + std::to_string(plan.m));
  }
  RunReport report;
  PolicyParams policy = initial_policy;
  for (std::size_t i = 1; i <= resume_from; ++i) {
    const auto dir = plan.round_dir(i);
    report.rounds.push_back(parse_metrics(read_text_file(dir / "metrics.json"), (dir / "metrics.json").string()));
  }
  if (resume_from > 0) {
    policy = load_checkpoint(plan.round_dir(resume_from) / "policy.ckpt");
    if (policy_digest(policy) != report.rounds.back().policy_out) {
      throw DataError("checkpoint of round " + std::to_string(resume_from) + " does not match its metrics");
    }
  }
  const PolicyParams* pinned = cfg.pinned_reference ? &initial_policy : nullptr;
  for (std::size_t i = resume_from + 1; i <= plan.m; ++i) {
    try {
      auto outcome = run_round(i, plan.subsets[i - 1], policy, pinned, fixtures, cfg, plan.round_dir(i));
      policy = std::move(outcome.policy);
      report.rounds.push_back(std::move(outcome.metrics));
    } catch (const Error& e) {
      throw StageError("round " + std::to_string(i), "run " + plan.run_dir.string(), e);
    }
  }
  report.final_policy = std::move(policy);
  report.text = format_report(plan, cfg, report.rounds);
  write_file_atomic(plan.run_dir / "report.txt", report.text);

  ordered_json manifest;
  manifest["config_digest"] = config_digest(cfg);
  manifest["seed"] = cfg.seed;
  manifest["partition_seed"] = derive_seed(cfg.seed, "partition");
  manifest["rounds"] = json::array();
  for (const auto& m : report.rounds) {
    ordered_json r;
    r["round"] = m.round;
    r["inputs"] = m.inputs;
    r["round_seed"] = m.round_seed;
    r["policy_in"] = m.policy_in;
    r["policy_out"] = m.policy_out;
    manifest["rounds"].push_back(r);
  }
  ordered_json artifacts;
  for (std::size_t i = 1; i <= plan.m; ++i) {
    for (const char* name : kRoundArtifacts) {
      const auto rel = "round_" + std::to_string(i) + "/" + name;
      artifacts[rel] = file_checksum(plan.run_dir / rel);
    }
  }
  artifacts["report.txt"] = file_checksum(plan.run_dir / "report.txt");
  manifest["artifacts"] = artifacts;
  write_file_atomic(plan.run_dir / "manifest.json", manifest.dump(2) + "\n");
  return report;
}

std::vector<std::string> verify_manifest(const fs::path& run_dir) {
  const auto path = run_dir / "manifest.json";
  json manifest;
  try {
    manifest = json::parse(read_text_file(path));
  } catch (const json::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  }
  std::vector<std::string> bad;
  for (const auto& [rel, sum] : manifest.at("artifacts").items()) {
    std::string actual;
    try {
      actual = file_checksum(run_dir / rel);
    } catch (const DataError&) {
      actual = "<missing>";
    }
    if (actual != sum.get<std::string>()) bad.push_back(rel);
  }
  return bad;
}

}  // namespace regcot
