#include "regcot/commands.hpp"

#include "regcot/errors.hpp"
#include "regcot/fsio.hpp"
#include "regcot/orchestrator.hpp"
#include "regcot/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <random>
#include <set>

namespace regcot {

namespace fs = std::filesystem;

namespace {

PolicyParams initial_policy(const RunConfig& cfg) {
  return cfg.paths.initial_checkpoint.empty() ? PolicyParams{} : load_checkpoint(cfg.paths.initial_checkpoint);
}

fs::path output_dir(const RunConfig& cfg, const fs::path& override_dir) {
  if (!override_dir.empty()) return override_dir;
  if (cfg.paths.output_dir.empty()) throw ConfigError("no output directory given");
  return cfg.paths.output_dir;
}

}  // namespace

RegionsSummary cmd_regions(const RunConfig& cfg, const fs::path& image_path, const std::vector<fs::path>& heatmaps,
                           const fs::path& out_dir, std::ostream& out) {
  if (heatmaps.empty()) throw ConfigError("regions needs at least one heatmap");
  const auto image = read_grid(image_path);
  std::vector<ActivationMap> maps;
  std::set<std::string> ids;
  for (const auto& path : heatmaps) {
    ActivationMap map{path.stem().string(), read_grid(path)};
    if (!ids.insert(map.hypothesis_id).second) throw ConfigError("duplicate hypothesis '" + map.hypothesis_id + "'");
    maps.push_back(std::move(map));
  }
  const auto regions = propose_regions(image, maps, cfg.region_params());
  RegionsSummary summary;
  out << "hypothesis_id area\n";
  for (const auto& r : regions.regions) {
    write_file_atomic(out_dir / (r.hypothesis_id() + ".mask.txt"), format_mask(r.proposal.mask));
    summary.written.emplace_back(r.hypothesis_id(), static_cast<long>(r.proposal.component_area));
    out << r.hypothesis_id() << " " << r.proposal.component_area << "\n";
  }
  summary.skipped = regions.skipped;
  out << "skipped:";
  for (const auto& s : regions.skipped) out << " " << s;
  out << "\n";
  return summary;
}

PipelineSummary cmd_pipeline(const RunConfig& cfg, const fs::path& out_dir_override,
                             const std::vector<std::string>& input_ids, std::ostream& out) {
  const auto fixtures = FixtureSet::load(cfg);
  const auto ids = input_ids.empty() ? fixtures.input_ids() : input_ids;
  if (ids.empty()) throw ConfigError("input list is empty");
  const auto dir = output_dir(cfg, out_dir_override);
  const auto policy = initial_policy(cfg);
  const auto result = run_pipeline(ids, fixtures, cfg, 1, round_seed(cfg.seed, 1, policy_digest(policy)));
  PipelineSummary summary{result.records.size(), dir / "dataset.jsonl", dir / "scores.log", dir / "chains.jsonl"};
  save_dataset(summary.dataset, result.records);
  write_file_atomic(summary.ledger, result.ledger);
  write_file_atomic(summary.chains, result.chains);
  std::size_t skipped = 0;
  for (const auto& o : result.outcomes) skipped += o.skipped.size();
  out << "inputs " << ids.size() << "  records " << summary.records << "  skipped_hypotheses " << skipped << "\n"
      << "dataset " << summary.dataset.string() << "\n";
  return summary;
}

std::vector<double> cmd_train(const RunConfig& cfg, const fs::path& dataset_path,
                              const std::optional<fs::path>& checkpoint_in, const fs::path& checkpoint_out,
                              const fs::path& loss_out, std::ostream& out) {
  const auto dataset = load_dataset(dataset_path);
  PolicyParams policy = checkpoint_in ? load_checkpoint(*checkpoint_in) : PolicyParams{};
  extend_policy(policy, dataset);
  const PolicyParams reference = policy;
  auto trained = train_epochs(std::move(policy), reference, dataset, cfg.loss_config(), derive_seed(cfg.seed, "train"));
  save_checkpoint(checkpoint_out, trained.policy);
  write_file_atomic(loss_out, format_loss_curve(trained.epoch_loss));
  out << "records " << dataset.size() << "\n" << format_loss_curve(trained.epoch_loss);
  return trained.epoch_loss;
}

void cmd_iterate(const RunConfig& cfg, std::size_t resume_from, std::ostream& out) {
  const auto fixtures = FixtureSet::load(cfg);
  const auto plan = make_plan(cfg, fixtures);
  const auto report = run_all(plan, initial_policy(cfg), fixtures, cfg, resume_from);
  out << report.text;
}

namespace {

class Checklist {
 public:
  explicit Checklist(std::ostream& out) : out_(out) {}
  void check(const std::string& name, bool ok, const std::string& detail = {}) {
    out_ << (ok ? "PASS " : "FAIL ") << name;
    if (!ok && !detail.empty()) out_ << ": " << detail;
    out_ << "\n";
    all_ok_ = all_ok_ && ok;
  }
  bool ok() const { return all_ok_; }

 private:
  std::ostream& out_;
  bool all_ok_ = true;
};

// Components must be connected, pairwise disjoint, cover the 1-set and be
// maximal (no 4-neighbour of a component pixel is set outside it).
bool components_valid(const Mask& mask, const std::vector<Component>& comps) {
  const Eigen::Index w = mask.cols();
  std::vector<int> owner(static_cast<std::size_t>(mask.size()), -1);
  for (std::size_t k = 0; k < comps.size(); ++k) {
    for (auto p : comps[k].pixels) {
      if (!mask.data()[p] || owner[static_cast<std::size_t>(p)] != -1) return false;
      owner[static_cast<std::size_t>(p)] = static_cast<int>(k);
    }
  }
  for (Eigen::Index p = 0; p < mask.size(); ++p) {
    if (mask.data()[p] && owner[static_cast<std::size_t>(p)] == -1) return false;
  }
  for (Eigen::Index p = 0; p < mask.size(); ++p) {
    if (owner[static_cast<std::size_t>(p)] < 0) continue;
    const Eigen::Index r = p / w;
    const Eigen::Index c = p % w;
    if (c + 1 < w && owner[static_cast<std::size_t>(p + 1)] >= 0 &&
        owner[static_cast<std::size_t>(p + 1)] != owner[static_cast<std::size_t>(p)]) {
      return false;
    }
    if (r + 1 < mask.rows() && owner[static_cast<std::size_t>(p + w)] >= 0 &&
        owner[static_cast<std::size_t>(p + w)] != owner[static_cast<std::size_t>(p)]) {
      return false;
    }
  }
  for (const auto& comp : comps) {
    std::set<Eigen::Index> inside(comp.pixels.begin(), comp.pixels.end());
    std::set<Eigen::Index> reached{comp.pixels.front()};
    std::vector<Eigen::Index> frontier{comp.pixels.front()};
    while (!frontier.empty()) {
      const auto p = frontier.back();
      frontier.pop_back();
      for (Eigen::Index q : {p - w, p + w, p - 1, p + 1}) {
        const bool adjacent = (q == p - 1 || q == p + 1) ? (q / w == p / w) : true;
        if (q >= 0 && q < mask.size() && adjacent && inside.count(q) && reached.insert(q).second) frontier.push_back(q);
      }
    }
    if (reached.size() != inside.size()) return false;
  }
  return true;
}

}  // namespace

bool cmd_verify(const RunConfig& cfg, std::ostream& out) {
  Checklist list(out);
  const auto fixtures = FixtureSet::load(cfg);

  bool regions_ok = true;
  bool monotone_ok = true;
  bool idempotent_ok = true;
  for (const auto& id : fixtures.input_ids()) {
    const auto image = fixtures.load_image(id);
    for (const auto& h : fixtures.hypotheses()) {
      const auto map = fixtures.load_heatmap(id, h);
      const auto mask = threshold_map(map, cfg.tau);
      regions_ok = regions_ok && components_valid(mask, extract_components(mask));
      const double higher = std::min(0.999, cfg.tau + 0.1);
      monotone_ok = monotone_ok && ((threshold_map(map, higher) <= mask).all());
      try {
        const auto r = propose_region(image, map, cfg.region_params());
        const auto again = propose_region(r.masked_image, map, cfg.region_params());
        idempotent_ok = idempotent_ok && again.masked_image == r.masked_image;
      } catch (const NoRegionError&) {
      }
    }
  }
  list.check("components are maximal, connected, disjoint and covering", regions_ok);
  list.check("raising tau never grows the thresholded set", monotone_ok);
  list.check("masking is idempotent", idempotent_ok);

  const auto policy = initial_policy(cfg);
  const auto seed = round_seed(cfg.seed, 1, policy_digest(policy));
  const auto first = run_pipeline(fixtures.input_ids(), fixtures, cfg, 1, seed);
  const auto second = run_pipeline(fixtures.input_ids(), fixtures, cfg, 1, seed);
  list.check("pipeline replay is byte-identical",
             format_dataset(first.records) == format_dataset(second.records) && first.ledger == second.ledger &&
                 first.chains == second.chains);

  bool strict = true;
  bool bounded = true;
  bool forwarded = true;
  std::map<std::pair<std::string, std::size_t>, std::size_t> per_step;
  for (const auto& r : first.records) {
    strict = strict && r.winner.score > r.loser.score;
    ++per_step[{r.origin, r.timestep}];
  }
  for (const auto& [key, n] : per_step) bounded = bounded && n <= cfg.pairs_per_step;
  for (const auto& o : first.outcomes) {
    for (std::size_t t = 0; t < o.chain.steps.size(); ++t) {
      const auto it = std::find_if(o.records.begin(), o.records.end(), [&](const auto& r) { return r.timestep == t; });
      if (it != o.records.end()) forwarded = forwarded && it->winner.response_id == o.chain.steps[t].response.response_id;
    }
  }
  list.check("every record has s_w > s_l", strict);
  list.check("at most k pairs per (input, timestep)", bounded);
  list.check("first pair's winner is the forwarded chain step", forwarded);

  bool consensus_ok = true;
  for (const auto& o : first.outcomes) {
    for (const auto& set : o.scored_sets) {
      for (const auto& c : set.candidates) {
        const auto& b = *c.scores;
        const double mean = (b.s[0] + b.s[1]) / 2;
        consensus_ok = consensus_ok && consensus_weight(b.s[0], b.s[1]) == consensus_weight(b.s[1], b.s[0]) &&
                       consensus_weight(b.s[0], b.s[1]) <= mean && b.s[0] <= 1 + b.gamma && b.s[1] <= 1 + b.gamma;
      }
    }
  }
  list.check("consensus weighting is symmetric and bounded by the mean", consensus_ok);

  PolicyParams probe = policy;
  extend_policy(probe, first.records);
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (const auto& [key, row] : probe.rows()) {
    for (const auto& id : row.ids) probe.set_logit(key, id, normal(rng));
  }
  double worst_norm = 0.0;
  double worst_grad = 0.0;
  for (const auto& [key, row] : probe.rows()) {
    double total = 0.0;
    for (const auto& id : row.ids) total += std::exp(log_prob(probe, key, id));
    worst_norm = std::max(worst_norm, std::abs(total - 1.0));
    for (const auto& id : row.ids) {
      const auto analytic = log_prob_grad(probe, key, id);
      for (Eigen::Index j = 0; j < analytic.size(); ++j) {
        PolicyParams plus = probe;
        PolicyParams minus = probe;
        const double h = 1e-5;
        plus.mutable_row(key).logits(j) += h;
        minus.mutable_row(key).logits(j) -= h;
        const double fd = (log_prob(plus, key, id) - log_prob(minus, key, id)) / (2 * h);
        worst_grad = std::max(worst_grad, std::abs(fd - analytic(j)) / std::max(1.0, std::abs(fd)));
      }
    }
  }
  list.check("softmax rows sum to one", worst_norm <= 1e-12, "deviation " + format_significant(worst_norm, 3));
  list.check("log_prob_grad matches finite differences", worst_grad <= 1e-6, "error " + format_significant(worst_grad, 3));

  if (!cfg.paths.output_dir.empty() && fs::exists(cfg.paths.output_dir / "manifest.json")) {
    const auto bad = verify_manifest(cfg.paths.output_dir);
    list.check("manifest checksums match artifacts", bad.empty(), bad.empty() ? "" : bad.front());
  }
  return list.ok();
}

}  // namespace regcot
