#include "regcot/margin_dpo.hpp"

#include "regcot/fsio.hpp"

#include <random>

namespace regcot {

void validate(const LossConfig& cfg) {
  if (!(cfg.beta > 0.0)) throw ConfigError("beta must be positive");
  if (!(cfg.margin_scale >= 0.0)) throw ConfigError("margin scale must be non-negative");
  if (!(cfg.learning_rate >= 0.0)) throw ConfigError("learning rate must be non-negative");
  if (cfg.epochs < 1) throw ConfigError("epochs must be positive");
  if (cfg.batch_size < 1) throw ConfigError("batch size must be positive");
}

double margin(double s_w, double s_l, double margin_scale) {
  if (!(s_w > s_l)) throw ContractViolation("margin requires s_w > s_l");
  return margin_scale * (s_w - s_l);
}

namespace {

void check_finite(const PairLogits& p) {
  if (!std::isfinite(p.lw) || !std::isfinite(p.ll) || !std::isfinite(p.lw_ref) || !std::isfinite(p.ll_ref) ||
      !std::isfinite(p.delta_r)) {
    throw NumericError("non-finite pair logits");
  }
}

double margin_argument(const PairLogits& p, double beta) {
  check_finite(p);
  return reward_gap(p, beta) - p.delta_r;
}

}  // namespace

double reward_gap(const PairLogits& p, double beta) { return beta * (p.lw - p.lw_ref) - beta * (p.ll - p.ll_ref); }

double dpo_loss(const PairLogits& p, double beta) {
  check_finite(p);
  const double r_w = beta * (p.lw - p.lw_ref);
  const double r_l = beta * (p.ll - p.ll_ref);
  return softplus(-(r_w - r_l));
}

double pair_loss(const PairLogits& p, double beta) { return softplus(-margin_argument(p, beta)); }

double pair_loss_dz(const PairLogits& p, double beta) { return -sigmoid(-margin_argument(p, beta)); }

PairLogits pair_logits(const PolicyParams& policy, const PolicyParams& reference, const PairRef& ref,
                       double delta_r) {
  return {log_prob(policy, ref.winner_key, ref.winner_id), log_prob(policy, ref.loser_key, ref.loser_id),
          log_prob(reference, ref.winner_key, ref.winner_id), log_prob(reference, ref.loser_key, ref.loser_id),
          delta_r};
}

PolicyGradient pair_loss_grad(const PairLogits& p, double beta, const PolicyParams& policy, const PairRef& ref) {
  const double dz = pair_loss_dz(p, beta);
  PolicyGradient grad;
  accumulate(grad, ref.winner_key, log_prob_grad(policy, ref.winner_key, ref.winner_id), dz * beta);
  accumulate(grad, ref.loser_key, log_prob_grad(policy, ref.loser_key, ref.loser_id), -dz * beta);
  return grad;
}

double gumbel_preference_prob_mc(double r_w, double r_l, double delta_r, long long samples, Seed seed) {
  if (samples < 10000) throw ConfigError("Gumbel Monte-Carlo needs at least 10^4 samples");
  std::mt19937_64 engine(seed);
  long long hits = 0;
  for (long long i = 0; i < samples; ++i) {
    const double rw = gumbel_from_uniform(r_w, open_unit(engine()));
    const double rl = gumbel_from_uniform(r_l, open_unit(engine()));
    if (rw - rl > delta_r) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(samples);
}

PairRef pair_ref(const PreferenceRecord& record) {
  return {record.context_key, record.winner.response_id, record.context_key, record.loser.response_id};
}

double record_margin(const PreferenceRecord& record, const LossConfig& cfg) {
  if (cfg.naive_dpo) return 0.0;
  return margin(record.winner.score, record.loser.score, cfg.margin_scale);
}

std::vector<std::size_t> seeded_permutation(std::size_t n, Seed seed) {
  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;
  std::uint64_t state = seed;
  for (std::size_t i = n; i > 1; --i) {
    state = splitmix64(state);
    const auto j = static_cast<std::size_t>(state % i);
    std::swap(perm[i - 1], perm[j]);
  }
  return perm;
}

TrainResult train_epochs(PolicyParams policy, const PolicyParams& reference,
                         std::span<const PreferenceRecord> dataset, const LossConfig& cfg, Seed seed,
                         const StepCallback& on_step) {
  validate(cfg);
  if (dataset.empty()) throw DataError("training dataset is empty");
  std::vector<PairRef> refs;
  std::vector<double> margins;
  refs.reserve(dataset.size());
  margins.reserve(dataset.size());
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const auto& rec = dataset[i];
    try {
      validate_record(rec);
      auto ref = pair_ref(rec);
      (void)pair_logits(policy, reference, ref, 0.0);
      refs.push_back(std::move(ref));
      margins.push_back(record_margin(rec, cfg));
    } catch (const Error& e) {
      throw DataError("record " + std::to_string(i) + " (" + rec.origin + " t=" + std::to_string(rec.timestep) +
                      "): " + e.what());
    }
  }

  TrainResult result;
  std::size_t step = 0;
  const auto batch_size = static_cast<std::size_t>(cfg.batch_size);
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const auto order = seeded_permutation(dataset.size(), derive_seed(seed, "epoch", std::to_string(epoch)));
    double epoch_sum = 0.0;
    for (std::size_t begin = 0; begin < order.size(); begin += batch_size) {
      const std::size_t end = std::min(order.size(), begin + batch_size);
      PolicyGradient grad;
      double batch_sum = 0.0;
      for (std::size_t b = begin; b < end; ++b) {
        const auto idx = order[b];
        const auto logits = pair_logits(policy, reference, refs[idx], margins[idx]);
        batch_sum += pair_loss(logits, cfg.beta);
        for (const auto& [key, g] : pair_loss_grad(logits, cfg.beta, policy, refs[idx])) accumulate(grad, key, g, 1.0);
      }
      const auto count = static_cast<double>(end - begin);
      apply_update(policy, grad, -cfg.learning_rate / count);
      epoch_sum += batch_sum;
      if (on_step) {
        on_step({epoch, step, std::span<const std::size_t>(order).subspan(begin, end - begin), batch_sum / count,
                 &policy});
      }
      ++step;
    }
    result.epoch_loss.push_back(epoch_sum / static_cast<double>(dataset.size()));
  }
  result.policy = std::move(policy);
  return result;
}

std::string format_loss_curve(std::span<const double> epoch_loss) {
  std::string out;
  for (std::size_t e = 0; e < epoch_loss.size(); ++e) {
    out += std::to_string(e + 1) + " " + format_significant(epoch_loss[e], 17) + "\n";
  }
  return out;
}

}  // namespace regcot
