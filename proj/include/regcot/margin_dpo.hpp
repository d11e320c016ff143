#pragma once

#include "regcot/digest.hpp"
#include "regcot/errors.hpp"
#include "regcot/pairs.hpp"
#include "regcot/policy.hpp"

#include <cmath>
#include <functional>
#include <span>
#include <vector>

namespace regcot {

struct LossConfig {
  double beta = 0.1;
  double margin_scale = 1.0;  // slope of g(s) = margin_scale * s
  double learning_rate = 1.0;
  int epochs = 3;
  int batch_size = 4;
  bool naive_dpo = false;  // forces the margin to zero
};

void validate(const LossConfig& cfg);

/// Policy and reference log-probabilities of one pair plus its score margin.
struct PairLogits {
  double lw = 0.0;
  double ll = 0.0;
  double lw_ref = 0.0;
  double ll_ref = 0.0;
  double delta_r = 0.0;
};

/// Where the winner and loser live in the policy table.
struct PairRef {
  ContextKey winner_key;
  std::string winner_id;
  ContextKey loser_key;
  std::string loser_id;
};

/// log(1 + exp(x)) without overflow.
template <typename Scalar>
Scalar softplus(Scalar x) {
  using std::abs;
  using std::exp;
  using std::log1p;
  using std::max;
  return max(x, Scalar(0)) + log1p(exp(-abs(x)));
}

template <typename Scalar>
Scalar sigmoid(Scalar x) {
  using std::exp;
  if (x >= Scalar(0)) return Scalar(1) / (Scalar(1) + exp(-x));
  const Scalar e = exp(x);
  return e / (Scalar(1) + e);
}

/// g(s_w) - g(s_l) with g(s) = margin_scale * s.
double margin(double s_w, double s_l, double margin_scale);

/// Implicit reward difference beta*log(pi/pi_ref)(y_w) - beta*log(pi/pi_ref)(y_l).
double reward_gap(const PairLogits& p, double beta);

/// Bradley-Terry DPO loss, -log sigmoid(reward gap). Ignores delta_r.
double dpo_loss(const PairLogits& p, double beta);

/// Margin-aware loss -log sigmoid(reward gap - delta_r), as softplus(-z).
double pair_loss(const PairLogits& p, double beta);

/// dLoss/dz = -sigmoid(-z).
double pair_loss_dz(const PairLogits& p, double beta);

PairLogits pair_logits(const PolicyParams& policy, const PolicyParams& reference, const PairRef& ref,
                       double delta_r);

/// Gradient of pair_loss over the policy rows of winner and loser.
/// The reference contributes nothing.
PolicyGradient pair_loss_grad(const PairLogits& p, double beta, const PolicyParams& policy, const PairRef& ref);

/// Monte-Carlo estimate of P(R_w - R_l > delta_r) for R ~ Gumbel(r, 1).
double gumbel_preference_prob_mc(double r_w, double r_l, double delta_r, long long samples, Seed seed);

/// Standard Gumbel(location, 1) draw from a uniform in (0,1).
inline double gumbel_from_uniform(double location, double u) { return location - std::log(-std::log(u)); }

struct TrainStep {
  int epoch = 0;
  std::size_t step = 0;
  std::span<const std::size_t> batch;
  double mean_loss = 0.0;  // before the update
  const PolicyParams* policy = nullptr;  // after the update
};

using StepCallback = std::function<void(const TrainStep&)>;

struct TrainResult {
  PolicyParams policy;
  std::vector<double> epoch_loss;
};

/// PairRef for a record: both members live in the record's context row.
PairRef pair_ref(const PreferenceRecord& record);
double record_margin(const PreferenceRecord& record, const LossConfig& cfg);

/// Mini-batch gradient descent over the dataset. The order is reshuffled each
/// epoch from `seed`; per-epoch loss is the mean of pre-update record losses.
TrainResult train_epochs(PolicyParams policy, const PolicyParams& reference,
                         std::span<const PreferenceRecord> dataset, const LossConfig& cfg, Seed seed,
                         const StepCallback& on_step = {});

/// Deterministic Fisher-Yates permutation of 0..n-1.
std::vector<std::size_t> seeded_permutation(std::size_t n, Seed seed);

/// "epoch mean_loss" lines.
std::string format_loss_curve(std::span<const double> epoch_loss);

}  // namespace regcot
