#pragma once

#include <Eigen/Dense>

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace regcot {

using ContextKey = std::string;

/// Stable digest of the prompt a response is drawn for: question tokens plus
/// the ordered ids of the preserved history.
ContextKey context_key(std::span<const int> question, std::span<const std::string> history_ids);

/// Softmax row over the candidate responses of one context. Ids are kept sorted.
struct PolicyRow {
  std::vector<std::string> ids;
  Eigen::VectorXd logits;

  Eigen::Index index_of(const std::string& id) const;  // -1 when absent
};

/// Tabular softmax policy. Also used, frozen, as the reference policy.
class PolicyParams {
 public:
  using Rows = std::map<ContextKey, PolicyRow>;

  const Rows& rows() const noexcept { return rows_; }
  bool empty() const noexcept { return rows_.empty(); }
  std::size_t entry_count() const noexcept;

  const PolicyRow& row(const ContextKey& key) const;  // LookupError when absent
  PolicyRow& mutable_row(const ContextKey& key);

  /// Adds the row or the missing ids with zero logits.
  void ensure(const ContextKey& key, std::span<const std::string> ids);

  double logit(const ContextKey& key, const std::string& id) const;
  void set_logit(const ContextKey& key, const std::string& id, double value);

  friend bool operator==(const PolicyParams& a, const PolicyParams& b);

 private:
  Rows rows_;
};

/// Numerically stable log(sum(exp(x))).
template <typename Derived>
typename Derived::Scalar log_sum_exp(const Eigen::DenseBase<Derived>& x) {
  using Scalar = typename Derived::Scalar;
  const Scalar peak = x.maxCoeff();
  return peak + std::log((x.derived().array() - peak).exp().sum());
}

template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> softmax(const Eigen::MatrixBase<Derived>& x) {
  const auto shifted = (x.array() - x.maxCoeff()).exp().eval();
  return (shifted / shifted.sum()).matrix();
}

/// log pi(response | context) = logit - logsumexp(row).
double log_prob(const PolicyParams& params, const ContextKey& key, const std::string& response_id);

/// Gradient of log_prob over the row: indicator(chosen) - softmax(row).
/// Entries outside the row are zero and not represented.
Eigen::VectorXd log_prob_grad(const PolicyParams& params, const ContextKey& key, const std::string& response_id);

/// Sparse gradient keyed by context; each vector is aligned with the row ids.
using PolicyGradient = std::map<ContextKey, Eigen::VectorXd>;

void accumulate(PolicyGradient& into, const ContextKey& key, const Eigen::VectorXd& grad, double scale);

/// params += step * gradient for every touched row.
void apply_update(PolicyParams& params, const PolicyGradient& gradient, double step);

// Checkpoint: "REGCOT-POLICY v1", entry count, then "context response logit"
// lines with 17 significant digits.
std::string format_checkpoint(const PolicyParams& params);
PolicyParams parse_checkpoint(const std::string& text, const std::string& source = "<memory>");
PolicyParams load_checkpoint(const std::filesystem::path& path);
void save_checkpoint(const std::filesystem::path& path, const PolicyParams& params);

/// Digest of the canonical checkpoint text.
std::string policy_digest(const PolicyParams& params);

}  // namespace regcot
