#include "regcot/policy.hpp"

#include "regcot/digest.hpp"
#include "regcot/errors.hpp"
#include "regcot/fsio.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

namespace regcot {

ContextKey context_key(std::span<const int> question, std::span<const std::string> history_ids) {
  Fnv1a h;
  h.update(std::string_view("q"));
  for (int t : question) h.update(static_cast<std::uint64_t>(static_cast<std::uint32_t>(t)));
  h.separator().update(std::string_view("h"));
  for (const auto& id : history_ids) h.update(id).separator();
  return to_hex(h.value());
}

Eigen::Index PolicyRow::index_of(const std::string& id) const {
  auto it = std::lower_bound(ids.begin(), ids.end(), id);
  if (it == ids.end() || *it != id) return -1;
  return static_cast<Eigen::Index>(it - ids.begin());
}

std::size_t PolicyParams::entry_count() const noexcept {
  std::size_t n = 0;
  for (const auto& [key, row] : rows_) n += row.ids.size();
  return n;
}

const PolicyRow& PolicyParams::row(const ContextKey& key) const {
  auto it = rows_.find(key);
  if (it == rows_.end()) throw LookupError("no policy row for context " + key);
  return it->second;
}

PolicyRow& PolicyParams::mutable_row(const ContextKey& key) {
  auto it = rows_.find(key);
  if (it == rows_.end()) throw LookupError("no policy row for context " + key);
  return it->second;
}

void PolicyParams::ensure(const ContextKey& key, std::span<const std::string> ids) {
  PolicyRow& row = rows_[key];
  std::vector<std::string> merged = row.ids;
  merged.insert(merged.end(), ids.begin(), ids.end());
  std::sort(merged.begin(), merged.end());
  merged.erase(std::unique(merged.begin(), merged.end()), merged.end());
  if (merged.size() == row.ids.size()) return;
  Eigen::VectorXd logits = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(merged.size()));
  for (std::size_t i = 0; i < merged.size(); ++i) {
    const auto old = row.index_of(merged[i]);
    if (old >= 0) logits(static_cast<Eigen::Index>(i)) = row.logits(old);
  }
  row.ids = std::move(merged);
  row.logits = std::move(logits);
}

double PolicyParams::logit(const ContextKey& key, const std::string& id) const {
  const auto& r = row(key);
  const auto i = r.index_of(id);
  if (i < 0) throw LookupError("response '" + id + "' not in policy row " + key);
  return r.logits(i);
}

void PolicyParams::set_logit(const ContextKey& key, const std::string& id, double value) {
  if (!std::isfinite(value)) throw NumericError("non-finite logit for '" + id + "'");
  auto& r = mutable_row(key);
  const auto i = r.index_of(id);
  if (i < 0) throw LookupError("response '" + id + "' not in policy row " + key);
  r.logits(i) = value;
}

bool operator==(const PolicyParams& a, const PolicyParams& b) {
  if (a.rows_.size() != b.rows_.size()) return false;
  for (auto ia = a.rows_.begin(), ib = b.rows_.begin(); ia != a.rows_.end(); ++ia, ++ib) {
    if (ia->first != ib->first || ia->second.ids != ib->second.ids) return false;
    if ((ia->second.logits.array() != ib->second.logits.array()).any()) return false;
  }
  return true;
}

double log_prob(const PolicyParams& params, const ContextKey& key, const std::string& response_id) {
  const auto& r = params.row(key);
  const auto i = r.index_of(response_id);
  if (i < 0) throw LookupError("response '" + response_id + "' not in policy row " + key);
  return r.logits(i) - log_sum_exp(r.logits);
}

Eigen::VectorXd log_prob_grad(const PolicyParams& params, const ContextKey& key, const std::string& response_id) {
  const auto& r = params.row(key);
  const auto i = r.index_of(response_id);
  if (i < 0) throw LookupError("response '" + response_id + "' not in policy row " + key);
  Eigen::VectorXd grad = -softmax(r.logits);
  grad(i) += 1.0;
  return grad;
}

void accumulate(PolicyGradient& into, const ContextKey& key, const Eigen::VectorXd& grad, double scale) {
  auto it = into.find(key);
  if (it == into.end()) {
    into.emplace(key, scale * grad);
  } else {
    it->second += scale * grad;
  }
}

void apply_update(PolicyParams& params, const PolicyGradient& gradient, double step) {
  for (const auto& [key, grad] : gradient) {
    auto& row = params.mutable_row(key);
    if (row.logits.size() != grad.size()) throw StateError("gradient size mismatch for row " + key);
    row.logits += step * grad;
    if (!row.logits.allFinite()) throw NumericError("update produced non-finite logits in row " + key);
  }
}

std::string format_checkpoint(const PolicyParams& params) {
  std::string out = "REGCOT-POLICY v1\n" + std::to_string(params.entry_count()) + "\n";
  for (const auto& [key, row] : params.rows()) {
    for (std::size_t i = 0; i < row.ids.size(); ++i) {
      out += key + " " + row.ids[i] + " " + format_significant(row.logits(static_cast<Eigen::Index>(i)), 17) + "\n";
    }
  }
  return out;
}

PolicyParams parse_checkpoint(const std::string& text, const std::string& source) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != "REGCOT-POLICY v1") throw ParseError(source, 1, "bad checkpoint header");
  std::size_t expected = 0;
  if (!std::getline(in, line)) throw ParseError(source, 2, "missing entry count");
  {
    auto res = std::from_chars(line.data(), line.data() + line.size(), expected);
    if (res.ec != std::errc() || res.ptr != line.data() + line.size()) throw ParseError(source, 2, "bad entry count");
  }
  std::map<ContextKey, std::vector<std::pair<std::string, double>>> entries;
  std::size_t line_no = 2;
  std::size_t count = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string key;
    std::string id;
    std::string value;
    std::string extra;
    if (!(fields >> key >> id >> value) || (fields >> extra)) {
      throw ParseError(source, line_no, "expected \"context response logit\"");
    }
    double v = 0.0;
    auto res = std::from_chars(value.data(), value.data() + value.size(), v);
    if (res.ec != std::errc() || res.ptr != value.data() + value.size() || !std::isfinite(v)) {
      throw ParseError(source, line_no, "bad logit '" + value + "'");
    }
    entries[key].emplace_back(id, v);
    ++count;
  }
  if (count != expected) {
    throw ParseError(source, line_no, "entry count " + std::to_string(count) + " != header " + std::to_string(expected));
  }
  PolicyParams params;
  for (auto& [key, list] : entries) {
    std::vector<std::string> ids;
    for (const auto& [id, v] : list) ids.push_back(id);
    params.ensure(key, ids);
    if (params.row(key).ids.size() != list.size()) throw ParseError(source, line_no, "duplicate entry in row " + key);
    for (const auto& [id, v] : list) params.set_logit(key, id, v);
  }
  return params;
}

PolicyParams load_checkpoint(const std::filesystem::path& path) {
  return parse_checkpoint(read_text_file(path), path.string());
}

void save_checkpoint(const std::filesystem::path& path, const PolicyParams& params) {
  write_file_atomic(path, format_checkpoint(params));
}

std::string policy_digest(const PolicyParams& params) { return to_hex(fnv1a(format_checkpoint(params))); }

}  // namespace regcot
