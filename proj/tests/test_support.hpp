#pragma once

#include "regcot/chain.hpp"
#include "regcot/contracts.hpp"

#include <map>
#include <string>
#include <vector>

namespace regcot::testing {

/// Bank with hypotheses H0..H{n-1}, `timesteps` steps and `variants` variants each.
inline FixtureBank make_bank(int n = 6, int timesteps = 3, int variants = 3) {
  FixtureBank bank;
  for (int h = 0; h < n; ++h) {
    for (int t = 0; t < timesteps; ++t) {
      std::vector<ResponseText> vs;
      for (int v = 0; v < variants; ++v) {
        vs.push_back({"H" + std::to_string(h) + ".t" + std::to_string(t) + ".v" + std::to_string(v),
                      {h, t, v, 1 + (h * 7 + t * 3 + v) % 60}});
      }
      bank.add_generation("H" + std::to_string(h), static_cast<std::size_t>(t), std::move(vs));
    }
  }
  return bank;
}

/// Region covering the whole image for hypothesis H{index}.
inline HypothesisRegion full_region(std::size_t index, const ImageGrid& image) {
  return {index, {"H" + std::to_string(index), Mask::Ones(image.height(), image.width()), image, image.size()}};
}

inline std::vector<HypothesisRegion> full_regions(std::vector<std::size_t> indices, const ImageGrid& image) {
  std::vector<HypothesisRegion> out;
  for (auto i : indices) out.push_back(full_region(i, image));
  return out;
}

/// Evaluator returning fixed scores by response-id prefix (text before the first '.'),
/// or a constant default.
class PrefixEvaluator final : public Evaluator {
 public:
  PrefixEvaluator(std::string name, std::map<std::string, double> by_prefix, double fallback = 0.5)
      : name_(std::move(name)), by_prefix_(std::move(by_prefix)), fallback_(fallback) {}
  const std::string& name() const override { return name_; }
  double evaluate(const ResponseText& r, std::span<const ResponseText>) const override {
    auto it = by_prefix_.find(r.response_id.substr(0, r.response_id.find('.')));
    return it == by_prefix_.end() ? fallback_ : it->second;
  }

 private:
  std::string name_;
  std::map<std::string, double> by_prefix_;
  double fallback_;
};

/// Evaluator with a fixed score for each exact response id.
class TableEvaluator final : public Evaluator {
 public:
  TableEvaluator(std::string name, std::map<std::string, double> table, double fallback = 0.5)
      : name_(std::move(name)), table_(std::move(table)), fallback_(fallback) {}
  const std::string& name() const override { return name_; }
  double evaluate(const ResponseText& r, std::span<const ResponseText>) const override {
    auto it = table_.find(r.response_id);
    return it == table_.end() ? fallback_ : it->second;
  }

 private:
  std::string name_;
  std::map<std::string, double> table_;
  double fallback_;
};

/// Candidate set with the given final scores; candidate i is hypothesis i.
inline CandidateSet scored_set(const std::vector<double>& finals, std::size_t timestep = 0) {
  CandidateSet set;
  set.timestep = timestep;
  for (std::size_t i = 0; i < finals.size(); ++i) {
    CandidateResponse c;
    c.hypothesis_index = i;
    c.hypothesis_id = "H" + std::to_string(i);
    c.response = {"H" + std::to_string(i) + ".t" + std::to_string(timestep), {static_cast<Token>(i + 1)}};
    ScoreBreakdown b;
    b.s_final = finals[i];
    c.scores = b;
    set.candidates.push_back(c);
  }
  return set;
}

}  // namespace regcot::testing
