#pragma once

// Independent reference implementations used only by tests. None of these
// call into the code paths they check.

#include "regcot/grid.hpp"
#include "regcot/policy.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <random>
#include <vector>

namespace regcot::oracle {

/// Component labels by repeated min-label propagation until a fixed point.
/// Background pixels get -1; labels are the row-major index of the smallest
/// pixel in the component.
inline std::vector<long> propagate_labels(const std::vector<std::vector<int>>& grid) {
  const long h = static_cast<long>(grid.size());
  const long w = h ? static_cast<long>(grid[0].size()) : 0;
  std::vector<long> label(static_cast<std::size_t>(h * w), -1);
  for (long r = 0; r < h; ++r)
    for (long c = 0; c < w; ++c)
      if (grid[r][c]) label[r * w + c] = r * w + c;
  bool changed = true;
  while (changed) {
    changed = false;
    for (long r = 0; r < h; ++r) {
      for (long c = 0; c < w; ++c) {
        long& l = label[r * w + c];
        if (l < 0) continue;
        const long nb[4][2] = {{r - 1, c}, {r + 1, c}, {r, c - 1}, {r, c + 1}};
        for (const auto& n : nb) {
          if (n[0] < 0 || n[0] >= h || n[1] < 0 || n[1] >= w) continue;
          const long o = label[n[0] * w + n[1]];
          if (o >= 0 && o < l) {
            l = o;
            changed = true;
          }
        }
      }
    }
  }
  return label;
}

struct OracleComponent {
  long anchor;
  std::vector<long> pixels;
};

/// Components from propagate_labels, sorted by area descending then anchor.
inline std::vector<OracleComponent> components(const std::vector<std::vector<int>>& grid) {
  const auto label = propagate_labels(grid);
  std::map<long, std::vector<long>> groups;
  for (long p = 0; p < static_cast<long>(label.size()); ++p)
    if (label[p] >= 0) groups[label[p]].push_back(p);
  std::vector<OracleComponent> out;
  for (auto& [anchor, pixels] : groups) out.push_back({anchor, pixels});
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    if (a.pixels.size() != b.pixels.size()) return a.pixels.size() > b.pixels.size();
    return a.anchor < b.anchor;
  });
  return out;
}

inline std::vector<std::vector<int>> to_nested(const Mask& mask) {
  std::vector<std::vector<int>> g(mask.rows(), std::vector<int>(mask.cols()));
  for (Eigen::Index r = 0; r < mask.rows(); ++r)
    for (Eigen::Index c = 0; c < mask.cols(); ++c) g[r][c] = mask(r, c);
  return g;
}

/// Element-wise threshold by explicit loops.
inline std::vector<std::vector<int>> threshold(const ImageGrid& grid, double tau) {
  std::vector<std::vector<int>> g(grid.height(), std::vector<int>(grid.width()));
  for (Eigen::Index r = 0; r < grid.height(); ++r)
    for (Eigen::Index c = 0; c < grid.width(); ++c) g[r][c] = grid(r, c) >= tau ? 1 : 0;
  return g;
}

inline Mask random_mask(std::mt19937_64& rng, int max_side = 16) {
  std::uniform_int_distribution<int> side(1, max_side);
  std::uniform_real_distribution<double> density(0.1, 0.9);
  const int h = side(rng);
  const int w = side(rng);
  const double p = density(rng);
  std::bernoulli_distribution bit(p);
  Mask m(h, w);
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c) m(r, c) = bit(rng) ? 1 : 0;
  return m;
}

/// Direct softmax log-probability: logit - log(sum exp(logits)).
inline double naive_log_prob(const std::vector<double>& logits, std::size_t i) {
  double s = 0.0;
  for (double l : logits) s += std::exp(l);
  return logits[i] - std::log(s);
}

/// Textbook -log(sigmoid(z)) = log(1 + exp(-z)); fine for moderate z.
inline double naive_neg_log_sigmoid(double z) { return std::log1p(std::exp(-z)); }

/// Central finite differences of f over every entry of every row of `params`.
inline std::map<ContextKey, Eigen::VectorXd> finite_difference(
    const PolicyParams& params, const std::function<double(const PolicyParams&)>& f, double h = 1e-5) {
  std::map<ContextKey, Eigen::VectorXd> out;
  for (const auto& [key, row] : params.rows()) {
    Eigen::VectorXd g(row.logits.size());
    for (Eigen::Index j = 0; j < row.logits.size(); ++j) {
      PolicyParams plus = params;
      PolicyParams minus = params;
      plus.mutable_row(key).logits(j) += h;
      minus.mutable_row(key).logits(j) -= h;
      g(j) = (f(plus) - f(minus)) / (2 * h);
    }
    out.emplace(key, g);
  }
  return out;
}

/// ||a - b|| / max(||a|| + ||b||, floor) over the union of rows (missing rows are zero).
inline double relative_error(const std::map<ContextKey, Eigen::VectorXd>& a,
                             const std::map<ContextKey, Eigen::VectorXd>& b, double floor = 1e-10) {
  double diff = 0.0, na = 0.0, nb = 0.0;
  for (const auto& [key, va] : a) {
    na += va.squaredNorm();
    auto it = b.find(key);
    diff += it == b.end() ? va.squaredNorm() : (va - it->second).squaredNorm();
  }
  for (const auto& [key, vb] : b) {
    nb += vb.squaredNorm();
    if (!a.count(key)) diff += vb.squaredNorm();
  }
  return std::sqrt(diff) / std::max(std::sqrt(na) + std::sqrt(nb), floor);
}

}  // namespace regcot::oracle
