#include "igt/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "igt/errors.hpp"

namespace igt {

double accuracy(std::span<const std::size_t> predictions, std::span<const std::size_t> labels) {
  if (predictions.size() != labels.size()) {
    throw DimensionError("accuracy: predictions and labels differ in length");
  }
  if (labels.empty()) return 0.0;
  std::size_t hit = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) hit += predictions[i] == labels[i];
  return static_cast<double>(hit) / static_cast<double>(labels.size());
}

std::vector<double> edge_scores(const Graph& g, const Tensor& mask) {
  if (mask.rank() != 2 || mask.rows() != g.n_nodes || mask.cols() != g.n_nodes) {
    throw DimensionError("edge_scores: mask " + shape_str(mask.shape()) + " for a graph of " +
                         std::to_string(g.n_nodes) + " nodes");
  }
  std::vector<double> s;
  s.reserve(g.edges.size());
  for (auto [u, v] : g.edges) s.push_back(0.5 * (mask.at(u, v) + mask.at(v, u)));
  return s;
}

double precision_at_k(std::span<const double> scores, const std::vector<bool>& invariant,
                      std::size_t k) {
  if (scores.size() != invariant.size()) {
    throw DimensionError("precision_at_k: scores and mask differ in length");
  }
  if (k == 0) throw UsageError("precision_at_k needs K >= 1");
  if (scores.empty()) return 0.0;
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  const std::size_t top = std::min(k, scores.size());
  std::size_t hit = 0;
  for (std::size_t i = 0; i < top; ++i) hit += invariant[order[i]];
  return static_cast<double>(hit) / static_cast<double>(top);
}

double random_precision_at_k(const std::vector<bool>& invariant) {
  if (invariant.empty()) return 0.0;
  const auto inv = std::count(invariant.begin(), invariant.end(), true);
  return static_cast<double>(inv) / static_cast<double>(invariant.size());
}

MeanStd mean_std(std::span<const double> values) {
  MeanStd r;
  if (values.empty()) return r;
  r.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0;
    for (double v : values) ss += (v - r.mean) * (v - r.mean);
    r.std = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return r;
}

}  // namespace igt
