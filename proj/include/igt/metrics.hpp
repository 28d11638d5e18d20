#pragma once

#include <span>
#include <vector>

#include "igt/graph.hpp"
#include "igt/ops.hpp"

namespace igt {

// Fraction of correct predictions; 0 for an empty split.
double accuracy(std::span<const std::size_t> predictions, std::span<const std::size_t> labels);

// Symmetrized mask score (M_uv + M_vu) / 2 of every undirected edge of g.
std::vector<double> edge_scores(const Graph& g, const Tensor& mask);

// Fraction of the K top-scored edges that are invariant. Ties go to the lower
// edge index; K larger than the edge count uses all edges.
double precision_at_k(std::span<const double> scores, const std::vector<bool>& invariant,
                      std::size_t k = 10);

// Expected precision_at_k under i.i.d. continuous random scores: the share of
// invariant edges.
double random_precision_at_k(const std::vector<bool>& invariant);

struct MeanStd {
  double mean = 0;
  double std = 0;  // sample standard deviation (n - 1)
};
MeanStd mean_std(std::span<const double> values);

}  // namespace igt
