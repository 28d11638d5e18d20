#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "igt/graph.hpp"

namespace igt::testing {

// Connected random graph: a random spanning tree plus `extra` chords, with
// uniform features in [-1, 1].
inline Graph random_graph(std::size_t n, std::size_t d_in, std::size_t extra, std::mt19937_64& rng,
                          std::size_t label = 0) {
  Graph g;
  g.n_nodes = n;
  g.feature_dim = d_in;
  g.label = label;
  g.meta.id = "rand" + std::to_string(rng() % 100000);
  for (std::uint32_t v = 1; v < n; ++v) {
    g.edges.push_back({static_cast<std::uint32_t>(rng() % v), v});
  }
  auto has = [&](std::uint32_t a, std::uint32_t b) {
    return std::any_of(g.edges.begin(), g.edges.end(), [&](const Edge& e) {
      return (e.first == a && e.second == b) || (e.first == b && e.second == a);
    });
  };
  for (std::size_t tries = 0; n > 2 && extra > 0 && tries < 100 * extra; ++tries) {
    auto a = static_cast<std::uint32_t>(rng() % n), b = static_cast<std::uint32_t>(rng() % n);
    if (a == b || has(a, b)) continue;
    g.edges.push_back({a, b});
    --extra;
  }
  g.invariant_edge_mask.assign(g.edges.size(), false);
  for (std::size_t i = 0; i < g.edges.size(); i += 2) g.invariant_edge_mask[i] = true;
  std::uniform_real_distribution<double> dist(-1, 1);
  g.node_features.resize(n * d_in);
  for (auto& x : g.node_features) x = dist(rng);
  return g;
}

inline std::vector<std::uint32_t> random_perm(std::size_t n, std::mt19937_64& rng) {
  std::vector<std::uint32_t> p(n);
  std::iota(p.begin(), p.end(), 0u);
  std::shuffle(p.begin(), p.end(), rng);
  return p;
}

// Rows of x [n x d] moved so that row v lands at perm[v].
inline Tensor permute_rows(const Tensor& x, std::span<const std::uint32_t> perm) {
  const auto n = x.rows(), d = x.cols();
  std::vector<double> out(n * d);
  for (std::size_t v = 0; v < n; ++v) {
    for (std::size_t c = 0; c < d; ++c) out[perm[v] * d + c] = x.at(v, c);
  }
  return Tensor::from({n, d}, std::move(out));
}

inline double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  double m = 0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace igt::testing
