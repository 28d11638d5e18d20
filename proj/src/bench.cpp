#include "igt/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <random>
#include <set>

#include "igt/errors.hpp"
#include "igt/layers.hpp"

namespace igt {

namespace {

double best_time(std::size_t reps, const std::function<void()>& run) {
  run();  // warm-up
  double best = INFINITY;
  for (std::size_t r = 0; r < std::max<std::size_t>(reps, 1); ++r) {
    const auto start = std::chrono::steady_clock::now();
    run();
    const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - start;
    best = std::min(best, dt.count());
  }
  return best;
}

Tensor random_input(std::size_t n, std::size_t d, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0, 1);
  std::vector<double> v(n * d);
  for (auto& x : v) x = gauss(rng);
  return Tensor::parameter({n, d}, std::move(v));
}

std::vector<std::pair<std::uint32_t, std::uint32_t>> ring(std::size_t n) {
  std::vector<std::pair<std::uint32_t, std::uint32_t>> e;
  for (std::size_t v = 0; v < n; ++v) {
    e.emplace_back(static_cast<std::uint32_t>(v), static_cast<std::uint32_t>((v + 1) % n));
  }
  return e;
}

}  // namespace

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw UsageError("loglog_slope needs at least two matching points");
  }
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= static_cast<double>(x.size());
  my /= static_cast<double>(x.size());
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

BenchPoint time_hybrid_layer(std::size_t n, std::size_t d, std::size_t heads, std::size_t reps,
                             std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  ParamSet ps;
  auto layer = HybridLayer::make(ps, "bench", d, heads, rng);
  auto edges = ring(n);
  auto index = EdgeIndex::from_undirected(n, edges);
  auto w = unit_edge_weights(index);
  auto z = random_input(n, d, rng);
  BenchPoint p{n, d, edges.size(), 0};
  p.seconds = best_time(reps, [&] {
    ps.zero_grad();
    sum(layer(z, index, w)).backward();
  });
  return p;
}

BenchPoint time_attention(std::size_t n, std::size_t d, std::size_t heads, std::size_t reps,
                          std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  ParamSet ps;
  auto attn = MultiHeadAttention::make(ps, "bench", d, heads, rng);
  auto z = random_input(n, d, rng);
  BenchPoint p{n, d, 0, 0};
  p.seconds = best_time(reps, [&] {
    ps.zero_grad();
    sum(attn(z)).backward();
  });
  return p;
}

BenchPoint time_message_passing(std::size_t n, std::size_t m, std::size_t d, std::size_t reps,
                                std::uint64_t seed) {
  if (n < 2 || m > n * (n - 1) / 2) throw ConfigError("edge count does not fit the node count");
  std::mt19937_64 rng(seed);
  std::set<std::pair<std::uint32_t, std::uint32_t>> chosen;
  std::uniform_int_distribution<std::uint32_t> node(0, static_cast<std::uint32_t>(n - 1));
  while (chosen.size() < m) {
    auto a = node(rng), b = node(rng);
    if (a == b) continue;
    chosen.emplace(std::min(a, b), std::max(a, b));
  }
  std::vector<std::pair<std::uint32_t, std::uint32_t>> edges(chosen.begin(), chosen.end());
  auto index = EdgeIndex::from_undirected(n, edges);
  auto w = Tensor::parameter({index.nnz()}, std::vector<double>(index.nnz(), 0.5));
  auto z = random_input(n, d, rng);
  BenchPoint p{n, d, m, 0};
  p.seconds = best_time(reps, [&] {
    z.zero_grad();
    w.zero_grad();
    sum(gcn_propagate(z, index, w)).backward();
  });
  return p;
}

BenchReport bench_complexity(const BenchOptions& o) {
  BenchReport r;
  std::vector<double> x, y;
  for (auto n : o.node_counts) {
    r.by_nodes.push_back(time_hybrid_layer(n, o.width, o.heads, o.repetitions, o.seed));
    x.push_back(static_cast<double>(n));
    y.push_back(r.by_nodes.back().seconds);
  }
  r.slope_nodes = loglog_slope(x, y);
  x.clear();
  y.clear();
  for (auto d : o.widths) {
    r.by_width.push_back(time_attention(o.width_nodes, d, o.heads, o.repetitions, o.seed));
    x.push_back(static_cast<double>(d));
    y.push_back(r.by_width.back().seconds);
  }
  r.slope_width = loglog_slope(x, y);
  x.clear();
  y.clear();
  for (auto m : o.edge_counts) {
    r.by_edges.push_back(time_message_passing(o.edge_nodes, m, o.width, o.repetitions, o.seed));
    x.push_back(static_cast<double>(m));
    y.push_back(r.by_edges.back().seconds);
  }
  r.slope_edges = loglog_slope(x, y);
  return r;
}

}  // namespace igt
