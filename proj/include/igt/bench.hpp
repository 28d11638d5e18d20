#pragma once

#include <cstdint>
#include <vector>

namespace igt {

struct BenchPoint {
  std::size_t nodes = 0;
  std::size_t width = 0;
  std::size_t edges = 0;  // undirected
  double seconds = 0;     // best of the repetitions, forward + backward
};

struct BenchOptions {
  std::vector<std::size_t> node_counts{128, 256, 512, 1024};  // dense hybrid layer vs |V|
  std::size_t width = 16;
  std::size_t heads = 4;
  // Attention alone vs d, with d > |V| so the d^2 projections dominate.
  std::vector<std::size_t> widths{256, 512, 1024};
  std::size_t width_nodes = 64;
  std::vector<std::size_t> edge_counts{8000, 16000, 32000, 64000};  // message passing vs |E|
  std::size_t edge_nodes = 1000;
  std::size_t repetitions = 3;
  std::uint64_t seed = 0;
};

struct BenchReport {
  std::vector<BenchPoint> by_nodes, by_width, by_edges;
  double slope_nodes = 0, slope_width = 0, slope_edges = 0;  // log-log least squares
};

// Least-squares slope of log(y) against log(x).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

// Forward + backward of one hybrid layer (dense multi-head attention plus
// sum message passing) on a ring of n nodes.
BenchPoint time_hybrid_layer(std::size_t n, std::size_t d, std::size_t heads, std::size_t reps,
                             std::uint64_t seed);
// Forward + backward of multi-head attention alone.
BenchPoint time_attention(std::size_t n, std::size_t d, std::size_t heads, std::size_t reps,
                          std::uint64_t seed);
// Forward + backward of one normalized propagation over m random edges.
BenchPoint time_message_passing(std::size_t n, std::size_t m, std::size_t d, std::size_t reps,
                                std::uint64_t seed);

BenchReport bench_complexity(const BenchOptions& options = {});

}  // namespace igt
