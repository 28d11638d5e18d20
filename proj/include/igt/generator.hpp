#pragma once

// Synthetic motif-shift benchmark: each graph is a label-irrelevant base
// (wheel, tree, ladder, star, path) joined by one bridge edge to a
// label-determining 5-node motif. Motif templates (local node ids 0..4):
//
//   house: square 0-1-2-3 with roof node 4 on edge 0-1      (6 edges)
//   cycle: ring 0-1-2-3-4                                     (5 edges)
//   crane: triangles 0-1-2 and 2-3-4 sharing node 2          (6 edges)

#include <cstdint>
#include <vector>

#include "igt/graph.hpp"

namespace igt {

enum class SplitKind { basis, size };

std::string to_string(SplitKind k);
SplitKind split_kind_from_string(const std::string& s);

struct SizeRange {
  std::size_t lo = 10;
  std::size_t hi = 30;  // inclusive
  bool operator==(const SizeRange&) const = default;
};

struct ShiftSpec {
  SplitKind split_kind = SplitKind::basis;
  double bias = 0.9;  // P(base index == label) in the training distribution
  SizeRange train_sizes{10, 30};
  SizeRange val_sizes{10, 30};
  SizeRange test_sizes{10, 30};
  std::size_t n_train = 3000;
  std::size_t n_val = 600;
  std::size_t n_test = 600;
  std::size_t feature_dim = 1;

  // Desk-scale defaults for the given split kind (size: test bases 40-60, unbiased).
  static ShiftSpec defaults(SplitKind kind);
  void validate() const;
  bool operator==(const ShiftSpec&) const = default;
};

struct Dataset {
  std::vector<Graph> train;
  std::vector<Graph> val;
  std::vector<Graph> test;
};

std::vector<Edge> base_edges(BaseType type, std::size_t n);
std::vector<Edge> motif_edges(MotifType type);
inline constexpr std::size_t kMotifNodes = 5;

// Training and validation graphs follow the biased distribution; test graphs
// draw the base type uniformly. Node ids are randomly relabeled.
Dataset generate_dataset(const ShiftSpec& spec, std::uint64_t seed);

// Deterministic per-item seed derivation (splitmix64 mixing).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0);

}  // namespace igt
