#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "igt/ops.hpp"

namespace igt {

using Edge = std::pair<std::uint32_t, std::uint32_t>;

enum class BaseType { wheel = 0, tree = 1, ladder = 2, star = 3, path = 4 };
enum class MotifType { house = 0, cycle = 1, crane = 2 };

inline constexpr std::size_t kNumBaseTypes = 5;
inline constexpr std::size_t kNumClasses = 3;

std::string to_string(BaseType b);
std::string to_string(MotifType m);
BaseType base_type_from_string(const std::string& s);
MotifType motif_type_from_string(const std::string& s);

struct GraphMeta {
  std::string id;
  BaseType base_type = BaseType::path;
  MotifType motif_type = MotifType::house;
  std::string split;

  bool operator==(const GraphMeta&) const = default;
};

// A labeled undirected graph. Row-major dense payloads keep the struct a
// plain value; tensors are built on demand by the model.
struct Graph {
  std::size_t n_nodes = 0;
  std::vector<Edge> edges;            // undirected, u != v, no duplicates
  std::size_t feature_dim = 0;
  std::vector<double> node_features;  // n_nodes x feature_dim
  std::size_t label = 0;
  std::vector<bool> invariant_edge_mask;  // parallel to edges
  std::size_t pse_dim = 0;                // 0 until precomputed
  std::vector<double> handcrafted_pse;    // n_nodes x pse_dim
  GraphMeta meta;

  bool has_pse() const noexcept { return pse_dim > 0; }
  Tensor features_tensor() const;
  Tensor pse_tensor() const;
  EdgeIndex edge_index() const;
  // Dense 0/1 adjacency [n x n].
  Tensor adjacency() const;

  // Throws ParseError / DimensionError describing the first violated invariant.
  void validate() const;

  bool operator==(const Graph&) const = default;
};

// Relabels nodes: new id of node v is perm[v]. Edge order and mask are kept.
Graph permute_nodes(const Graph& g, std::span<const std::uint32_t> perm);

bool is_connected(const Graph& g);

}  // namespace igt
