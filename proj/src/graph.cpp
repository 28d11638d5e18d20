#include "igt/graph.hpp"

#include <algorithm>
#include <set>

#include "igt/errors.hpp"

namespace igt {

namespace {
constexpr const char* kBaseNames[] = {"wheel", "tree", "ladder", "star", "path"};
constexpr const char* kMotifNames[] = {"house", "cycle", "crane"};
}  // namespace

std::string to_string(BaseType b) { return kBaseNames[static_cast<int>(b)]; }
std::string to_string(MotifType m) { return kMotifNames[static_cast<int>(m)]; }

BaseType base_type_from_string(const std::string& s) {
  for (int i = 0; i < 5; ++i) {
    if (s == kBaseNames[i]) return static_cast<BaseType>(i);
  }
  throw ParseError("unknown base type '" + s + "'");
}

MotifType motif_type_from_string(const std::string& s) {
  for (int i = 0; i < 3; ++i) {
    if (s == kMotifNames[i]) return static_cast<MotifType>(i);
  }
  throw ParseError("unknown motif type '" + s + "'");
}

Tensor Graph::features_tensor() const {
  return Tensor::from({n_nodes, feature_dim}, node_features);
}

Tensor Graph::pse_tensor() const {
  if (!has_pse()) throw UsageError("graph " + meta.id + " has no precomputed PSE");
  return Tensor::from({n_nodes, pse_dim}, handcrafted_pse);
}

EdgeIndex Graph::edge_index() const { return EdgeIndex::from_undirected(n_nodes, edges); }

Tensor Graph::adjacency() const {
  std::vector<double> a(n_nodes * n_nodes, 0.0);
  for (auto [u, v] : edges) {
    a[u * n_nodes + v] = 1.0;
    a[v * n_nodes + u] = 1.0;
  }
  return Tensor::from({n_nodes, n_nodes}, std::move(a));
}

void Graph::validate() const {
  if (n_nodes == 0) throw DimensionError("graph has no nodes");
  if (feature_dim == 0 || node_features.size() != n_nodes * feature_dim) {
    throw DimensionError("node_features size does not match n_nodes x feature_dim");
  }
  if (invariant_edge_mask.size() != edges.size()) {
    throw DimensionError("invariant_edge_mask length differs from edge count");
  }
  if (handcrafted_pse.size() != n_nodes * pse_dim) {
    throw DimensionError("handcrafted_pse size does not match n_nodes x pse_dim");
  }
  std::set<std::pair<std::uint32_t, std::uint32_t>> seen;
  for (auto [u, v] : edges) {
    if (u >= n_nodes || v >= n_nodes) throw DimensionError("edge endpoint out of range");
    if (u == v) throw DimensionError("self-loop at node " + std::to_string(u));
    if (!seen.insert({std::min(u, v), std::max(u, v)}).second) {
      throw DimensionError("duplicate edge " + std::to_string(u) + "-" + std::to_string(v));
    }
  }
}

Graph permute_nodes(const Graph& g, std::span<const std::uint32_t> perm) {
  if (perm.size() != g.n_nodes) throw DimensionError("permutation size mismatch");
  Graph out = g;
  for (auto& [u, v] : out.edges) {
    u = perm[u];
    v = perm[v];
  }
  for (std::size_t v = 0; v < g.n_nodes; ++v) {
    std::copy_n(g.node_features.begin() + v * g.feature_dim, g.feature_dim,
                out.node_features.begin() + perm[v] * g.feature_dim);
    if (g.pse_dim) {
      std::copy_n(g.handcrafted_pse.begin() + v * g.pse_dim, g.pse_dim,
                  out.handcrafted_pse.begin() + perm[v] * g.pse_dim);
    }
  }
  return out;
}

bool is_connected(const Graph& g) {
  if (g.n_nodes == 0) return false;
  std::vector<std::vector<std::uint32_t>> adj(g.n_nodes);
  for (auto [u, v] : g.edges) {
    adj[u].push_back(v);
    adj[v].push_back(u);
  }
  std::vector<bool> seen(g.n_nodes, false);
  std::vector<std::uint32_t> stack{0};
  seen[0] = true;
  std::size_t count = 1;
  while (!stack.empty()) {
    auto v = stack.back();
    stack.pop_back();
    for (auto w : adj[v]) {
      if (!seen[w]) {
        seen[w] = true;
        ++count;
        stack.push_back(w);
      }
    }
  }
  return count == g.n_nodes;
}

}  // namespace igt
