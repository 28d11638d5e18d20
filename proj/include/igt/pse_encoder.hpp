#pragma once

#include <cstdint>
#include <random>
#include <string_view>

#include "igt/layers.hpp"

namespace igt {

// h_PSE: three propagation layers d_r -> d_pse -> d_pse -> d_pse, and the
// predictor w_PSE: d_pse -> k.
struct PseEncoderParams {
  std::vector<Tensor> layers;
  Linear predictor;

  static PseEncoderParams make(ParamSet& ps, std::size_t d_r, std::size_t d_pse, std::size_t k,
                               std::mt19937_64& rng);
  std::size_t input_width() const { return layers.front().rows(); }
  std::size_t width() const { return layers.back().cols(); }
};

// Standard normal node features [n x d_r].
Tensor random_features(std::size_t n, std::size_t d_r, std::mt19937_64& rng);
// Fixed per-graph seed used at evaluation (FNV-1a of the graph id).
std::uint64_t graph_seed(std::string_view graph_id);
Tensor eval_random_features(std::string_view graph_id, std::size_t n, std::size_t d_r);

// Encodes one evolving subgraph given on the edge pattern. The soft weights
// pass through a gradient barrier first, so nothing flows back to their source.
Tensor encode_subgraph(const EdgeIndex& index, const Tensor& soft_weights, const Tensor& x,
                       const PseEncoderParams& params);

// l1 recovery of the hand-crafted target from both branches:
//   mean_i |z - w(Z_c)_i|_1 + mean_i |z - w(Z_s)_i|_1
Tensor pse_recovery_loss(const Tensor& pse_c, const Tensor& pse_s, const Tensor& target,
                         const PseEncoderParams& params);

}  // namespace igt
