#pragma once

#include <random>
#include <string>
#include <vector>

#include "igt/ops.hpp"
#include "igt/params.hpp"

namespace igt {

// y = x W (+ b)
struct Linear {
  Tensor w;
  Tensor b;  // empty when bias-free

  static Linear make(ParamSet& ps, const std::string& name, std::size_t in, std::size_t out,
                     std::mt19937_64& rng, bool bias = true);
  Tensor operator()(const Tensor& x) const;
};

struct LayerNorm {
  Tensor gamma;
  Tensor beta;

  static LayerNorm make(ParamSet& ps, const std::string& name, std::size_t d);
  Tensor operator()(const Tensor& x) const {
    return layer_norm_rows(x, gamma, beta);
  }
};

// Multi-head dense self-attention over all node pairs. d_K = d / heads.
struct MultiHeadAttention {
  std::vector<Tensor> wq, wk, wv;  // one [d x d_K] matrix per head
  Tensor wo;                       // [d x d]

  static MultiHeadAttention make(ParamSet& ps, const std::string& name, std::size_t d,
                                 std::size_t heads, std::mt19937_64& rng);
  Tensor operator()(const Tensor& z) const;
  std::size_t heads() const noexcept { return wq.size(); }
};

enum class Aggregation { sum, normalized };

// GraphGPS-style hybrid layer:
//   h   = LN(z + MHA(z) + ReLU(P(A) z W))
//   out = LN(h + FFN(h))
// where P(A) aggregates over the (soft) edge weights plus a self loop, either
// summed or symmetric-normalized.
struct HybridLayer {
  Aggregation aggregation = Aggregation::sum;
  MultiHeadAttention attn;
  Tensor w_mpnn;  // [d x d]
  Tensor b_mpnn;  // [d]
  LayerNorm norm1, norm2;
  Linear ff1, ff2;

  static HybridLayer make(ParamSet& ps, const std::string& name, std::size_t d, std::size_t heads,
                          std::mt19937_64& rng, Aggregation aggregation = Aggregation::sum);
  Tensor operator()(const Tensor& z, const EdgeIndex& index, const Tensor& edge_weights) const;
};

// Unit weights on every directed entry of the pattern.
Tensor unit_edge_weights(const EdgeIndex& index);

}  // namespace igt
