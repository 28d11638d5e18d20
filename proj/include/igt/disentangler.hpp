#pragma once

#include <random>
#include <string>
#include <vector>

#include "igt/layers.hpp"

namespace igt {

struct DisentanglerParams {
  Linear input;                      // d_in -> d
  std::vector<HybridLayer> layers;   // backbone GT^M
  Tensor wq, wk, wv;                 // single-head complementary attention, [d x d]
  Tensor w_mpnn;                     // attention-guided MPNN, shared by both branches
  Linear mlp1, mlp2;                 // fusion MLP, shared by both branches

  static DisentanglerParams make(ParamSet& ps, std::size_t d_in, std::size_t d, std::size_t heads,
                                 std::size_t layers, std::mt19937_64& rng);
  std::size_t width() const { return wq.rows(); }
};

struct DisentanglerOutput {
  Tensor z;               // backbone output [n x d]
  Tensor e;               // attention logits [n x n]
  Tensor m;               // sigmoid(e)
  Tensor a_c, a_s;        // dense soft adjacencies [n x n]
  Tensor w_c, w_s;        // the same soft adjacencies on the edge pattern [nnz]
  Tensor z_c, z_s;        // fused branch representations [n x d]
  Tensor row_entropies;   // entropy of each row of softmax(e) [n]
};

struct ComplementaryAttention {
  Tensor z_c, z_s;  // Softmax_t(E) Z W_V and Softmax_t(-E) Z W_V
  Tensor e;
  Tensor p_c, p_s;  // the two attention matrices
};

struct SoftMask {
  Tensor m, a_c, a_s;
};

// Input projection followed by the hybrid backbone layers over the unit adjacency.
Tensor gt_backbone(const Tensor& x, const EdgeIndex& index, const DisentanglerParams& params);

ComplementaryAttention complementary_attention(const Tensor& z, const DisentanglerParams& params,
                                               double t = 1.0);

// M = sigmoid(E), A_c = M * A, A_s = (1 - M) * A.
SoftMask soft_mask(const Tensor& e, const Tensor& adjacency);

// ReLU(D^-1/2 (A_soft + I) D^-1/2 Z W) with A_soft given on the edge pattern.
Tensor attention_guided_mpnn(const Tensor& z, const EdgeIndex& index, const Tensor& soft_weights,
                             const Tensor& w);

// MLP(z_attn + z_mpnn), two layers with ReLU between.
Tensor fuse(const Tensor& z_attn, const Tensor& z_mpnn, const Linear& l1, const Linear& l2);

// Mean row entropy of softmax(E); over several graphs, the mean of the per-graph values.
Tensor entropy_loss(const Tensor& e);
Tensor entropy_loss(std::span<const Tensor> row_entropies);

DisentanglerOutput disentangle(const Tensor& x, const EdgeIndex& index, const Tensor& adjacency,
                               const DisentanglerParams& params, double t = 1.0);

}  // namespace igt
