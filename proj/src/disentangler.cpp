#include "igt/disentangler.hpp"

#include <cmath>

namespace igt {

DisentanglerParams DisentanglerParams::make(ParamSet& ps, std::size_t d_in, std::size_t d,
                                            std::size_t heads, std::size_t layers,
                                            std::mt19937_64& rng) {
  DisentanglerParams p;
  p.input = Linear::make(ps, "dis.input", d_in, d, rng);
  for (std::size_t l = 0; l < layers; ++l) {
    p.layers.push_back(HybridLayer::make(ps, "dis.gt" + std::to_string(l), d, heads, rng));
  }
  p.wq = ps.add_weight("dis.wq", d, d, rng);
  p.wk = ps.add_weight("dis.wk", d, d, rng);
  p.wv = ps.add_weight("dis.wv", d, d, rng);
  p.w_mpnn = ps.add_weight("dis.mpnn", d, d, rng);
  p.mlp1 = Linear::make(ps, "dis.mlp1", d, d, rng);
  p.mlp2 = Linear::make(ps, "dis.mlp2", d, d, rng);
  return p;
}

Tensor gt_backbone(const Tensor& x, const EdgeIndex& index, const DisentanglerParams& params) {
  auto z = params.input(x);
  const auto ones = unit_edge_weights(index);
  for (const auto& layer : params.layers) z = layer(z, index, ones);
  return z;
}

ComplementaryAttention complementary_attention(const Tensor& z, const DisentanglerParams& params,
                                               double t) {
  ComplementaryAttention out;
  const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(params.wk.cols()));
  out.e = scale(matmul(matmul(z, params.wq), transpose(matmul(z, params.wk))), inv_sqrt);
  auto v = matmul(z, params.wv);
  out.p_c = softmax_rows(out.e, t);
  out.p_s = softmax_rows(neg(out.e), t);
  out.z_c = matmul(out.p_c, v);
  out.z_s = matmul(out.p_s, v);
  return out;
}

SoftMask soft_mask(const Tensor& e, const Tensor& adjacency) {
  SoftMask s;
  s.m = sigmoid(e);
  s.a_c = mul(s.m, adjacency);
  s.a_s = mul(add_scalar(neg(s.m), 1.0), adjacency);
  return s;
}

Tensor attention_guided_mpnn(const Tensor& z, const EdgeIndex& index, const Tensor& soft_weights,
                             const Tensor& w) {
  return relu(gcn_propagate(matmul(z, w), index, soft_weights));
}

Tensor fuse(const Tensor& z_attn, const Tensor& z_mpnn, const Linear& l1, const Linear& l2) {
  return l2(relu(l1(z_attn + z_mpnn)));
}

Tensor entropy_loss(const Tensor& e) { return mean(row_entropy(softmax_rows(e, 1.0))); }

Tensor entropy_loss(std::span<const Tensor> row_entropies) {
  std::vector<Tensor> per_graph;
  per_graph.reserve(row_entropies.size());
  for (const auto& h : row_entropies) per_graph.push_back(mean(h));
  return mean_n(per_graph);
}

DisentanglerOutput disentangle(const Tensor& x, const EdgeIndex& index, const Tensor& adjacency,
                               const DisentanglerParams& params, double t) {
  DisentanglerOutput out;
  out.z = gt_backbone(x, index, params);
  auto attn = complementary_attention(out.z, params, t);
  out.e = attn.e;
  auto mask = soft_mask(out.e, adjacency);
  out.m = mask.m;
  out.a_c = mask.a_c;
  out.a_s = mask.a_s;
  out.w_c = gather_entries(out.m, index);
  out.w_s = add_scalar(neg(out.w_c), 1.0);
  if (index.nnz() == 0) out.w_s = out.w_c;  // keep the zero placeholder
  auto mp_c = attention_guided_mpnn(out.z, index, out.w_c, params.w_mpnn);
  auto mp_s = attention_guided_mpnn(out.z, index, out.w_s, params.w_mpnn);
  out.z_c = fuse(attn.z_c, mp_c, params.mlp1, params.mlp2);
  out.z_s = fuse(attn.z_s, mp_s, params.mlp1, params.mlp2);
  out.row_entropies = row_entropy(t == 1.0 ? attn.p_c : softmax_rows(out.e, 1.0));
  return out;
}

}  // namespace igt
