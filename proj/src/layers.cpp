#include "igt/layers.hpp"

#include <cmath>

#include "igt/errors.hpp"

namespace igt {

Linear Linear::make(ParamSet& ps, const std::string& name, std::size_t in, std::size_t out,
                    std::mt19937_64& rng, bool bias) {
  Linear l;
  l.w = ps.add_weight(name + ".w", in, out, rng);
  if (bias) l.b = ps.add_constant(name + ".b", {out}, 0.0);
  return l;
}

Tensor Linear::operator()(const Tensor& x) const {
  auto y = matmul(x, w);
  return b.node() ? add_row(y, b) : y;
}

LayerNorm LayerNorm::make(ParamSet& ps, const std::string& name, std::size_t d) {
  LayerNorm n{ps.add_constant(name + ".gamma", {d}, 1.0), ps.add_constant(name + ".beta", {d}, 0.0)};
  return n;
}

MultiHeadAttention MultiHeadAttention::make(ParamSet& ps, const std::string& name, std::size_t d,
                                            std::size_t heads, std::mt19937_64& rng) {
  if (heads == 0 || d % heads != 0) {
    throw ConfigError("width " + std::to_string(d) + " is not divisible by " +
                      std::to_string(heads) + " heads");
  }
  const std::size_t dk = d / heads;
  MultiHeadAttention m;
  for (std::size_t h = 0; h < heads; ++h) {
    const auto p = name + ".h" + std::to_string(h);
    m.wq.push_back(ps.add_weight(p + ".wq", d, dk, rng));
    m.wk.push_back(ps.add_weight(p + ".wk", d, dk, rng));
    m.wv.push_back(ps.add_weight(p + ".wv", d, dk, rng));
  }
  m.wo = ps.add_weight(name + ".wo", d, d, rng);
  return m;
}

Tensor MultiHeadAttention::operator()(const Tensor& z) const {
  const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(wq[0].cols()));
  std::vector<Tensor> outs;
  outs.reserve(wq.size());
  for (std::size_t h = 0; h < wq.size(); ++h) {
    auto q = matmul(z, wq[h]);
    auto k = matmul(z, wk[h]);
    auto v = matmul(z, wv[h]);
    auto p = softmax_rows(scale(matmul(q, transpose(k)), inv_sqrt));
    outs.push_back(matmul(p, v));
  }
  return matmul(outs.size() == 1 ? outs[0] : concat_cols(outs), wo);
}

HybridLayer HybridLayer::make(ParamSet& ps, const std::string& name, std::size_t d,
                              std::size_t heads, std::mt19937_64& rng, Aggregation aggregation) {
  HybridLayer l;
  l.aggregation = aggregation;
  l.attn = MultiHeadAttention::make(ps, name + ".attn", d, heads, rng);
  l.w_mpnn = ps.add_weight(name + ".mpnn", d, d, rng);
  l.b_mpnn = ps.add_constant(name + ".mpnn_b", {d}, 0.0);
  l.norm1 = LayerNorm::make(ps, name + ".ln1", d);
  l.ff1 = Linear::make(ps, name + ".ff1", d, 2 * d, rng);
  l.ff2 = Linear::make(ps, name + ".ff2", 2 * d, d, rng);
  l.norm2 = LayerNorm::make(ps, name + ".ln2", d);
  return l;
}

Tensor HybridLayer::operator()(const Tensor& z, const EdgeIndex& index,
                               const Tensor& edge_weights) const {
  auto zw = matmul(z, w_mpnn);
  auto mp = relu(add_row(aggregation == Aggregation::sum ? sum_propagate(zw, index, edge_weights)
                                                          : gcn_propagate(zw, index, edge_weights),
                         b_mpnn));
  auto h = norm1(z + attn(z) + mp);
  return norm2(h + ff2(relu(ff1(h))));
}

Tensor unit_edge_weights(const EdgeIndex& index) {
  return Tensor::full({std::max<std::size_t>(index.nnz(), 1)}, index.nnz() ? 1.0 : 0.0);
}

}  // namespace igt
