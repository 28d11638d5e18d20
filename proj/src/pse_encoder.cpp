#include "igt/pse_encoder.hpp"

namespace igt {

PseEncoderParams PseEncoderParams::make(ParamSet& ps, std::size_t d_r, std::size_t d_pse,
                                        std::size_t k, std::mt19937_64& rng) {
  PseEncoderParams p;
  p.layers.push_back(ps.add_weight("pse.h0", d_r, d_pse, rng));
  p.layers.push_back(ps.add_weight("pse.h1", d_pse, d_pse, rng));
  p.layers.push_back(ps.add_weight("pse.h2", d_pse, d_pse, rng));
  p.predictor = Linear::make(ps, "pse.w", d_pse, k, rng);
  return p;
}

Tensor random_features(std::size_t n, std::size_t d_r, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<double> v(n * d_r);
  for (auto& x : v) x = gauss(rng);
  return Tensor::from({n, d_r}, std::move(v));
}

std::uint64_t graph_seed(std::string_view graph_id) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : graph_id) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

Tensor eval_random_features(std::string_view graph_id, std::size_t n, std::size_t d_r) {
  std::mt19937_64 rng(graph_seed(graph_id));
  return random_features(n, d_r, rng);
}

Tensor encode_subgraph(const EdgeIndex& index, const Tensor& soft_weights, const Tensor& x,
                       const PseEncoderParams& params) {
  const auto w = stop_gradient(soft_weights);
  auto h = x;
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    h = gcn_propagate(matmul(h, params.layers[l]), index, w);
    if (l + 1 < params.layers.size()) h = relu(h);
  }
  return h;
}

Tensor pse_recovery_loss(const Tensor& pse_c, const Tensor& pse_s, const Tensor& target,
                         const PseEncoderParams& params) {
  return abs_loss(params.predictor(pse_c), target) + abs_loss(params.predictor(pse_s), target);
}

}  // namespace igt
