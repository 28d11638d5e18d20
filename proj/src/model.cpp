#include "igt/model.hpp"

#include "igt/errors.hpp"

namespace igt {

void ModelConfig::validate() const {
  if (d_in == 0 || d == 0 || heads == 0 || d_r == 0 || d_pse == 0 || k == 0 || classes < 2) {
    throw ConfigError("model widths must be positive and classes >= 2");
  }
  if (d % heads != 0) {
    throw ConfigError("width d=" + std::to_string(d) + " not divisible by heads=" +
                      std::to_string(heads));
  }
}

void to_json(nlohmann::json& j, const ModelConfig& c) {
  j = {{"d_in", c.d_in},     {"d", c.d},         {"heads", c.heads},
       {"backbone_layers", c.backbone_layers}, {"d_r", c.d_r}, {"d_pse", c.d_pse},
       {"k", c.k},           {"classes", c.classes}, {"use_pse", c.use_pse}};
}

void from_json(const nlohmann::json& j, ModelConfig& c) {
  c.d_in = j.value("d_in", c.d_in);
  c.d = j.value("d", c.d);
  c.heads = j.value("heads", c.heads);
  c.backbone_layers = j.value("backbone_layers", c.backbone_layers);
  c.d_r = j.value("d_r", c.d_r);
  c.d_pse = j.value("d_pse", c.d_pse);
  c.k = j.value("k", c.k);
  c.classes = j.value("classes", c.classes);
  c.use_pse = j.value("use_pse", c.use_pse);
}

PreparedGraph PreparedGraph::from(const Graph& g) {
  PreparedGraph p;
  p.graph = &g;
  p.x = g.features_tensor();
  p.index = g.edge_index();
  p.adjacency = g.adjacency();
  if (g.has_pse()) p.pse_target = g.pse_tensor();
  return p;
}

std::vector<PreparedGraph> prepare(const std::vector<Graph>& graphs) {
  std::vector<PreparedGraph> out;
  out.reserve(graphs.size());
  for (const auto& g : graphs) out.push_back(PreparedGraph::from(g));
  return out;
}

InvariantModel::InvariantModel(const ModelConfig& config, std::uint64_t seed) : config_(config) {
  config_.validate();
  std::mt19937_64 rng(seed);
  dis_ = DisentanglerParams::make(params_, config_.d_in, config_.d, config_.heads,
                                  config_.backbone_layers, rng);
  if (config_.use_pse) pse_ = PseEncoderParams::make(params_, config_.d_r, config_.d_pse, config_.k, rng);
  head_ = HeadParams::make(params_, config_.d, config_.use_pse ? config_.d_pse : 0, config_.heads,
                           config_.classes, rng);
}

GraphForward InvariantModel::forward(const PreparedGraph& g, const Tensor& x_random,
                                     double t) const {
  if (g.x.cols() != config_.d_in) {
    throw DimensionError("graph features have width " + std::to_string(g.x.cols()) +
                         ", model expects " + std::to_string(config_.d_in));
  }
  GraphForward f;
  f.dis = disentangle(g.x, g.index, g.adjacency, dis_, t);
  if (config_.use_pse) {
    f.pse_c = encode_subgraph(g.index, f.dis.w_c, x_random, pse_);
    f.pse_s = encode_subgraph(g.index, f.dis.w_s, x_random, pse_);
  }
  auto y = predict_branches(f.dis.z_c, f.pse_c, f.dis.z_s, f.pse_s, g.index, f.dis.w_c, f.dis.w_s,
                            head_);
  f.y_c = y.y_c;
  f.y_s = y.y_s;
  return f;
}

GraphForward InvariantModel::forward_eval(const PreparedGraph& g, double t) const {
  Tensor x;
  if (config_.use_pse) x = eval_random_features(g.graph->meta.id, g.graph->n_nodes, config_.d_r);
  return forward(g, x, t);
}

Tensor InvariantModel::attention_logits(const PreparedGraph& g) const {
  return complementary_attention(gt_backbone(g.x, g.index, dis_), dis_).e;
}

Tensor InvariantModel::pse_loss(const GraphForward& f, const PreparedGraph& g) const {
  if (!config_.use_pse) return Tensor::scalar(0.0);
  if (!g.pse_target.node()) {
    throw ConfigError("graph '" + g.graph->meta.id +
                      "' has no cached positional encodings; run `precompute-pse` first");
  }
  if (g.pse_target.cols() != config_.k) {
    throw ConfigError("cached positional encodings have width " +
                      std::to_string(g.pse_target.cols()) + ", model expects " +
                      std::to_string(config_.k));
  }
  return pse_recovery_loss(f.pse_c, f.pse_s, g.pse_target, pse_);
}

std::vector<Tensor> InvariantModel::disentangler_tensors() const {
  std::vector<Tensor> out;
  for (const auto& e : params_.entries()) {
    if (e.name.rfind("dis.", 0) == 0) out.push_back(e.value);
  }
  return out;
}

ErmModel::ErmModel(const ModelConfig& config, std::uint64_t seed) : config_(config) {
  config_.validate();
  std::mt19937_64 rng(seed);
  input_ = Linear::make(params_, "erm.input", config_.d_in, config_.d, rng);
  for (std::size_t l = 0; l <= config_.backbone_layers; ++l) {
    layers_.push_back(HybridLayer::make(params_, "erm.gt" + std::to_string(l), config_.d,
                                        config_.heads, rng));
  }
  classifier_ = Linear::make(params_, "erm.cls", config_.d, config_.classes, rng);
}

Tensor ErmModel::forward(const PreparedGraph& g) const {
  if (g.x.cols() != config_.d_in) {
    throw DimensionError("graph features have width " + std::to_string(g.x.cols()) +
                         ", model expects " + std::to_string(config_.d_in));
  }
  auto z = input_(g.x);
  const auto ones = unit_edge_weights(g.index);
  for (const auto& layer : layers_) z = layer(z, g.index, ones);
  auto logits = classifier_(reshape(mean_pool_rows(z), {1, z.cols()}));
  return reshape(logits, {logits.cols()});
}

}  // namespace igt
