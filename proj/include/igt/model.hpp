#pragma once

#include <memory>
#include <random>

#include <nlohmann/json.hpp>

#include "igt/disentangler.hpp"
#include "igt/graph.hpp"
#include "igt/invariant_head.hpp"
#include "igt/pse_encoder.hpp"

namespace igt {

struct ModelConfig {
  std::size_t d_in = 1;
  std::size_t d = 32;
  std::size_t heads = 4;
  std::size_t backbone_layers = 2;
  std::size_t d_r = 16;
  std::size_t d_pse = 32;
  std::size_t k = 8;  // LapPE width
  std::size_t classes = kNumClasses;
  bool use_pse = true;

  void validate() const;
};

void to_json(nlohmann::json& j, const ModelConfig& c);
void from_json(const nlohmann::json& j, ModelConfig& c);

// Per-graph constants built once: features, edge pattern, dense adjacency, LapPE target.
struct PreparedGraph {
  const Graph* graph = nullptr;
  Tensor x;
  EdgeIndex index;
  Tensor adjacency;
  Tensor pse_target;  // empty when the graph has no cached PSE

  static PreparedGraph from(const Graph& g);
  std::size_t label() const { return graph->label; }
};
std::vector<PreparedGraph> prepare(const std::vector<Graph>& graphs);

struct GraphForward {
  DisentanglerOutput dis;
  Tensor pse_c, pse_s;  // empty without the encoder
  Tensor y_c, y_s;
};

class InvariantModel {
 public:
  InvariantModel(const ModelConfig& config, std::uint64_t seed);

  // `x_random` are the encoder's random features (ignored without the encoder).
  GraphForward forward(const PreparedGraph& g, const Tensor& x_random, double t = 1.0) const;
  // Evaluation forward with the per-graph fixed random features.
  GraphForward forward_eval(const PreparedGraph& g, double t = 1.0) const;
  // Attention logits E_G only (backbone + complementary attention).
  Tensor attention_logits(const PreparedGraph& g) const;
  Tensor pse_loss(const GraphForward& f, const PreparedGraph& g) const;

  const ModelConfig& config() const noexcept { return config_; }
  ParamSet& params() noexcept { return params_; }
  const ParamSet& params() const noexcept { return params_; }
  const DisentanglerParams& disentangler() const noexcept { return dis_; }
  const PseEncoderParams& encoder() const noexcept { return pse_; }
  const HeadParams& head() const noexcept { return head_; }
  // Disentangler parameters only (everything upstream of the encoder barrier).
  std::vector<Tensor> disentangler_tensors() const;

 private:
  ModelConfig config_;
  ParamSet params_;
  DisentanglerParams dis_;
  PseEncoderParams pse_;
  HeadParams head_;
};

// Plain graph transformer of matching depth: input projection, backbone
// layers, one extra hybrid layer, mean pooling, classifier.
class ErmModel {
 public:
  ErmModel(const ModelConfig& config, std::uint64_t seed);

  Tensor forward(const PreparedGraph& g) const;

  const ModelConfig& config() const noexcept { return config_; }
  ParamSet& params() noexcept { return params_; }
  const ParamSet& params() const noexcept { return params_; }

 private:
  ModelConfig config_;
  ParamSet params_;
  Linear input_;
  std::vector<HybridLayer> layers_;
  Linear classifier_;
};

}  // namespace igt
