#include "igt/invariant_head.hpp"

#include <algorithm>
#include <numeric>

#include "igt/errors.hpp"

namespace igt {

HeadParams HeadParams::make(ParamSet& ps, std::size_t d, std::size_t d_pse, std::size_t heads,
                            std::size_t classes, std::mt19937_64& rng) {
  HeadParams p;
  p.proj = Linear::make(ps, "head.proj", d + d_pse, d, rng);
  p.gt = HybridLayer::make(ps, "head.gt", d, heads, rng);
  p.cls_c = Linear::make(ps, "head.cls_c", d, classes, rng);
  p.cls_s = Linear::make(ps, "head.cls_s", d, classes, rng);
  return p;
}

Tensor branch_logits(const Tensor& z, const Tensor& pse, const EdgeIndex& index,
                     const Tensor& soft_weights, const HeadParams& params,
                     const Linear& classifier) {
  Tensor in = z;
  if (pse.node()) {
    const Tensor parts[2] = {z, pse};
    in = concat_cols(parts);
  }
  auto h = params.gt(params.proj(in), index, soft_weights);
  auto pooled = reshape(mean_pool_rows(h), {1, h.cols()});
  auto logits = classifier(pooled);
  return reshape(logits, {logits.cols()});
}

BranchLogits predict_branches(const Tensor& z_c, const Tensor& pse_c, const Tensor& z_s,
                              const Tensor& pse_s, const EdgeIndex& index, const Tensor& w_c,
                              const Tensor& w_s, const HeadParams& params) {
  return {branch_logits(z_c, pse_c, index, w_c, params, params.cls_c),
          branch_logits(z_s, pse_s, index, w_s, params, params.cls_s)};
}

Tensor combine_prediction(const Tensor& y_c, const Tensor& y_s) { return mul(y_c, sigmoid(y_s)); }

std::vector<std::vector<std::size_t>> draw_interventions(std::size_t batch, std::size_t m,
                                                         std::mt19937_64& rng) {
  if (m == 0) throw ConfigError("at least one intervention is required");
  std::vector<std::vector<std::size_t>> perms(m, std::vector<std::size_t>(batch));
  for (auto& p : perms) std::iota(p.begin(), p.end(), std::size_t{0});
  for (std::size_t j = 1; j < m; ++j) std::shuffle(perms[j].begin(), perms[j].end(), rng);
  return perms;
}

InterventionLoss intervention_loss(std::span<const Tensor> y_c, std::span<const Tensor> y_s,
                                   std::span<const std::size_t> labels, double lambda,
                                   const std::vector<std::vector<std::size_t>>& perms) {
  const auto b = y_c.size();
  if (b < 2) throw UsageError("intervention_loss needs a batch of at least 2 graphs");
  if (y_s.size() != b || labels.size() != b) {
    throw DimensionError("intervention_loss: batch components differ in length");
  }
  if (perms.empty()) throw ConfigError("at least one intervention is required");
  InterventionLoss out;
  for (const auto& pi : perms) {
    if (pi.size() != b) throw DimensionError("intervention_loss: permutation length mismatch");
    std::vector<Tensor> ce;
    ce.reserve(b);
    for (std::size_t i = 0; i < b; ++i) {
      ce.push_back(cross_entropy_logits(combine_prediction(y_c[i], y_s[pi[i]]), labels[i]));
    }
    out.per_intervention.push_back(mean_n(ce));
  }
  auto avg = mean_n(out.per_intervention);
  out.value = lambda == 0.0 ? avg : avg + scale(variance_over_set(out.per_intervention), lambda);
  return out;
}

Tensor variant_branch_loss(std::span<const Tensor> y_s, std::span<const std::size_t> labels) {
  if (y_s.size() != labels.size() || y_s.empty()) {
    throw DimensionError("variant_branch_loss: logits and labels differ in length");
  }
  std::vector<Tensor> ce;
  ce.reserve(y_s.size());
  for (std::size_t i = 0; i < y_s.size(); ++i) ce.push_back(cross_entropy_logits(y_s[i], labels[i]));
  return mean_n(ce);
}

void ObjectiveWeights::validate() const {
  if (alpha_s < 0 || alpha_e < 0 || alpha_pse < 0) {
    throw ConfigError("loss weights must be nonnegative");
  }
}

LossBreakdown total_objective(const InterventionLoss& l_i, const Tensor& l_s, const Tensor& l_e,
                              const Tensor& l_pse, const ObjectiveWeights& weights) {
  weights.validate();
  LossBreakdown out;
  out.l_i = l_i.value;
  out.l_s = l_s.node() ? l_s : Tensor::scalar(0.0);
  out.l_e = l_e.node() ? l_e : Tensor::scalar(0.0);
  out.l_pse = l_pse.node() ? l_pse : Tensor::scalar(0.0);
  for (const auto& l : l_i.per_intervention) out.per_intervention.push_back(l.item());
  std::vector<Tensor> terms{out.l_i};
  if (weights.alpha_s != 0) terms.push_back(scale(out.l_s, weights.alpha_s));
  if (weights.alpha_e != 0) terms.push_back(scale(out.l_e, weights.alpha_e));
  if (weights.alpha_pse != 0) terms.push_back(scale(out.l_pse, weights.alpha_pse));
  out.total = add_n(terms);
  return out;
}

std::size_t argmax(const Tensor& logits) {
  auto v = logits.data();
  return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

}  // namespace igt
