#pragma once

#include <random>
#include <vector>

#include "igt/layers.hpp"

namespace igt {

// GT' (one hybrid layer shared by both branches) plus the twin classifiers.
struct HeadParams {
  Linear proj;  // [d + d_pse] -> d
  HybridLayer gt;
  Linear cls_c, cls_s;

  static HeadParams make(ParamSet& ps, std::size_t d, std::size_t d_pse, std::size_t heads,
                         std::size_t classes, std::mt19937_64& rng);
};

struct BranchLogits {
  Tensor y_c, y_s;  // [C] each
};

// Logits of one branch: GT'([Z, Z_PSE]) over that branch's soft adjacency,
// mean pooling, classifier. An empty `pse` feeds Z alone.
Tensor branch_logits(const Tensor& z, const Tensor& pse, const EdgeIndex& index,
                     const Tensor& soft_weights, const HeadParams& params, const Linear& classifier);

BranchLogits predict_branches(const Tensor& z_c, const Tensor& pse_c, const Tensor& z_s,
                              const Tensor& pse_s, const EdgeIndex& index, const Tensor& w_c,
                              const Tensor& w_s, const HeadParams& params);

// y = y_c * sigmoid(y_s)
Tensor combine_prediction(const Tensor& y_c, const Tensor& y_s);

// m batch permutations; the first is the identity.
std::vector<std::vector<std::size_t>> draw_interventions(std::size_t batch, std::size_t m,
                                                         std::mt19937_64& rng);

struct InterventionLoss {
  Tensor value;                   // mean_j L_j + lambda * Var_j(L_j)
  std::vector<Tensor> per_intervention;
};

// L_j = mean_i CE(y_c,i * sigmoid(y_s,pi_j(i)), label_i).
InterventionLoss intervention_loss(std::span<const Tensor> y_c, std::span<const Tensor> y_s,
                                   std::span<const std::size_t> labels, double lambda,
                                   const std::vector<std::vector<std::size_t>>& perms);

// Mean cross-entropy of the variant-branch logits.
Tensor variant_branch_loss(std::span<const Tensor> y_s, std::span<const std::size_t> labels);

struct ObjectiveWeights {
  double alpha_s = 1.0;
  double alpha_e = 0.1;
  double alpha_pse = 0.01;

  void validate() const;
};

struct LossBreakdown {
  Tensor l_i, l_s, l_e, l_pse, total;
  std::vector<double> per_intervention;
};

// total = L_I + alpha_S L_S + alpha_E L_E + alpha_PSE L_PSE. Empty terms count as 0.
LossBreakdown total_objective(const InterventionLoss& l_i, const Tensor& l_s, const Tensor& l_e,
                              const Tensor& l_pse, const ObjectiveWeights& weights);

std::size_t argmax(const Tensor& logits);

}  // namespace igt
