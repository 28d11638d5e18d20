#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include "doctest.h"
#include "fixtures.hpp"
#include "gradcheck.hpp"
#include "suites.hpp"
#include "igt/disentangler.hpp"
#include "igt/errors.hpp"
#include "igt/invariant_head.hpp"
#include "igt/spectral.hpp"
#include "igt/training.hpp"

using namespace igt;
using igt::testing::Batch;
using igt::testing::make_batch;
using igt::testing::max_abs_diff;
using igt::testing::objective;
using igt::testing::small_config;
using igt::testing::permute_rows;
using igt::testing::random_graph;
using igt::testing::random_perm;
using igt::testing::random_tensor;

namespace {


double ce_oracle(std::span<const double> logits, std::size_t label) {
  double z = 0;
  for (double v : logits) z += std::exp(v);
  return std::log(z) - logits[label];
}

std::vector<double> combined(const Tensor& yc, const Tensor& ys) {
  std::vector<double> out;
  for (std::size_t k = 0; k < yc.numel(); ++k) out.push_back(yc.at(k) / (1 + std::exp(-ys.at(k))));
  return out;
}

std::vector<Tensor> random_logits(std::size_t b, std::mt19937_64& rng) {
  std::vector<Tensor> out;
  for (std::size_t i = 0; i < b; ++i) out.push_back(random_tensor({3}, rng, -3, 3));
  return out;
}

}  // namespace

TEST_CASE("branch_logits: a single node pools to itself") {
  std::mt19937_64 rng(1);
  ParamSet ps;
  auto head = HeadParams::make(ps, 8, 4, 2, 3, rng);
  auto g = random_graph(1, 1, 0, rng);
  auto index = g.edge_index();
  auto z = random_tensor({1, 8}, rng), pse = random_tensor({1, 4}, rng);
  auto w = unit_edge_weights(index);
  auto y = branch_logits(z, pse, index, w, head, head.cls_c);
  const Tensor parts[2] = {z, pse};
  auto h = head.gt(head.proj(concat_cols(parts)), index, w);
  auto expected = head.cls_c(h);
  CHECK(y.shape() == Shape{3});
  CHECK(max_abs_diff(y.data(), expected.data()) < 1e-14);
}

TEST_CASE("branch_logits: relabeling nodes leaves the logits unchanged") {
  std::mt19937_64 rng(2);
  ParamSet ps;
  auto head = HeadParams::make(ps, 8, 4, 2, 3, rng);
  auto g = random_graph(7, 1, 3, rng);
  auto perm = random_perm(7, rng);
  auto gp = permute_nodes(g, perm);
  auto z = random_tensor({7, 8}, rng), pse = random_tensor({7, 4}, rng);
  std::vector<double> per_edge(g.edges.size());
  std::uniform_real_distribution<double> unit(0, 1);
  for (auto& x : per_edge) x = unit(rng);
  std::vector<double> directed;
  for (double x : per_edge) directed.insert(directed.end(), {x, x});
  auto w = Tensor::from({directed.size()}, directed);
  auto y = branch_logits(z, pse, g.edge_index(), w, head, head.cls_s);
  auto yp = branch_logits(permute_rows(z, perm), permute_rows(pse, perm), gp.edge_index(), w, head,
                          head.cls_s);
  CHECK(max_abs_diff(y.data(), yp.data()) < 1e-9);
}

TEST_CASE("branch_logits: zero positional features keep the shape contract") {
  std::mt19937_64 rng(3);
  ParamSet ps;
  auto head = HeadParams::make(ps, 8, 4, 2, 3, rng);
  auto g = random_graph(5, 1, 2, rng);
  auto y = branch_logits(random_tensor({5, 8}, rng), Tensor::zeros({5, 4}), g.edge_index(),
                         unit_edge_weights(g.edge_index()), head, head.cls_c);
  CHECK(y.shape() == Shape{3});
}

TEST_CASE("combine_prediction: examples") {
  std::mt19937_64 rng(4);
  auto yc = random_tensor({3}, rng);
  auto half = combine_prediction(yc, Tensor::zeros({3}));
  for (std::size_t k = 0; k < 3; ++k) CHECK(half.at(k) == 0.5 * yc.at(k));
  auto sat = combine_prediction(yc, Tensor::full({3}, 800.0));
  for (std::size_t k = 0; k < 3; ++k) CHECK(sat.at(k) == yc.at(k));
  auto ys = random_tensor({3}, rng);
  auto y = combine_prediction(yc, ys);
  auto oracle = combined(yc, ys);
  for (std::size_t k = 0; k < 3; ++k) CHECK(y.at(k) == doctest::Approx(oracle[k]).epsilon(1e-15));
}

TEST_CASE("draw_interventions: identity first, permutations after") {
  std::mt19937_64 rng(5);
  auto perms = draw_interventions(6, 4, rng);
  REQUIRE(perms.size() == 4);
  std::vector<std::size_t> id(6);
  std::iota(id.begin(), id.end(), std::size_t{0});
  CHECK(perms[0] == id);
  for (const auto& p : perms) {
    CHECK(std::set<std::size_t>(p.begin(), p.end()).size() == 6);
    CHECK(*std::max_element(p.begin(), p.end()) == 5);
  }
  CHECK_THROWS_AS(draw_interventions(6, 0, rng), ConfigError);
}

TEST_CASE("intervention_loss: one intervention is the factual cross-entropy") {
  std::mt19937_64 rng(6);
  auto yc = random_logits(4, rng), ys = random_logits(4, rng);
  std::vector<std::size_t> labels{0, 1, 2, 1};
  auto perms = draw_interventions(4, 1, rng);
  auto l = intervention_loss(yc, ys, labels, 10.0, perms);
  double oracle = 0;
  for (std::size_t i = 0; i < 4; ++i) oracle += ce_oracle(combined(yc[i], ys[i]), labels[i]) / 4;
  CHECK(l.value.item() == doctest::Approx(oracle).epsilon(1e-13));
}

TEST_CASE("intervention_loss: identical graphs have no variance") {
  std::mt19937_64 rng(7);
  auto yc1 = random_tensor({3}, rng), ys1 = random_tensor({3}, rng);
  std::vector<Tensor> yc(5, yc1), ys(5, ys1);
  std::vector<std::size_t> labels(5, 2);
  auto perms = draw_interventions(5, 4, rng);
  auto with = intervention_loss(yc, ys, labels, 100.0, perms);
  auto without = intervention_loss(yc, ys, labels, 0.0, perms);
  CHECK(with.value.item() == doctest::Approx(without.value.item()).epsilon(1e-14));
}

TEST_CASE("intervention_loss: three interventions against an exhaustive recomputation") {
  std::mt19937_64 rng(8);
  auto yc = random_logits(4, rng), ys = random_logits(4, rng);
  std::vector<std::size_t> labels{2, 0, 1, 1};
  const double lambda = 3.5;
  auto perms = draw_interventions(4, 3, rng);
  auto l = intervention_loss(yc, ys, labels, lambda, perms);
  std::vector<double> lj;
  for (const auto& pi : perms) {
    double acc = 0;
    for (std::size_t i = 0; i < 4; ++i) acc += ce_oracle(combined(yc[i], ys[pi[i]]), labels[i]);
    lj.push_back(acc / 4);
  }
  const double mu = (lj[0] + lj[1] + lj[2]) / 3;
  double var = 0;
  for (double v : lj) var += (v - mu) * (v - mu) / 3;
  CHECK(l.value.item() == doctest::Approx(mu + lambda * var).epsilon(1e-13));
  for (std::size_t j = 0; j < 3; ++j) CHECK(l.per_intervention[j].item() == doctest::Approx(lj[j]).epsilon(1e-13));

  SUBCASE("lambda 0 is the plain mean") {
    CHECK(intervention_loss(yc, ys, labels, 0.0, perms).value.item() ==
          doctest::Approx(mu).epsilon(1e-13));
  }
  SUBCASE("intervention order does not matter") {
    auto reversed = perms;
    std::reverse(reversed.begin(), reversed.end());
    CHECK(intervention_loss(yc, ys, labels, lambda, reversed).value.item() ==
          doctest::Approx(l.value.item()).epsilon(1e-13));
  }
}

TEST_CASE("intervention_loss: a batch of one is a usage error") {
  std::mt19937_64 rng(9);
  auto yc = random_logits(1, rng), ys = random_logits(1, rng);
  std::vector<std::size_t> labels{0};
  std::vector<std::vector<std::size_t>> perms{{0}};
  CHECK_THROWS_AS(intervention_loss(yc, ys, labels, 1.0, perms), UsageError);
}

TEST_CASE("variant_branch_loss: examples") {
  std::vector<Tensor> uniform{Tensor::zeros({3}), Tensor::full({3}, 2.0)};
  std::vector<std::size_t> labels{0, 2};
  CHECK(variant_branch_loss(uniform, labels).item() == doctest::Approx(std::log(3.0)).epsilon(1e-15));
  std::vector<Tensor> sharp{Tensor::from({3}, {20, 0, 0}), Tensor::from({3}, {0, 0, 20})};
  CHECK(variant_branch_loss(sharp, labels).item() < 1e-6);
  std::mt19937_64 rng(10);
  auto ys = random_logits(5, rng);
  std::vector<std::size_t> l5{0, 1, 2, 0, 1};
  double oracle = 0;
  for (std::size_t i = 0; i < 5; ++i) oracle += ce_oracle(ys[i].data(), l5[i]) / 5;
  CHECK(variant_branch_loss(ys, l5).item() == doctest::Approx(oracle).epsilon(1e-13));
}

TEST_CASE("total_objective: examples") {
  InterventionLoss unit{Tensor::scalar(1.0), {Tensor::scalar(1.0)}};
  auto one = Tensor::scalar(1.0);
  auto b = total_objective(unit, one, one, one, ObjectiveWeights{});
  CHECK(b.total.item() == doctest::Approx(2.11).epsilon(1e-15));
  auto zero = total_objective(unit, Tensor::scalar(3.0), Tensor::scalar(4.0), Tensor::scalar(5.0),
                              ObjectiveWeights{0, 0, 0});
  CHECK(zero.total.item() == 1.0);

  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> dist(0, 3);
  ObjectiveWeights w{dist(rng), dist(rng), dist(rng)};
  InterventionLoss li{Tensor::scalar(dist(rng)), {}};
  auto r = total_objective(li, Tensor::scalar(dist(rng)), Tensor::scalar(dist(rng)),
                           Tensor::scalar(dist(rng)), w);
  const double rebuilt = r.l_i.item() + w.alpha_s * r.l_s.item() + w.alpha_e * r.l_e.item() +
                         w.alpha_pse * r.l_pse.item();
  CHECK(std::abs(r.total.item() - rebuilt) < 1e-12);
  CHECK_THROWS_AS((ObjectiveWeights{-1, 0, 0}.validate()), ConfigError);
  CHECK_THROWS_AS((ObjectiveWeights{0, 0, -0.01}.validate()), ConfigError);
}

TEST_CASE("argmax: ignores constant shifts") {
  std::mt19937_64 rng(12);
  for (int i = 0; i < 50; ++i) {
    auto y = random_tensor({3}, rng);
    CHECK(argmax(y) == argmax(add_scalar(y, 17.25)));
  }
}

TEST_CASE("full objective gradient matches central differences on a 2-graph batch") {
  auto r = igt::testing::objective_gradient_check();
  REQUIRE(r.rebuild_gap < 1e-12);
  REQUIRE(r.kink_margin > 1e-4);
  MESSAGE("worst relative error " << r.worst << " at " << r.worst_param);
  CHECK(r.worst < 1e-4);
}

TEST_CASE("all losses are invariant to relabeling the nodes of every graph") {
  std::mt19937_64 rng(14);
  auto cfg = small_config();
  InvariantModel model(cfg, 22);
  auto batch = make_batch(cfg, rng);
  Batch permuted = batch;
  for (std::size_t i = 0; i < batch.graphs.size(); ++i) {
    auto perm = random_perm(batch.graphs[i].n_nodes, rng);
    permuted.graphs[i] = permute_nodes(batch.graphs[i], perm);
    permuted.xr[i] = permute_rows(batch.xr[i], perm);
  }
  permuted.prepared = prepare(permuted.graphs);
  auto a = objective(model, batch), b = objective(model, permuted);
  CHECK(std::abs(a.l_i.item() - b.l_i.item()) < 1e-8);
  CHECK(std::abs(a.l_s.item() - b.l_s.item()) < 1e-8);
  CHECK(std::abs(a.l_e.item() - b.l_e.item()) < 1e-8);
  CHECK(std::abs(a.l_pse.item() - b.l_pse.item()) < 1e-8);
  CHECK(std::abs(a.total.item() - b.total.item()) < 1e-8);
}

TEST_CASE("evaluation forward at t = 1 reproduces the training forward") {
  std::mt19937_64 rng(15);
  auto cfg = small_config();
  InvariantModel model(cfg, 23);
  auto g = random_graph(7, 1, 3, rng);
  g.meta.id = "g7";
  auto pg = PreparedGraph::from(g);
  auto eval = model.forward_eval(pg, 1.0);
  auto train = model.forward(pg, eval_random_features("g7", 7, cfg.d_r), 1.0);
  CHECK(std::vector<double>(eval.y_c.data().begin(), eval.y_c.data().end()) ==
        std::vector<double>(train.y_c.data().begin(), train.y_c.data().end()));
}
