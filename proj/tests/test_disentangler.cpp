#include <cmath>
#include <random>

#include "doctest.h"
#include "fixtures.hpp"
#include "gradcheck.hpp"
#include "igt/disentangler.hpp"
#include "igt/errors.hpp"

using namespace igt;
using igt::testing::max_abs_diff;
using igt::testing::permute_rows;
using igt::testing::random_graph;
using igt::testing::random_perm;
using igt::testing::random_tensor;

namespace {

struct Fixture {
  ParamSet ps;
  DisentanglerParams params;
  Fixture(std::size_t d_in, std::size_t d, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    params = DisentanglerParams::make(ps, d_in, d, 4, 2, rng);
    // Nonzero biases and norm parameters so equivariance is not trivially helped.
    std::uniform_real_distribution<double> dist(-0.5, 0.5);
    for (const auto& e : ps.entries()) {
      if (e.value.rank() == 1) {
        auto t = e.value;
        for (auto& x : t.mutable_data()) x += dist(rng);
      }
    }
  }
};

std::vector<double> vec(const Tensor& t) { return {t.data().begin(), t.data().end()}; }

double dense_softmax_entry(std::span<const double> row, std::size_t j, double sign) {
  double z = 0;
  for (double v : row) z += std::exp(sign * v);
  return std::exp(sign * row[j]) / z;
}

}  // namespace

TEST_CASE("gt_backbone: single-node attention is the value projection") {
  std::mt19937_64 rng(1);
  ParamSet ps;
  auto mha = MultiHeadAttention::make(ps, "a", 8, 4, rng);
  auto z = random_tensor({1, 8}, rng);
  std::vector<Tensor> heads;
  for (std::size_t h = 0; h < 4; ++h) heads.push_back(matmul(z, mha.wv[h]));
  auto expected = matmul(concat_cols(heads), mha.wo);
  CHECK(max_abs_diff(mha(z).data(), expected.data()) < 1e-14);
}

TEST_CASE("gt_backbone: heads must divide the width") {
  std::mt19937_64 rng(1);
  ParamSet ps;
  CHECK_THROWS_AS(MultiHeadAttention::make(ps, "a", 10, 4, rng), ConfigError);
}

TEST_CASE("gt_backbone: relabeling nodes permutes the rows of Z") {
  std::mt19937_64 rng(11);
  Fixture f(3, 16, 5);
  for (int trial = 0; trial < 5; ++trial) {
    auto g = random_graph(6, 3, 3, rng);
    auto perm = random_perm(6, rng);
    auto gp = permute_nodes(g, perm);
    auto z = gt_backbone(g.features_tensor(), g.edge_index(), f.params);
    auto zp = gt_backbone(gp.features_tensor(), gp.edge_index(), f.params);
    CHECK(max_abs_diff(permute_rows(z, perm).data(), zp.data()) < 1e-9);
  }
}

TEST_CASE("gt_backbone: a zero MPNN weight leaves the attention and feedforward path") {
  std::mt19937_64 rng(3);
  ParamSet ps;
  auto layer = HybridLayer::make(ps, "l", 8, 2, rng);
  for (auto& x : layer.w_mpnn.mutable_data()) x = 0;
  auto g = random_graph(5, 8, 2, rng);
  auto z = g.features_tensor();
  auto h = layer.norm1(z + layer.attn(z));
  auto expected = layer.norm2(h + layer.ff2(relu(layer.ff1(h))));
  auto out = layer(z, g.edge_index(), unit_edge_weights(g.edge_index()));
  CHECK(max_abs_diff(out.data(), expected.data()) < 1e-14);
}

TEST_CASE("complementary_attention: constant logit rows give uniform, equal branches") {
  std::mt19937_64 rng(4);
  Fixture f(3, 8, 2);
  for (auto& x : f.params.wq.mutable_data()) x = 0;
  auto z = random_tensor({5, 8}, rng);
  auto a = complementary_attention(z, f.params);
  for (double p : a.p_c.data()) CHECK(p == doctest::Approx(0.2).epsilon(1e-15));
  CHECK(vec(a.p_c) == vec(a.p_s));
  CHECK(vec(a.z_c) == vec(a.z_s));
}

TEST_CASE("complementary_attention: the negated branch reverses every row ranking") {
  std::mt19937_64 rng(5);
  Fixture f(3, 8, 3);
  auto z = random_tensor({7, 8}, rng);
  auto a = complementary_attention(z, f.params);
  for (std::size_t r = 0; r < 7; ++r) {
    for (std::size_t i = 0; i < 7; ++i) {
      for (std::size_t j = 0; j < 7; ++j) {
        if (a.e.at(r, i) > a.e.at(r, j)) {
          CHECK(a.p_c.at(r, i) > a.p_c.at(r, j));
          CHECK(a.p_s.at(r, i) < a.p_s.at(r, j));
        }
      }
    }
  }
}

TEST_CASE("complementary_attention: logits [2, 0, -2] against direct evaluation") {
  const std::vector<double> row{2, 0, -2};
  auto e = Tensor::from({1, 3}, row);
  auto pc = softmax_rows(e);
  auto ps = softmax_rows(neg(e));
  for (std::size_t j = 0; j < 3; ++j) {
    CHECK(std::abs(pc.at(0, j) - dense_softmax_entry(row, j, 1)) < 1e-12);
    CHECK(std::abs(ps.at(0, j) - dense_softmax_entry(row, j, -1)) < 1e-12);
  }
}

TEST_CASE("complementary_attention: logits are scaled query-key products") {
  std::mt19937_64 rng(6);
  Fixture f(3, 8, 4);
  auto z = random_tensor({4, 8}, rng);
  auto a = complementary_attention(z, f.params);
  auto q = matmul(z, f.params.wq), k = matmul(z, f.params.wk);
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = 0; j < 4; ++j) {
      double dot = 0;
      for (std::size_t c = 0; c < 8; ++c) dot += q.at(i, c) * k.at(j, c);
      CHECK(a.e.at(i, j) == doctest::Approx(dot / std::sqrt(8.0)).epsilon(1e-13));
    }
  }
}

TEST_CASE("soft_mask: examples") {
  auto a = Tensor::from({3, 3}, {0, 1, 0, 1, 0, 1, 0, 1, 0});
  auto s = soft_mask(Tensor::zeros({3, 3}), a);
  for (double m : s.m.data()) CHECK(m == 0.5);
  for (std::size_t i = 0; i < 9; ++i) {
    CHECK(s.a_c.data()[i] == 0.5 * a.data()[i]);
    CHECK(s.a_s.data()[i] == 0.5 * a.data()[i]);
  }
  auto e = Tensor::from({3, 3}, {0, std::log(3.0), 0, 0, 0, 0, 0, 0, 0});
  auto s3 = soft_mask(e, a);
  CHECK(s3.a_c.at(0, 1) == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(s3.a_s.at(0, 1) == doctest::Approx(0.25).epsilon(1e-15));
}

TEST_CASE("soft_mask: branches add up to A exactly and vanish off the pattern") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    auto g = random_graph(9, 1, 4, rng);
    auto a = g.adjacency();
    auto e = random_tensor({9, 9}, rng, -30, 30);
    auto s = soft_mask(e, a);
    for (std::size_t i = 0; i < 81; ++i) {
      REQUIRE(s.a_c.data()[i] + s.a_s.data()[i] == a.data()[i]);
      if (a.data()[i] == 0) {
        REQUIRE(s.a_c.data()[i] == 0);
        REQUIRE(s.a_s.data()[i] == 0);
      }
    }
  }
}

TEST_CASE("attention_guided_mpnn: no soft edges leaves ReLU(ZW)") {
  std::mt19937_64 rng(8);
  auto g = random_graph(5, 4, 2, rng);
  auto index = g.edge_index();
  auto z = random_tensor({5, 4}, rng);
  auto w = random_tensor({4, 3}, rng);
  auto out = attention_guided_mpnn(z, index, Tensor::zeros({index.nnz()}), w);
  CHECK(max_abs_diff(out.data(), relu(matmul(z, w)).data()) < 1e-15);
}

TEST_CASE("attention_guided_mpnn: matches a dense normalized-adjacency oracle") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> unit(0, 1);
  for (double factor : {1.0, 2.0}) {
    auto g = random_graph(7, 3, 4, rng);
    auto index = g.edge_index();
    std::vector<double> w_soft(index.nnz());
    for (auto& x : w_soft) x = factor * unit(rng);
    auto z = random_tensor({7, 3}, rng);
    auto w = random_tensor({3, 3}, rng);
    auto out = attention_guided_mpnn(z, index, Tensor::from({index.nnz()}, w_soft), w);

    std::vector<double> ahat(49, 0.0), deg(7, 0.0);
    for (std::size_t i = 0; i < 7; ++i) ahat[i * 7 + i] = 1;
    for (std::size_t e = 0; e < index.nnz(); ++e) ahat[index.row[e] * 7 + index.col[e]] += w_soft[e];
    for (std::size_t i = 0; i < 7; ++i) {
      for (std::size_t j = 0; j < 7; ++j) deg[i] += ahat[i * 7 + j];
    }
    auto zw = matmul(z, w);
    for (std::size_t i = 0; i < 7; ++i) {
      for (std::size_t c = 0; c < 3; ++c) {
        double acc = 0;
        for (std::size_t j = 0; j < 7; ++j) {
          acc += ahat[i * 7 + j] / std::sqrt(deg[i] * deg[j]) * zw.at(j, c);
        }
        CHECK(out.at(i, c) == doctest::Approx(std::max(acc, 0.0)).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("attention_guided_mpnn: permutation equivariant") {
  std::mt19937_64 rng(10);
  auto g = random_graph(6, 3, 3, rng);
  auto perm = random_perm(6, rng);
  auto gp = permute_nodes(g, perm);
  std::uniform_real_distribution<double> unit(0, 1);
  // Same soft weight per undirected edge in both labelings.
  std::vector<double> per_edge(g.edges.size());
  for (auto& x : per_edge) x = unit(rng);
  auto directed = [&](const Graph& h) {
    std::vector<double> w;
    for (double x : per_edge) {
      w.push_back(x);
      w.push_back(x);
    }
    return Tensor::from({2 * h.edges.size()}, w);
  };
  auto z = random_tensor({6, 3}, rng);
  auto w = random_tensor({3, 3}, rng);
  auto out = attention_guided_mpnn(z, g.edge_index(), directed(g), w);
  auto outp = attention_guided_mpnn(permute_rows(z, perm), gp.edge_index(), directed(gp), w);
  CHECK(max_abs_diff(permute_rows(out, perm).data(), outp.data()) < 1e-9);
}

TEST_CASE("fuse: examples and gradient flow") {
  std::mt19937_64 rng(12);
  ParamSet ps;
  auto l1 = Linear::make(ps, "l1", 3, 3, rng);
  auto l2 = Linear::make(ps, "l2", 3, 3, rng);
  auto a = random_tensor({4, 3}, rng, 0, 1);
  auto b = random_tensor({4, 3}, rng, 0, 1);

  SUBCASE("identity layers pass the nonnegative sum through") {
    Linear i1{Tensor::from({3, 3}, {1, 0, 0, 0, 1, 0, 0, 0, 1}), Tensor::zeros({3})};
    Linear i2 = i1;
    CHECK(max_abs_diff(fuse(a, b, i1, i2).data(), (a + b).data()) < 1e-15);
  }
  SUBCASE("zero MPNN output reduces to the MLP of the attention output") {
    auto out = fuse(a, Tensor::zeros({4, 3}), l1, l2);
    CHECK(max_abs_diff(out.data(), l2(relu(l1(a))).data()) == 0);
  }
  SUBCASE("both branches receive gradient") {
    auto pa = Tensor::parameter({4, 3}, vec(a));
    auto pb = Tensor::parameter({4, 3}, vec(b));
    sum(fuse(pa, pb, l1, l2)).backward();
    double na = 0, nb = 0;
    for (double g : pa.grad()) na += std::abs(g);
    for (double g : pb.grad()) nb += std::abs(g);
    CHECK(na > 0);
    CHECK(nb > 0);
  }
}

TEST_CASE("entropy_loss: examples") {
  CHECK(entropy_loss(Tensor::full({5, 5}, 1.3)).item() == doctest::Approx(std::log(5.0)).epsilon(1e-14));
  auto sharp = Tensor::from({3, 3}, {20, 0, 0, 0, 25, 0, 0, 0, 30});
  CHECK(entropy_loss(sharp).item() < 1e-6);

  std::mt19937_64 rng(13);
  auto e = random_tensor({3, 3}, rng);
  double oracle = 0;
  for (std::size_t r = 0; r < 3; ++r) {
    std::vector<double> row{e.at(r, 0), e.at(r, 1), e.at(r, 2)};
    for (std::size_t j = 0; j < 3; ++j) {
      const double p = dense_softmax_entry(row, j, 1);
      oracle -= p * std::log(p);
    }
  }
  CHECK(entropy_loss(e).item() == doctest::Approx(oracle / 3).epsilon(1e-13));
}

TEST_CASE("entropy_loss: over a batch averages the per-graph means") {
  std::vector<Tensor> rows{Tensor::from({2}, {1.0, 3.0}), Tensor::from({4}, {0.0, 0.0, 0.0, 4.0})};
  CHECK(entropy_loss(rows).item() == doctest::Approx((2.0 + 1.0) / 2).epsilon(1e-15));
}

TEST_CASE("entropy_loss: widening one row's top margin lowers the loss") {
  std::mt19937_64 rng(14);
  auto e = random_tensor({4, 6}, rng);
  double prev = entropy_loss(e).item();
  for (int step = 0; step < 20; ++step) {
    std::vector<double> v = vec(e);
    std::size_t top = 0;
    for (std::size_t j = 1; j < 6; ++j) top = v[j] > v[top] ? j : top;
    v[top] += 0.25;
    e = Tensor::from({4, 6}, v);
    const double cur = entropy_loss(e).item();
    CHECK(cur < prev);
    prev = cur;
  }
}

TEST_CASE("softmax gap between the two branches collapses as the graph grows") {
  std::mt19937_64 rng(15);
  auto max_gap = [&](std::size_t n) {
    auto e = random_tensor({n, n}, rng, -1, 1);
    auto diff = softmax_rows(e) - softmax_rows(neg(e));
    double m = 0;
    for (double v : diff.data()) m = std::max(m, std::abs(v));
    return m;
  };
  const double small = max_gap(10), large = max_gap(1000);
  MESSAGE("gap n=10: " << small << ", n=1000: " << large);
  CHECK(large * 10 < small);
}

TEST_CASE("disentangle: output invariants on a random graph") {
  std::mt19937_64 rng(16);
  Fixture f(1, 16, 8);
  auto g = random_graph(8, 1, 4, rng);
  auto index = g.edge_index();
  auto a = g.adjacency();
  auto out = disentangle(g.features_tensor(), index, a, f.params);
  CHECK(out.z.shape() == Shape{8, 16});
  CHECK(out.z_c.shape() == Shape{8, 16});
  CHECK(out.z_s.shape() == Shape{8, 16});
  CHECK(out.row_entropies.shape() == Shape{8});
  for (std::size_t i = 0; i < 64; ++i) {
    CHECK(out.m.data()[i] == doctest::Approx(1.0 / (1.0 + std::exp(-out.e.data()[i]))).epsilon(1e-15));
    CHECK(out.a_c.data()[i] + out.a_s.data()[i] == a.data()[i]);
  }
  for (std::size_t k = 0; k < index.nnz(); ++k) {
    CHECK(out.w_c.at(k) == out.m.at(index.row[k], index.col[k]));
    CHECK(out.w_c.at(k) + out.w_s.at(k) == 1.0);
  }
  // Argmax of the invariant softmax is the argmin of the variant one.
  auto attn = complementary_attention(out.z, f.params);
  for (std::size_t r = 0; r < 8; ++r) {
    std::size_t amax = 0, amin = 0;
    for (std::size_t j = 1; j < 8; ++j) {
      if (attn.p_c.at(r, j) > attn.p_c.at(r, amax)) amax = j;
      if (attn.p_s.at(r, j) < attn.p_s.at(r, amin)) amin = j;
    }
    CHECK(amax == amin);
  }
}

TEST_CASE("disentangle: relabeling nodes permutes the mask") {
  std::mt19937_64 rng(17);
  Fixture f(1, 16, 9);
  auto g = random_graph(6, 1, 3, rng);
  auto perm = random_perm(6, rng);
  auto gp = permute_nodes(g, perm);
  auto out = disentangle(g.features_tensor(), g.edge_index(), g.adjacency(), f.params);
  auto outp = disentangle(gp.features_tensor(), gp.edge_index(), gp.adjacency(), f.params);
  for (std::size_t i = 0; i < 6; ++i) {
    for (std::size_t j = 0; j < 6; ++j) {
      CHECK(std::abs(out.m.at(i, j) - outp.m.at(perm[i], perm[j])) < 1e-9);
    }
  }
  CHECK(max_abs_diff(permute_rows(out.z_c, perm).data(), outp.z_c.data()) < 1e-9);
}
