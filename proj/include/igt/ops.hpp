#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "igt/tensor.hpp"

namespace igt {

// ---- linear algebra --------------------------------------------------------

Tensor matmul(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& a);
Tensor reshape(const Tensor& a, const Shape& shape);
Tensor concat_cols(std::span<const Tensor> parts);

// ---- elementwise -----------------------------------------------------------

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);  // Hadamard
// x[m x n] + bias[n], bias broadcast over rows.
Tensor add_row(const Tensor& x, const Tensor& bias);
Tensor scale(const Tensor& x, double factor);
Tensor add_scalar(const Tensor& x, double value);
Tensor neg(const Tensor& x);
Tensor sigmoid(const Tensor& x);
Tensor relu(const Tensor& x);

inline Tensor operator+(const Tensor& a, const Tensor& b) { return add(a, b); }
inline Tensor operator-(const Tensor& a, const Tensor& b) { return sub(a, b); }

// Same values, no gradient flows back through the result.
Tensor stop_gradient(const Tensor& x);

// ---- reductions ------------------------------------------------------------

Tensor sum(const Tensor& x);
Tensor mean(const Tensor& x);
// [n x d] -> [d]
Tensor mean_pool_rows(const Tensor& x);
Tensor add_n(std::span<const Tensor> scalars);
Tensor mean_n(std::span<const Tensor> scalars);
// Population variance of a set of scalars (divide by the set size).
Tensor variance_over_set(std::span<const Tensor> scalars);

// ---- probability -----------------------------------------------------------

// Row-wise softmax of x / t with max subtraction. Throws DomainError for t <= 0.
Tensor softmax_rows(const Tensor& x, double t = 1.0);
// Natural-log Shannon entropy of each row, 0 log 0 = 0. [m x n] -> [m].
Tensor row_entropy(const Tensor& p);
// -log softmax(logits)[label] for a single logit vector.
Tensor cross_entropy_logits(const Tensor& logits, std::size_t label);
// Mean over rows of the row-wise l1 distance sum_j |pred - target|.
// 1-D inputs count as a single row.
Tensor abs_loss(const Tensor& pred, const Tensor& target);

// ---- normalization ---------------------------------------------------------

// Per-row standardization followed by a learned scale and shift ([n]).
Tensor layer_norm_rows(const Tensor& x, const Tensor& gamma, const Tensor& beta,
                       double eps = 1e-5);

// ---- sparse message passing ------------------------------------------------

// Directed nonzero pattern of an n x n adjacency: entry e is (row[e], col[e]),
// i.e. node row[e] receives a message from node col[e].
struct EdgeIndex {
  std::size_t n = 0;
  std::vector<std::uint32_t> row;
  std::vector<std::uint32_t> col;

  std::size_t nnz() const noexcept { return row.size(); }
  // Both directions of each undirected edge, ordered as (u,v),(v,u) per edge.
  static EdgeIndex from_undirected(std::size_t n,
                                   std::span<const std::pair<std::uint32_t, std::uint32_t>> edges);
};

// Values of the dense matrix x[n x n] at the pattern's entries -> [nnz].
Tensor gather_entries(const Tensor& x, const EdgeIndex& index);

// Y = D^-1/2 (W + I) D^-1/2 Z where W holds `weights` on the pattern and D the
// row sums of W + I. Differentiable in both Z and weights. O(nnz * d).
Tensor gcn_propagate(const Tensor& z, const EdgeIndex& index, const Tensor& weights);

// Y = (W + I) Z without normalization (sum aggregation). O(nnz * d).
Tensor sum_propagate(const Tensor& z, const EdgeIndex& index, const Tensor& weights);

// Dense n x n matrix with `weights` scattered onto the pattern (zero elsewhere).
Tensor scatter_dense(const EdgeIndex& index, const Tensor& weights);

}  // namespace igt
