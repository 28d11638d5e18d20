#include "igt/ops.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <limits>

#include "igt/errors.hpp"

namespace igt {

namespace {

using detail::Node;
using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMat = Eigen::Map<RowMat>;
using CMapMat = Eigen::Map<const RowMat>;

// Creates the result node. The backward closure receives the result node and
// reaches operands through node.parents in the order given here.
Tensor make_result(const Shape& shape, std::vector<double> values, std::vector<Tensor> operands,
                   std::function<void(Node&)> backward) {
  Tensor out = Tensor::from(shape, std::move(values));
  bool needs = false;
  if (!grad_enabled()) return out;
  for (const auto& op : operands) needs = needs || op.requires_grad();
  if (!needs) return out;
  auto& node = *out.node();
  node.requires_grad = true;
  node.is_leaf = false;
  node.parents.reserve(operands.size());
  for (const auto& op : operands) node.parents.push_back(op.node());
  node.backward = std::move(backward);
  return out;
}

// Gradient buffer of parent k, or nullptr when it does not take gradients.
double* parent_grad(Node& node, std::size_t k) {
  auto& p = *node.parents[k];
  return p.requires_grad ? p.ensure_grad().data() : nullptr;
}

void require_2d(const Tensor& t, const char* op) {
  if (t.rank() != 2) {
    throw DimensionError(std::string(op) + ": expected 2-D tensor, got " + shape_str(t.shape()));
  }
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw DimensionError(std::string(op) + ": shape mismatch " + shape_str(a.shape()) + " vs " +
                         shape_str(b.shape()));
  }
}

void require_scalar(const Tensor& t, const char* op) {
  if (t.numel() != 1) {
    throw DimensionError(std::string(op) + ": expected scalar, got " + shape_str(t.shape()));
  }
}

template <class F, class D>
Tensor unary(const Tensor& x, F f, D dfdx_from_xy) {
  auto xs = x.data();
  std::vector<double> y(xs.size());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = f(xs[i]);
  return make_result(x.shape(), std::move(y), {x}, [dfdx_from_xy](Node& self) {
    double* gx = parent_grad(self, 0);
    const auto& xv = self.parents[0]->data;
    for (std::size_t i = 0; i < self.grad.size(); ++i) {
      gx[i] += self.grad[i] * dfdx_from_xy(xv[i], self.data[i]);
    }
  });
}

}  // namespace

// ---- linear algebra --------------------------------------------------------

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_2d(a, "matmul");
  require_2d(b, "matmul");
  const auto m = a.rows(), k = a.cols(), n = b.cols();
  if (b.rows() != k) {
    throw DimensionError("matmul: inner dimensions disagree, " + shape_str(a.shape()) + " x " +
                         shape_str(b.shape()));
  }
  std::vector<double> out(m * n);
  MapMat(out.data(), m, n).noalias() =
      CMapMat(a.data().data(), m, k) * CMapMat(b.data().data(), k, n);
  return make_result({m, n}, std::move(out), {a, b}, [m, k, n](Node& self) {
    CMapMat g(self.grad.data(), m, n);
    const auto& av = self.parents[0]->data;
    const auto& bv = self.parents[1]->data;
    if (double* ga = parent_grad(self, 0)) {
      MapMat(ga, m, k).noalias() += g * CMapMat(bv.data(), k, n).transpose();
    }
    if (double* gb = parent_grad(self, 1)) {
      MapMat(gb, k, n).noalias() += CMapMat(av.data(), m, k).transpose() * g;
    }
  });
}

Tensor transpose(const Tensor& a) {
  require_2d(a, "transpose");
  const auto m = a.rows(), n = a.cols();
  std::vector<double> out(m * n);
  MapMat(out.data(), n, m) = CMapMat(a.data().data(), m, n).transpose();
  return make_result({n, m}, std::move(out), {a}, [m, n](Node& self) {
    MapMat(parent_grad(self, 0), m, n) += CMapMat(self.grad.data(), n, m).transpose();
  });
}

Tensor reshape(const Tensor& a, const Shape& shape) {
  if (shape_numel(shape) != a.numel()) {
    throw DimensionError("reshape: cannot view " + shape_str(a.shape()) + " as " +
                         shape_str(shape));
  }
  std::vector<double> out(a.data().begin(), a.data().end());
  return make_result(shape, std::move(out), {a}, [](Node& self) {
    double* g = parent_grad(self, 0);
    for (std::size_t i = 0; i < self.grad.size(); ++i) g[i] += self.grad[i];
  });
}

Tensor concat_cols(std::span<const Tensor> parts) {
  if (parts.empty()) throw DimensionError("concat_cols: no inputs");
  const auto rows = parts[0].rows();
  std::vector<std::size_t> widths;
  std::size_t total = 0;
  for (const auto& p : parts) {
    require_2d(p, "concat_cols");
    if (p.rows() != rows) {
      throw DimensionError("concat_cols: row mismatch " + shape_str(parts[0].shape()) + " vs " +
                           shape_str(p.shape()));
    }
    widths.push_back(p.cols());
    total += p.cols();
  }
  std::vector<double> out(rows * total);
  std::size_t offset = 0;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    auto src = parts[k].data();
    for (std::size_t r = 0; r < rows; ++r) {
      std::copy_n(src.data() + r * widths[k], widths[k], out.data() + r * total + offset);
    }
    offset += widths[k];
  }
  std::vector<Tensor> operands(parts.begin(), parts.end());
  return make_result({rows, total}, std::move(out), std::move(operands),
                     [rows, total, widths](Node& self) {
                       std::size_t off = 0;
                       for (std::size_t k = 0; k < widths.size(); ++k) {
                         if (double* g = parent_grad(self, k)) {
                           for (std::size_t r = 0; r < rows; ++r) {
                             for (std::size_t c = 0; c < widths[k]; ++c) {
                               g[r * widths[k] + c] += self.grad[r * total + off + c];
                             }
                           }
                         }
                         off += widths[k];
                       }
                     });
}

// ---- elementwise -----------------------------------------------------------

Tensor add(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "add");
  auto av = a.data(), bv = b.data();
  std::vector<double> out(av.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] + bv[i];
  return make_result(a.shape(), std::move(out), {a, b}, [](Node& self) {
    for (std::size_t k = 0; k < 2; ++k) {
      if (double* g = parent_grad(self, k)) {
        for (std::size_t i = 0; i < self.grad.size(); ++i) g[i] += self.grad[i];
      }
    }
  });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "sub");
  auto av = a.data(), bv = b.data();
  std::vector<double> out(av.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] - bv[i];
  return make_result(a.shape(), std::move(out), {a, b}, [](Node& self) {
    if (double* g = parent_grad(self, 0)) {
      for (std::size_t i = 0; i < self.grad.size(); ++i) g[i] += self.grad[i];
    }
    if (double* g = parent_grad(self, 1)) {
      for (std::size_t i = 0; i < self.grad.size(); ++i) g[i] -= self.grad[i];
    }
  });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "mul");
  auto av = a.data(), bv = b.data();
  std::vector<double> out(av.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] * bv[i];
  return make_result(a.shape(), std::move(out), {a, b}, [](Node& self) {
    const auto& av = self.parents[0]->data;
    const auto& bv = self.parents[1]->data;
    if (double* g = parent_grad(self, 0)) {
      for (std::size_t i = 0; i < self.grad.size(); ++i) g[i] += self.grad[i] * bv[i];
    }
    if (double* g = parent_grad(self, 1)) {
      for (std::size_t i = 0; i < self.grad.size(); ++i) g[i] += self.grad[i] * av[i];
    }
  });
}

Tensor add_row(const Tensor& x, const Tensor& bias) {
  require_2d(x, "add_row");
  const auto m = x.rows(), n = x.cols();
  if (bias.numel() != n || bias.rank() != 1) {
    throw DimensionError("add_row: bias " + shape_str(bias.shape()) + " does not match rows of " +
                         shape_str(x.shape()));
  }
  auto xv = x.data(), bv = bias.data();
  std::vector<double> out(m * n);
  for (std::size_t r = 0; r < m; ++r) {
    for (std::size_t c = 0; c < n; ++c) out[r * n + c] = xv[r * n + c] + bv[c];
  }
  return make_result(x.shape(), std::move(out), {x, bias}, [m, n](Node& self) {
    if (double* g = parent_grad(self, 0)) {
      for (std::size_t i = 0; i < self.grad.size(); ++i) g[i] += self.grad[i];
    }
    if (double* g = parent_grad(self, 1)) {
      for (std::size_t r = 0; r < m; ++r) {
        for (std::size_t c = 0; c < n; ++c) g[c] += self.grad[r * n + c];
      }
    }
  });
}

Tensor scale(const Tensor& x, double factor) {
  return unary(
      x, [factor](double v) { return v * factor; },
      [factor](double, double) { return factor; });
}

Tensor add_scalar(const Tensor& x, double value) {
  return unary(
      x, [value](double v) { return v + value; }, [](double, double) { return 1.0; });
}

Tensor neg(const Tensor& x) {
  return unary(
      x, [](double v) { return -v; }, [](double, double) { return -1.0; });
}

Tensor sigmoid(const Tensor& x) {
  return unary(
      x,
      [](double v) {
        if (v >= 0) return 1.0 / (1.0 + std::exp(-v));
        const double e = std::exp(v);
        return e / (1.0 + e);
      },
      [](double, double y) { return y * (1.0 - y); });
}

Tensor relu(const Tensor& x) {
  return unary(
      x, [](double v) { return v > 0 ? v : 0.0; },
      [](double v, double) { return v > 0 ? 1.0 : 0.0; });
}

Tensor stop_gradient(const Tensor& x) {
  std::vector<double> out(x.data().begin(), x.data().end());
  return Tensor::from(x.shape(), std::move(out));
}

// ---- reductions ------------------------------------------------------------

Tensor sum(const Tensor& x) {
  double s = 0;
  for (double v : x.data()) s += v;
  return make_result({}, {s}, {x}, [](Node& self) {
    double* g = parent_grad(self, 0);
    const auto n = self.parents[0]->data.size();
    for (std::size_t i = 0; i < n; ++i) g[i] += self.grad[0];
  });
}

Tensor mean(const Tensor& x) { return scale(sum(x), 1.0 / static_cast<double>(x.numel())); }

Tensor mean_pool_rows(const Tensor& x) {
  require_2d(x, "mean_pool_rows");
  const auto m = x.rows(), n = x.cols();
  auto xv = x.data();
  std::vector<double> out(n, 0.0);
  for (std::size_t r = 0; r < m; ++r) {
    for (std::size_t c = 0; c < n; ++c) out[c] += xv[r * n + c];
  }
  const double inv = 1.0 / static_cast<double>(m);
  for (auto& v : out) v *= inv;
  return make_result({n}, std::move(out), {x}, [m, n, inv](Node& self) {
    double* g = parent_grad(self, 0);
    for (std::size_t r = 0; r < m; ++r) {
      for (std::size_t c = 0; c < n; ++c) g[r * n + c] += self.grad[c] * inv;
    }
  });
}

Tensor add_n(std::span<const Tensor> scalars) {
  if (scalars.empty()) throw DimensionError("add_n: empty set");
  double s = 0;
  for (const auto& t : scalars) {
    require_scalar(t, "add_n");
    s += t.item();
  }
  std::vector<Tensor> operands(scalars.begin(), scalars.end());
  return make_result({}, {s}, std::move(operands), [](Node& self) {
    for (std::size_t k = 0; k < self.parents.size(); ++k) {
      if (double* g = parent_grad(self, k)) g[0] += self.grad[0];
    }
  });
}

Tensor mean_n(std::span<const Tensor> scalars) {
  return scale(add_n(scalars), 1.0 / static_cast<double>(scalars.size()));
}

Tensor variance_over_set(std::span<const Tensor> scalars) {
  if (scalars.empty()) throw DimensionError("variance_over_set: empty set");
  const double m = static_cast<double>(scalars.size());
  double mu = 0;
  for (const auto& t : scalars) {
    require_scalar(t, "variance_over_set");
    mu += t.item();
  }
  mu /= m;
  double var = 0;
  for (const auto& t : scalars) var += (t.item() - mu) * (t.item() - mu);
  var /= m;
  std::vector<Tensor> operands(scalars.begin(), scalars.end());
  return make_result({}, {var}, std::move(operands), [m, mu](Node& self) {
    for (std::size_t k = 0; k < self.parents.size(); ++k) {
      if (double* g = parent_grad(self, k)) {
        g[0] += self.grad[0] * 2.0 / m * (self.parents[k]->data[0] - mu);
      }
    }
  });
}

// ---- probability -----------------------------------------------------------

Tensor softmax_rows(const Tensor& x, double t) {
  if (!(t > 0)) throw DomainError("softmax_rows: temperature must be positive, got " + std::to_string(t));
  require_2d(x, "softmax_rows");
  const auto m = x.rows(), n = x.cols();
  auto xv = x.data();
  std::vector<double> out(m * n);
  for (std::size_t r = 0; r < m; ++r) {
    const double* row = xv.data() + r * n;
    double* o = out.data() + r * n;
    const double mx = *std::max_element(row, row + n);
    double z = 0;
    for (std::size_t c = 0; c < n; ++c) {
      o[c] = std::exp((row[c] - mx) / t);
      z += o[c];
    }
    for (std::size_t c = 0; c < n; ++c) o[c] /= z;
  }
  return make_result(x.shape(), std::move(out), {x}, [m, n, t](Node& self) {
    double* g = parent_grad(self, 0);
    for (std::size_t r = 0; r < m; ++r) {
      const double* p = self.data.data() + r * n;
      const double* gy = self.grad.data() + r * n;
      double dot = 0;
      for (std::size_t c = 0; c < n; ++c) dot += gy[c] * p[c];
      for (std::size_t c = 0; c < n; ++c) g[r * n + c] += p[c] * (gy[c] - dot) / t;
    }
  });
}

Tensor row_entropy(const Tensor& p) {
  require_2d(p, "row_entropy");
  const auto m = p.rows(), n = p.cols();
  auto pv = p.data();
  std::vector<double> out(m, 0.0);
  for (std::size_t r = 0; r < m; ++r) {
    for (std::size_t c = 0; c < n; ++c) {
      const double v = pv[r * n + c];
      if (v < -1e-9) {
        throw DomainError("row_entropy: negative probability " + std::to_string(v) + " at (" +
                          std::to_string(r) + "," + std::to_string(c) + ")");
      }
      if (v > 0) out[r] -= v * std::log(v);
    }
  }
  return make_result({m}, std::move(out), {p}, [m, n](Node& self) {
    double* g = parent_grad(self, 0);
    const auto& pv = self.parents[0]->data;
    for (std::size_t r = 0; r < m; ++r) {
      for (std::size_t c = 0; c < n; ++c) {
        const double v = pv[r * n + c];
        if (v > 0) g[r * n + c] -= self.grad[r] * (std::log(v) + 1.0);
      }
    }
  });
}

Tensor cross_entropy_logits(const Tensor& logits, std::size_t label) {
  const auto c = logits.numel();
  if (logits.rank() > 2 || (logits.rank() == 2 && logits.rows() != 1)) {
    throw DimensionError("cross_entropy_logits: expected a logit vector, got " +
                         shape_str(logits.shape()));
  }
  if (label >= c) {
    throw DimensionError("cross_entropy_logits: label " + std::to_string(label) +
                         " out of range for " + std::to_string(c) + " classes");
  }
  auto z = logits.data();
  const double mx = *std::max_element(z.begin(), z.end());
  double s = 0;
  for (double v : z) s += std::exp(v - mx);
  const double lse = mx + std::log(s);
  return make_result({}, {lse - z[label]}, {logits}, [label, lse, c](Node& self) {
    double* g = parent_grad(self, 0);
    const auto& zv = self.parents[0]->data;
    for (std::size_t i = 0; i < c; ++i) {
      const double p = std::exp(zv[i] - lse);
      g[i] += self.grad[0] * (p - (i == label ? 1.0 : 0.0));
    }
  });
}

Tensor abs_loss(const Tensor& pred, const Tensor& target) {
  require_same_shape(pred, target, "abs_loss");
  const std::size_t rows = pred.rank() == 2 ? pred.rows() : 1;
  auto pv = pred.data(), tv = target.data();
  double s = 0;
  for (std::size_t i = 0; i < pv.size(); ++i) s += std::abs(pv[i] - tv[i]);
  const double inv = 1.0 / static_cast<double>(rows);
  return make_result({}, {s * inv}, {pred, target}, [inv](Node& self) {
    const auto& pv = self.parents[0]->data;
    const auto& tv = self.parents[1]->data;
    auto sign = [](double v) { return v > 0 ? 1.0 : (v < 0 ? -1.0 : 0.0); };
    if (double* g = parent_grad(self, 0)) {
      for (std::size_t i = 0; i < pv.size(); ++i) g[i] += self.grad[0] * inv * sign(pv[i] - tv[i]);
    }
    if (double* g = parent_grad(self, 1)) {
      for (std::size_t i = 0; i < pv.size(); ++i) g[i] -= self.grad[0] * inv * sign(pv[i] - tv[i]);
    }
  });
}

// ---- normalization ---------------------------------------------------------

Tensor layer_norm_rows(const Tensor& x, const Tensor& gamma, const Tensor& beta, double eps) {
  require_2d(x, "layer_norm_rows");
  const auto m = x.rows(), n = x.cols();
  if (gamma.numel() != n || beta.numel() != n) {
    throw DimensionError("layer_norm_rows: scale/shift " + shape_str(gamma.shape()) + "/" +
                         shape_str(beta.shape()) + " do not match " + shape_str(x.shape()));
  }
  auto xv = x.data(), gv = gamma.data(), bv = beta.data();
  std::vector<double> xhat(m * n), inv_std(m), out(m * n);
  for (std::size_t r = 0; r < m; ++r) {
    const double* row = xv.data() + r * n;
    double mu = 0;
    for (std::size_t c = 0; c < n; ++c) mu += row[c];
    mu /= static_cast<double>(n);
    double var = 0;
    for (std::size_t c = 0; c < n; ++c) var += (row[c] - mu) * (row[c] - mu);
    var /= static_cast<double>(n);
    inv_std[r] = 1.0 / std::sqrt(var + eps);
    for (std::size_t c = 0; c < n; ++c) {
      xhat[r * n + c] = (row[c] - mu) * inv_std[r];
      out[r * n + c] = gv[c] * xhat[r * n + c] + bv[c];
    }
  }
  return make_result(
      x.shape(), std::move(out), {x, gamma, beta},
      [m, n, xhat = std::move(xhat), inv_std = std::move(inv_std)](Node& self) {
        const auto& gv = self.parents[1]->data;
        const double* gy = self.grad.data();
        if (double* gx = parent_grad(self, 0)) {
          std::vector<double> dxhat(n);
          for (std::size_t r = 0; r < m; ++r) {
            double mean_d = 0, mean_dx = 0;
            for (std::size_t c = 0; c < n; ++c) {
              dxhat[c] = gy[r * n + c] * gv[c];
              mean_d += dxhat[c];
              mean_dx += dxhat[c] * xhat[r * n + c];
            }
            mean_d /= static_cast<double>(n);
            mean_dx /= static_cast<double>(n);
            for (std::size_t c = 0; c < n; ++c) {
              gx[r * n + c] += inv_std[r] * (dxhat[c] - mean_d - xhat[r * n + c] * mean_dx);
            }
          }
        }
        if (double* gg = parent_grad(self, 1)) {
          for (std::size_t r = 0; r < m; ++r) {
            for (std::size_t c = 0; c < n; ++c) gg[c] += gy[r * n + c] * xhat[r * n + c];
          }
        }
        if (double* gb = parent_grad(self, 2)) {
          for (std::size_t r = 0; r < m; ++r) {
            for (std::size_t c = 0; c < n; ++c) gb[c] += gy[r * n + c];
          }
        }
      });
}

// ---- sparse message passing ------------------------------------------------

EdgeIndex EdgeIndex::from_undirected(
    std::size_t n, std::span<const std::pair<std::uint32_t, std::uint32_t>> edges) {
  EdgeIndex idx;
  idx.n = n;
  idx.row.reserve(2 * edges.size());
  idx.col.reserve(2 * edges.size());
  for (auto [u, v] : edges) {
    if (u >= n || v >= n) throw DimensionError("edge endpoint out of range");
    idx.row.push_back(u);
    idx.col.push_back(v);
    idx.row.push_back(v);
    idx.col.push_back(u);
  }
  return idx;
}

Tensor gather_entries(const Tensor& x, const EdgeIndex& index) {
  require_2d(x, "gather_entries");
  if (x.rows() != index.n || x.cols() != index.n) {
    throw DimensionError("gather_entries: matrix " + shape_str(x.shape()) +
                         " does not match pattern of size " + std::to_string(index.n));
  }
  const auto n = index.n, nnz = index.nnz();
  auto xv = x.data();
  std::vector<double> out(nnz);
  for (std::size_t e = 0; e < nnz; ++e) out[e] = xv[index.row[e] * n + index.col[e]];
  if (nnz == 0) out.push_back(0.0);  // keep a valid shape for edgeless graphs
  const std::size_t len = out.size();
  return make_result({len}, std::move(out), {x}, [index, n, nnz](Node& self) {
    double* g = parent_grad(self, 0);
    for (std::size_t e = 0; e < nnz; ++e) g[index.row[e] * n + index.col[e]] += self.grad[e];
  });
}

Tensor scatter_dense(const EdgeIndex& index, const Tensor& weights) {
  const auto n = index.n, nnz = index.nnz();
  if (weights.numel() < nnz) throw DimensionError("scatter_dense: too few weights");
  auto wv = weights.data();
  std::vector<double> out(n * n, 0.0);
  for (std::size_t e = 0; e < nnz; ++e) out[index.row[e] * n + index.col[e]] += wv[e];
  return make_result({n, n}, std::move(out), {weights}, [index, n, nnz](Node& self) {
    double* g = parent_grad(self, 0);
    for (std::size_t e = 0; e < nnz; ++e) g[e] += self.grad[index.row[e] * n + index.col[e]];
  });
}

Tensor sum_propagate(const Tensor& z, const EdgeIndex& index, const Tensor& weights) {
  require_2d(z, "sum_propagate");
  const auto n = z.rows(), d = z.cols(), nnz = index.nnz();
  if (index.n != n) {
    throw DimensionError("sum_propagate: features " + shape_str(z.shape()) +
                         " do not match pattern of size " + std::to_string(index.n));
  }
  if (weights.numel() < nnz) {
    throw DimensionError("sum_propagate: " + std::to_string(weights.numel()) +
                         " weights for " + std::to_string(nnz) + " entries");
  }
  auto zv = z.data(), wv = weights.data();
  std::vector<double> out(zv.begin(), zv.end());
  for (std::size_t e = 0; e < nnz; ++e) {
    const auto i = index.row[e], j = index.col[e];
    for (std::size_t c = 0; c < d; ++c) out[i * d + c] += wv[e] * zv[j * d + c];
  }
  return make_result({n, d}, std::move(out), {z, weights}, [index, d, nnz](Node& self) {
    const auto& zv = self.parents[0]->data;
    const auto& wv = self.parents[1]->data;
    const double* gy = self.grad.data();
    if (double* gz = parent_grad(self, 0)) {
      for (std::size_t k = 0; k < self.grad.size(); ++k) gz[k] += gy[k];
      for (std::size_t e = 0; e < nnz; ++e) {
        const auto i = index.row[e], j = index.col[e];
        for (std::size_t c = 0; c < d; ++c) gz[j * d + c] += wv[e] * gy[i * d + c];
      }
    }
    if (double* gw = parent_grad(self, 1)) {
      for (std::size_t e = 0; e < nnz; ++e) {
        const auto i = index.row[e], j = index.col[e];
        double acc = 0;
        for (std::size_t c = 0; c < d; ++c) acc += gy[i * d + c] * zv[j * d + c];
        gw[e] += acc;
      }
    }
  });
}

Tensor gcn_propagate(const Tensor& z, const EdgeIndex& index, const Tensor& weights) {
  require_2d(z, "gcn_propagate");
  const auto n = z.rows(), d = z.cols(), nnz = index.nnz();
  if (index.n != n) {
    throw DimensionError("gcn_propagate: features " + shape_str(z.shape()) +
                         " do not match pattern of size " + std::to_string(index.n));
  }
  if (weights.numel() < nnz) {
    throw DimensionError("gcn_propagate: " + std::to_string(weights.numel()) +
                         " weights for " + std::to_string(nnz) + " entries");
  }
  auto zv = z.data(), wv = weights.data();
  std::vector<double> s(n, 1.0);  // degree first, then D^-1/2
  for (std::size_t e = 0; e < nnz; ++e) s[index.row[e]] += wv[e];
  for (std::size_t i = 0; i < n; ++i) {
    if (!(s[i] > 0)) throw DomainError("gcn_propagate: non-positive degree");
    s[i] = 1.0 / std::sqrt(s[i]);
  }
  std::vector<double> out(n * d);
  for (std::size_t i = 0; i < n; ++i) {
    const double w = s[i] * s[i];
    for (std::size_t c = 0; c < d; ++c) out[i * d + c] = w * zv[i * d + c];
  }
  for (std::size_t e = 0; e < nnz; ++e) {
    const auto i = index.row[e], j = index.col[e];
    const double w = wv[e] * s[i] * s[j];
    for (std::size_t c = 0; c < d; ++c) out[i * d + c] += w * zv[j * d + c];
  }
  return make_result(
      {n, d}, std::move(out), {z, weights}, [index, n, d, nnz, s = std::move(s)](Node& self) {
        const auto& zv = self.parents[0]->data;
        const auto& wv = self.parents[1]->data;
        const double* gy = self.grad.data();
        if (double* gz = parent_grad(self, 0)) {
          for (std::size_t i = 0; i < n; ++i) {
            const double w = s[i] * s[i];
            for (std::size_t c = 0; c < d; ++c) gz[i * d + c] += w * gy[i * d + c];
          }
          for (std::size_t e = 0; e < nnz; ++e) {
            const auto i = index.row[e], j = index.col[e];
            const double w = wv[e] * s[i] * s[j];
            for (std::size_t c = 0; c < d; ++c) gz[j * d + c] += w * gy[i * d + c];
          }
        }
        if (double* gw = parent_grad(self, 1)) {
          auto dot = [&](std::size_t i, std::size_t j) {
            double acc = 0;
            for (std::size_t c = 0; c < d; ++c) acc += gy[i * d + c] * zv[j * d + c];
            return acc;
          };
          // dL/ds_k collects both the row and column roles of node k.
          std::vector<double> ds(n, 0.0);
          for (std::size_t i = 0; i < n; ++i) ds[i] += 2.0 * s[i] * dot(i, i);
          std::vector<double> edge_dot(nnz);
          for (std::size_t e = 0; e < nnz; ++e) {
            const auto i = index.row[e], j = index.col[e];
            edge_dot[e] = dot(i, j);
            ds[i] += wv[e] * s[j] * edge_dot[e];
            ds[j] += wv[e] * s[i] * edge_dot[e];
          }
          // s = deg^-1/2  =>  ds/ddeg = -s^3 / 2
          for (std::size_t i = 0; i < n; ++i) ds[i] *= -0.5 * s[i] * s[i] * s[i];
          for (std::size_t e = 0; e < nnz; ++e) {
            const auto i = index.row[e], j = index.col[e];
            gw[e] += s[i] * s[j] * edge_dot[e] + ds[i];
          }
        }
      });
}

}  // namespace igt
