#include "igt/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "igt/errors.hpp"

namespace igt {

Tensor normalized_laplacian(const Graph& g) {
  const std::size_t n = g.n_nodes;
  std::vector<double> deg(n, 0.0);
  for (auto [u, v] : g.edges) {
    deg[u] += 1;
    deg[v] += 1;
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (deg[i] == 0) throw DomainError("normalized_laplacian: node " + std::to_string(i) + " is isolated");
  }
  std::vector<double> l(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) l[i * n + i] = 1.0;
  for (auto [u, v] : g.edges) {
    const double w = 1.0 / std::sqrt(deg[u] * deg[v]);
    l[u * n + v] -= w;
    l[v * n + u] -= w;
  }
  return Tensor::from({n, n}, std::move(l));
}

EigenDecomposition symmetric_eig(const Tensor& m) {
  if (m.rank() != 2 || m.rows() != m.cols()) {
    throw DimensionError("symmetric_eig: expected a square matrix, got " + shape_str(m.shape()));
  }
  const std::size_t n = m.rows();
  std::vector<double> a(m.data().begin(), m.data().end());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (std::abs(a[i * n + j] - a[j * n + i]) > 1e-10) {
        throw DomainError("symmetric_eig: matrix is not symmetric at (" + std::to_string(i) +
                          "," + std::to_string(j) + ")");
      }
      a[j * n + i] = a[i * n + j];
    }
  }
  std::vector<double> v(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) v[i * n + i] = 1.0;

  double frob = 0;
  for (double x : a) frob += x * x;
  frob = std::sqrt(frob);

  EigenDecomposition out;
  constexpr int kMaxSweeps = 100;
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    double off = 0;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) off += a[p * n + q] * a[p * n + q];
    }
    if (std::sqrt(2 * off) <= 1e-15 * frob || off == 0) break;
    ++out.sweeps;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a[p * n + q];
        if (apq == 0) continue;
        const double theta = (a[q * n + q] - a[p * n + p]) / (2 * apq);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1));
        const double c = 1 / std::sqrt(t * t + 1);
        const double s = t * c;
        // A <- J^T A J applied to rows/cols p and q.
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a[k * n + p], akq = a[k * n + q];
          a[k * n + p] = c * akp - s * akq;
          a[k * n + q] = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a[p * n + k], aqk = a[q * n + k];
          a[p * n + k] = c * apk - s * aqk;
          a[q * n + k] = s * apk + c * aqk;
        }
        a[p * n + q] = a[q * n + p] = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v[k * n + p], vkq = v[k * n + q];
          v[k * n + p] = c * vkp - s * vkq;
          v[k * n + q] = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](auto i, auto j) { return a[i * n + i] < a[j * n + j]; });
  out.values.resize(n);
  std::vector<double> vs(n * n);
  for (std::size_t c = 0; c < n; ++c) {
    out.values[c] = a[order[c] * n + order[c]];
    for (std::size_t r = 0; r < n; ++r) vs[r * n + c] = v[r * n + order[c]];
  }
  out.vectors = Tensor::from({n, n}, std::move(vs));
  return out;
}

LapPE lappe(const Graph& g, std::size_t k) {
  if (k == 0) throw ConfigError("lappe: k must be at least 1");
  const std::size_t n = g.n_nodes;
  auto eig = symmetric_eig(normalized_laplacian(g));
  auto vec = eig.vectors.data();

  struct Column {
    double value;
    std::vector<double> entries;
    bool flipped;
  };
  std::vector<Column> cols;
  for (std::size_t c = 0; c < n; ++c) {
    if (eig.values[c] < 1e-8) continue;
    Column col{eig.values[c], std::vector<double>(n), false};
    for (std::size_t r = 0; r < n; ++r) col.entries[r] = vec[r * n + c];
    for (double x : col.entries) {
      if (std::abs(x) > 1e-10) {
        col.flipped = x < 0;
        break;
      }
    }
    if (col.flipped) {
      for (auto& x : col.entries) x = -x;
    }
    cols.push_back(std::move(col));
  }
  auto rounded = [](double x) { return std::round(x * 1e8); };
  for (std::size_t start = 0; start < cols.size();) {
    std::size_t end = start + 1;
    while (end < cols.size() && cols[end].value - cols[end - 1].value < 1e-8) ++end;
    std::sort(cols.begin() + static_cast<std::ptrdiff_t>(start),
              cols.begin() + static_cast<std::ptrdiff_t>(end), [&](const auto& x, const auto& y) {
                return std::lexicographical_compare(
                    x.entries.begin(), x.entries.end(), y.entries.begin(), y.entries.end(),
                    [&](double p, double q) { return rounded(p) < rounded(q); });
              });
    start = end;
  }

  LapPE pe;
  std::vector<double> out(n * k, 0.0);
  pe.eigenvalues.assign(k, 0.0);
  pe.flipped.assign(k, false);
  for (std::size_t c = 0; c < std::min(k, cols.size()); ++c) {
    for (std::size_t r = 0; r < n; ++r) out[r * k + c] = cols[c].entries[r];
    pe.eigenvalues[c] = cols[c].value;
    pe.flipped[c] = cols[c].flipped;
  }
  pe.vectors = Tensor::from({n, k}, std::move(out));
  return pe;
}

void precompute_pse(std::vector<Graph>& graphs, std::size_t k) {
  for (auto& g : graphs) {
    auto pe = lappe(g, k);
    g.pse_dim = k;
    g.handcrafted_pse.assign(pe.vectors.data().begin(), pe.vectors.data().end());
  }
}

}  // namespace igt
