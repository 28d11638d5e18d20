#include "igt/generator.hpp"

#include <algorithm>
#include <numeric>
#include <random>

#include "igt/errors.hpp"

namespace igt {

std::string to_string(SplitKind k) { return k == SplitKind::basis ? "basis" : "size"; }

SplitKind split_kind_from_string(const std::string& s) {
  if (s == "basis") return SplitKind::basis;
  if (s == "size") return SplitKind::size;
  throw ConfigError("unknown split kind '" + s + "' (expected basis or size)");
}

ShiftSpec ShiftSpec::defaults(SplitKind kind) {
  ShiftSpec spec;
  spec.split_kind = kind;
  if (kind == SplitKind::size) {
    spec.bias = 1.0 / static_cast<double>(kNumBaseTypes);
    spec.test_sizes = {40, 60};
  }
  return spec;
}

void ShiftSpec::validate() const {
  if (!(bias >= 0.0 && bias <= 1.0)) throw ConfigError("bias must lie in [0, 1]");
  if (n_train == 0 || n_val == 0 || n_test == 0) throw ConfigError("split counts must be positive");
  if (feature_dim == 0) throw ConfigError("feature_dim must be positive");
  for (const auto* r : {&train_sizes, &val_sizes, &test_sizes}) {
    if (r->lo > r->hi) {
      throw ConfigError("empty base size range [" + std::to_string(r->lo) + ", " +
                        std::to_string(r->hi) + "]");
    }
    if (r->lo < 4) throw ConfigError("base sizes must be at least 4");
  }
  if (split_kind == SplitKind::size && test_sizes.lo <= train_sizes.hi) {
    throw ConfigError("size split needs test base sizes above the training range");
  }
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  return mix(mix(mix(seed) ^ a) ^ (b * 0x632be59bd9b4e019ULL));
}

std::vector<Edge> base_edges(BaseType type, std::size_t n) {
  std::vector<Edge> e;
  auto add = [&](std::size_t u, std::size_t v) {
    e.emplace_back(static_cast<std::uint32_t>(u), static_cast<std::uint32_t>(v));
  };
  switch (type) {
    case BaseType::wheel:
      for (std::size_t i = 1; i < n; ++i) {
        add(0, i);
        add(i, i + 1 < n ? i + 1 : 1);
      }
      break;
    case BaseType::tree:  // complete binary tree in heap order
      for (std::size_t i = 1; i < n; ++i) add((i - 1) / 2, i);
      break;
    case BaseType::ladder: {
      const std::size_t rungs = n / 2;
      for (std::size_t i = 0; i < rungs; ++i) {
        add(i, rungs + i);
        if (i + 1 < rungs) {
          add(i, i + 1);
          add(rungs + i, rungs + i + 1);
        }
      }
      if (n % 2) add(rungs - 1, n - 1);
      break;
    }
    case BaseType::star:
      for (std::size_t i = 1; i < n; ++i) add(0, i);
      break;
    case BaseType::path:
      for (std::size_t i = 0; i + 1 < n; ++i) add(i, i + 1);
      break;
  }
  return e;
}

std::vector<Edge> motif_edges(MotifType type) {
  switch (type) {
    case MotifType::house:
      return {{0, 1}, {1, 2}, {2, 3}, {3, 0}, {0, 4}, {1, 4}};
    case MotifType::cycle:
      return {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 0}};
    case MotifType::crane:
      return {{0, 1}, {1, 2}, {0, 2}, {2, 3}, {3, 4}, {2, 4}};
  }
  return {};
}

namespace {

Graph make_graph(std::size_t label, BaseType base, std::size_t base_size, std::size_t feature_dim,
                 std::mt19937_64& rng) {
  const auto motif = static_cast<MotifType>(label);
  const std::size_t n = base_size + kMotifNodes;
  std::vector<Edge> edges = base_edges(base, base_size);
  std::vector<bool> mask(edges.size(), false);
  for (auto [u, v] : motif_edges(motif)) {
    edges.emplace_back(static_cast<std::uint32_t>(base_size + u),
                       static_cast<std::uint32_t>(base_size + v));
    mask.push_back(true);
  }
  std::uniform_int_distribution<std::size_t> pick_base(0, base_size - 1);
  std::uniform_int_distribution<std::size_t> pick_motif(0, kMotifNodes - 1);
  const auto b = static_cast<std::uint32_t>(pick_base(rng));
  const auto m = static_cast<std::uint32_t>(base_size + pick_motif(rng));
  edges.emplace_back(b, m);
  mask.push_back(false);

  std::vector<std::uint32_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0u);
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<std::size_t> order(edges.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), rng);

  Graph g;
  g.n_nodes = n;
  g.feature_dim = feature_dim;
  g.node_features.assign(n * feature_dim, 1.0);
  g.label = label;
  for (auto k : order) {
    auto u = perm[edges[k].first], v = perm[edges[k].second];
    g.edges.emplace_back(std::min(u, v), std::max(u, v));
    g.invariant_edge_mask.push_back(mask[k]);
  }
  g.meta.base_type = base;
  g.meta.motif_type = motif;
  return g;
}

std::vector<Graph> make_split(const ShiftSpec& spec, std::uint64_t seed, std::uint64_t split_id,
                              const char* name, std::size_t count, SizeRange sizes,
                              bool biased) {
  std::vector<Graph> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    std::mt19937_64 rng(derive_seed(seed, split_id, i));
    std::uniform_int_distribution<std::size_t> pick_label(0, kNumClasses - 1);
    const std::size_t label = pick_label(rng);
    std::size_t base;
    if (biased) {
      std::bernoulli_distribution follow(spec.bias);
      if (follow(rng)) {
        base = label;
      } else {
        std::uniform_int_distribution<std::size_t> other(0, kNumBaseTypes - 2);
        base = other(rng);
        if (base >= label) ++base;
      }
    } else {
      std::uniform_int_distribution<std::size_t> any(0, kNumBaseTypes - 1);
      base = any(rng);
    }
    std::uniform_int_distribution<std::size_t> pick_size(sizes.lo, sizes.hi);
    const std::size_t size = pick_size(rng);
    Graph g = make_graph(label, static_cast<BaseType>(base), size, spec.feature_dim, rng);
    g.meta.split = name;
    g.meta.id = std::string(name) + "-" + std::to_string(i);
    out.push_back(std::move(g));
  }
  return out;
}

}  // namespace

Dataset generate_dataset(const ShiftSpec& spec, std::uint64_t seed) {
  spec.validate();
  Dataset ds;
  ds.train = make_split(spec, seed, 1, "train", spec.n_train, spec.train_sizes, true);
  ds.val = make_split(spec, seed, 2, "val", spec.n_val, spec.val_sizes, true);
  ds.test = make_split(spec, seed, 3, "test", spec.n_test, spec.test_sizes, false);
  return ds;
}

}  // namespace igt
