#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>

#include "doctest.h"
#include "igt/batching.hpp"
#include "igt/errors.hpp"
#include "igt/generator.hpp"
#include "igt/graph_io.hpp"

using namespace igt;
namespace fs = std::filesystem;

namespace {

ShiftSpec small_spec(SplitKind kind, std::size_t n_train = 300) {
  auto spec = ShiftSpec::defaults(kind);
  spec.n_train = n_train;
  spec.n_val = 60;
  spec.n_test = 60;
  return spec;
}

fs::path temp_file(const std::string& name) {
  auto dir = fs::temp_directory_path() / "igt_tests";
  fs::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_CASE("motif templates") {
  CHECK(motif_edges(MotifType::house).size() == 6);
  CHECK(motif_edges(MotifType::cycle).size() == 5);
  CHECK(motif_edges(MotifType::crane).size() == 6);
  // house and crane have equal edge counts but different degree sequences
  auto degrees = [](const std::vector<Edge>& edges) {
    std::array<int, 5> d{};
    for (auto [u, v] : edges) {
      ++d[u];
      ++d[v];
    }
    std::sort(d.begin(), d.end());
    return d;
  };
  CHECK(degrees(motif_edges(MotifType::house)) != degrees(motif_edges(MotifType::crane)));
}

TEST_CASE("generated graphs satisfy structural invariants") {
  for (auto kind : {SplitKind::basis, SplitKind::size}) {
    auto ds = generate_dataset(small_spec(kind), 17);
    std::map<std::size_t, std::size_t> motif_edge_count;
    for (const auto* split : {&ds.train, &ds.val, &ds.test}) {
      for (const auto& g : *split) {
        REQUIRE_NOTHROW(g.validate());
        CHECK(is_connected(g));
        CHECK(g.label == static_cast<std::size_t>(g.meta.motif_type));
        std::size_t inv = 0;
        for (bool b : g.invariant_edge_mask) inv += b;
        auto [it, inserted] = motif_edge_count.emplace(g.label, inv);
        CHECK(it->second == inv);
        const std::size_t base = g.n_nodes - kMotifNodes;
        CHECK(g.edges.size() == inv + base_edges(g.meta.base_type, base).size() + 1);
        for (double f : g.node_features) CHECK(f == 1.0);
      }
    }
    CHECK(motif_edge_count[0] == 6);
    CHECK(motif_edge_count[1] == 5);
    CHECK(motif_edge_count[2] == 6);
  }
}

TEST_CASE("size split: test bases strictly larger than training bases") {
  auto ds = generate_dataset(small_spec(SplitKind::size), 3);
  std::size_t max_train = 0, min_test = 1000;
  for (const auto& g : ds.train) max_train = std::max(max_train, g.n_nodes - kMotifNodes);
  for (const auto& g : ds.test) min_test = std::min(min_test, g.n_nodes - kMotifNodes);
  CHECK(min_test > max_train);
}

TEST_CASE("bias b = 1/5 makes base type independent of label") {
  auto spec = small_spec(SplitKind::basis, 10000);
  spec.bias = 1.0 / kNumBaseTypes;
  auto ds = generate_dataset(spec, 5);
  double joint[5][3] = {};
  for (const auto& g : ds.train) joint[static_cast<int>(g.meta.base_type)][g.label] += 1;
  const double n = static_cast<double>(ds.train.size());
  double pb[5] = {}, pl[3] = {};
  for (int b = 0; b < 5; ++b) {
    for (int l = 0; l < 3; ++l) {
      joint[b][l] /= n;
      pb[b] += joint[b][l];
      pl[l] += joint[b][l];
    }
  }
  double mi = 0;
  for (int b = 0; b < 5; ++b) {
    for (int l = 0; l < 3; ++l) {
      if (joint[b][l] > 0) mi += joint[b][l] * std::log(joint[b][l] / (pb[b] * pl[l]));
    }
  }
  // plug-in bias is about (5-1)(3-1)/(2N) = 4e-4 nats
  CHECK(mi < 3e-3);
}

TEST_CASE("bias b = 0.9 ties base index to label in training data only") {
  auto spec = small_spec(SplitKind::basis, 10000);
  spec.n_test = 3000;
  auto ds = generate_dataset(spec, 9);
  auto agree = [](const std::vector<Graph>& gs) {
    double k = 0;
    for (const auto& g : gs) k += static_cast<std::size_t>(g.meta.base_type) == g.label;
    return k / static_cast<double>(gs.size());
  };
  const double train = agree(ds.train);
  CHECK(train >= 0.88);
  CHECK(train <= 0.92);
  CHECK(agree(ds.test) == doctest::Approx(0.2).epsilon(0.15));
}

TEST_CASE("generator is deterministic and rejects bad specs") {
  auto spec = small_spec(SplitKind::basis, 50);
  auto a = generate_dataset(spec, 42);
  auto b = generate_dataset(spec, 42);
  CHECK(a.train == b.train);
  CHECK(a.test == b.test);

  auto bad = spec;
  bad.train_sizes = {20, 10};
  CHECK_THROWS_AS(generate_dataset(bad, 1), ConfigError);
  bad = spec;
  bad.bias = 1.5;
  CHECK_THROWS_AS(generate_dataset(bad, 1), ConfigError);
  bad = ShiftSpec::defaults(SplitKind::size);
  bad.test_sizes = {20, 35};
  CHECK_THROWS_AS(generate_dataset(bad, 1), ConfigError);
}

TEST_CASE("batching") {
  auto sizes = [](const std::vector<Batch>& bs) {
    std::vector<std::size_t> out;
    for (const auto& b : bs) out.push_back(b.size());
    return out;
  };
  CHECK(sizes(make_batches(10, 4)) == std::vector<std::size_t>{4, 4, 2});
  CHECK(sizes(make_batches(9, 4)) == std::vector<std::size_t>{4, 5});
  CHECK_THROWS_AS(make_batches(10, 1), ConfigError);
  CHECK_THROWS_AS(make_batches(1, 4), ConfigError);

  auto x = make_batches(50, 8, 123);
  auto y = make_batches(50, 8, 123);
  auto z = make_batches(50, 8, 124);
  CHECK(x.size() == y.size());
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(x[i].indices == y[i].indices);
  CHECK(x[0].indices != z[0].indices);
  std::vector<bool> seen(50, false);
  for (const auto& b : x) {
    for (auto i : b.indices) seen[i] = true;
  }
  CHECK(std::all_of(seen.begin(), seen.end(), [](bool s) { return s; }));
}

TEST_CASE("graph files round-trip") {
  auto ds = generate_dataset(small_spec(SplitKind::basis, 100), 77);
  std::mt19937_64 rng(1);
  std::normal_distribution<double> gauss;
  for (auto& g : ds.train) {
    g.pse_dim = 3;
    g.handcrafted_pse.resize(g.n_nodes * 3);
    for (auto& v : g.handcrafted_pse) v = gauss(rng);
  }
  auto path = temp_file("roundtrip.jsonl");
  write_graphs(path, ds.train);
  auto back = read_graphs(path);
  REQUIRE(back.size() == 100);
  CHECK(back == ds.train);
}

TEST_CASE("graph file errors") {
  auto ds = generate_dataset(small_spec(SplitKind::basis, 3), 2);
  auto j0 = graph_to_json(ds.train[0]);
  auto j1 = graph_to_json(ds.train[1]);
  j1.erase("label");
  auto path = temp_file("missing_label.jsonl");
  {
    std::ofstream os(path);
    os << j0.dump() << "\n" << j1.dump() << "\n";
  }
  try {
    read_graphs(path);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
    CHECK(std::string(e.what()).find("label") != std::string::npos);
  }

  auto junk = temp_file("junk.jsonl");
  {
    std::ofstream os(junk);
    os << j0.dump() << "\n{not json\n";
  }
  CHECK_THROWS_AS(read_graphs(junk), ParseError);

  auto empty = temp_file("empty.jsonl");
  { std::ofstream os(empty); }
  CHECK(read_graphs(empty).empty());
}
