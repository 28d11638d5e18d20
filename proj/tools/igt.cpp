#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "igt/bench.hpp"
#include "igt/config.hpp"
#include "igt/errors.hpp"
#include "igt/generator.hpp"
#include "igt/graph_io.hpp"
#include "igt/metrics.hpp"
#include "igt/spectral.hpp"
#include "igt/training.hpp"

#ifndef IGT_GIT_HASH
#define IGT_GIT_HASH "unknown"
#endif

namespace fs = std::filesystem;
using nlohmann::json;
using namespace igt;

namespace {

const char* kSplits[] = {"train", "val", "test"};

fs::path split_file(const fs::path& dir, const std::string& split) {
  return dir / (split + ".jsonl");
}

// A directory resolves to its test split; a file is read as is.
fs::path graphs_path(const fs::path& p, const std::string& split = "test") {
  return fs::is_directory(p) ? split_file(p, split) : p;
}

std::vector<Graph> read_existing(const fs::path& p) {
  if (!fs::exists(p)) throw ConfigError("no such file: " + p.string());
  return read_graphs(p);
}

void write_json(const fs::path& p, const json& j) {
  std::ofstream os(p);
  if (!os) throw ConfigError("cannot write " + p.string());
  os << j.dump(2) << '\n';
}

json file_hashes(const fs::path& dir) {
  json h = json::object();
  for (const char* s : kSplits) {
    auto p = split_file(dir, s);
    if (fs::exists(p)) h[p.filename().string()] = file_sha256(p);
  }
  return h;
}

Dataset load_dataset(const fs::path& dir) {
  Dataset d;
  d.train = read_existing(split_file(dir, "train"));
  d.val = read_existing(split_file(dir, "val"));
  d.test = read_existing(split_file(dir, "test"));
  return d;
}

struct ConfigArgs {
  std::string split = "basis";
  std::string method = "full";
  std::string config_file;
  std::vector<std::string> sets;
  bool desk = false;
  bool split_given = false;
  std::int64_t seed = -1;
  std::int64_t epochs = -1;

  void add(CLI::App* app) {
    app->add_option("--split", split, "Hyperparameter preset: basis or size")
        ->check(CLI::IsMember({"basis", "size"}))
        ->each([this](const std::string&) { split_given = true; });
    app->add_option("--method", method, "full or erm")->check(CLI::IsMember({"full", "erm"}));
    app->add_option("--config", config_file, "JSON file of overrides")->check(CLI::ExistingFile);
    app->add_option("--set", sets, "Inline JSON override, e.g. '{\"lr\": 3e-4}' (repeatable)");
    app->add_flag("--desk", desk, "Reduced widths and epochs");
    app->add_option("--seed", seed, "Run seed");
    app->add_option("--epochs", epochs, "Number of epochs");
  }

  // The dataset manifest, when present, fixes the ShiftSpec and the default preset.
  TrainConfig build(const fs::path& data_dir = {}) const {
    std::optional<ShiftSpec> spec;
    if (!data_dir.empty() && fs::exists(data_dir / "manifest.json")) {
      std::ifstream is(data_dir / "manifest.json");
      auto m = json::parse(is, nullptr, false);
      if (m.is_object() && m.contains("spec")) spec = shift_spec_from_json(m["spec"], ShiftSpec{});
    }
    const auto kind = split_given || !spec ? split_kind_from_string(split) : spec->split_kind;
    auto c = desk ? TrainConfig::desk(kind) : TrainConfig::defaults(kind);
    c.method = method_from_string(method);
    if (spec) c.data = *spec;
    if (!config_file.empty()) c = load_config(config_file, c);
    for (const auto& s : sets) {
      json j;
      try {
        j = json::parse(s);
      } catch (const json::exception& e) {
        throw ConfigError("--set is not valid JSON: " + std::string(e.what()));
      }
      c = apply_overrides(c, j);
    }
    if (seed >= 0) c.seed = static_cast<std::uint64_t>(seed);
    if (epochs >= 0) c.epochs = static_cast<std::size_t>(epochs);
    c.validate();
    return c;
  }
};

// ---- generate ---------------------------------------------------------------

void cmd_generate(const std::string& split, const std::string& spec_file, double bias,
                  std::uint64_t seed, const fs::path& out) {
  auto spec = ShiftSpec::defaults(split_kind_from_string(split));
  if (!spec_file.empty()) {
    std::ifstream is(spec_file);
    json j;
    try {
      is >> j;
    } catch (const json::exception& e) {
      throw ConfigError("spec file is not valid JSON: " + std::string(e.what()));
    }
    spec = shift_spec_from_json(j, spec);
  }
  if (bias >= 0) spec.bias = bias;
  spec.validate();
  auto data = generate_dataset(spec, seed);
  fs::create_directories(out);
  write_graphs(split_file(out, "train"), data.train);
  write_graphs(split_file(out, "val"), data.val);
  write_graphs(split_file(out, "test"), data.test);
  write_json(out / "manifest.json",
             {{"spec", to_json(spec)}, {"seed", seed}, {"pse", nullptr}, {"sha256", file_hashes(out)}});
  std::cout << "wrote " << data.train.size() << "/" << data.val.size() << "/" << data.test.size()
            << " graphs to " << out.string() << '\n';
}

// ---- precompute-pse ---------------------------------------------------------

void cmd_precompute(const fs::path& data, std::size_t k) {
  std::vector<fs::path> files;
  if (fs::is_directory(data)) {
    for (const char* s : kSplits) {
      if (fs::exists(split_file(data, s))) files.push_back(split_file(data, s));
    }
  } else {
    files.push_back(data);
  }
  if (files.empty()) throw ConfigError("no graph files under " + data.string());
  for (const auto& f : files) {
    auto graphs = read_existing(f);
    precompute_pse(graphs, k);
    write_graphs(f, graphs);
    std::cout << f.string() << ": " << graphs.size() << " graphs, k = " << k << '\n';
  }
  auto manifest_path = (fs::is_directory(data) ? data : data.parent_path()) / "manifest.json";
  if (fs::exists(manifest_path)) {
    std::ifstream is(manifest_path);
    json m = json::parse(is);
    m["pse"] = {{"k", k}};
    m["sha256"] = file_hashes(manifest_path.parent_path());
    write_json(manifest_path, m);
  }
}

// ---- train ------------------------------------------------------------------

TrainResult run_training(const TrainConfig& cfg, const Dataset& data, bool quiet) {
  TrainHooks hooks;
  if (!quiet) {
    hooks.on_epoch = [](const EpochMetrics& m) {
      std::cerr << "epoch " << m.epoch << "  loss " << std::setprecision(4) << m.total
                << "  train " << m.train_acc << "  val " << m.val_acc << "  H " << m.mean_entropy
                << "  (" << std::setprecision(3) << m.seconds << " s)\n";
    };
  }
  return train(cfg, data, hooks);
}

json eval_summary(const TrainResult& r, const Dataset& data) {
  if (r.erm) return {{"test_acc", evaluate(*r.erm, data.test)}};
  EvalOptions opt;
  opt.calibrate = r.config.calibrate;
  opt.h_bar = r.h_bar;
  opt.calibration = r.config.calibration;
  auto rep = evaluate(*r.model, data.test, opt);
  return {{"test_acc", rep.accuracy_calibrated},
          {"test_acc_uncalibrated", rep.accuracy},
          {"precision_at_10", rep.precision_at_k},
          {"random_precision_at_10", rep.random_precision_at_k}};
}

void cmd_train(const ConfigArgs& args, const fs::path& data_dir, const fs::path& out, bool quiet) {
  auto cfg = args.build(data_dir);
  auto data = load_dataset(data_dir);
  auto r = run_training(cfg, data, quiet);
  fs::create_directories(out);
  write_metrics_csv(out / "metrics.csv", r.history);
  save_model(out / "model.ckpt", r);
  auto summary = eval_summary(r, data);
  json manifest = {{"config", to_json(cfg)},
                   {"git", IGT_GIT_HASH},
                   {"seed", cfg.seed},
                   {"data", data_dir.string()},
                   {"data_sha256", file_hashes(data_dir)},
                   {"best_epoch", r.best_epoch},
                   {"best_val_acc", r.best_val_acc},
                   {"h_bar", r.h_bar},
                   {"test", summary}};
  write_json(out / "manifest.json", manifest);
  std::cout << summary.dump(2) << '\n';
}

// ---- eval -------------------------------------------------------------------

void cmd_eval(const fs::path& ckpt, const fs::path& test, const std::string& dump_masks,
              bool no_calibrate, std::size_t k) {
  auto loaded = load_model(ckpt);
  auto graphs = read_existing(graphs_path(test));
  if (loaded.erm) {
    std::cout << json{{"method", "erm"}, {"graphs", graphs.size()},
                      {"accuracy", evaluate(*loaded.erm, graphs)}}
                     .dump(2)
              << '\n';
    if (!dump_masks.empty()) throw ConfigError("--dump-masks needs a full-method checkpoint");
    return;
  }
  EvalOptions opt;
  opt.calibrate = loaded.config.calibrate && !no_calibrate;
  opt.h_bar = loaded.h_bar;
  opt.calibration = loaded.config.calibration;
  opt.k = k;
  auto rep = evaluate(*loaded.model, graphs, opt);
  std::cout << json{{"method", "full"},
                    {"graphs", graphs.size()},
                    {"accuracy", rep.accuracy},
                    {"accuracy_calibrated", rep.accuracy_calibrated},
                    {"calibrated", opt.calibrate},
                    {"h_bar", loaded.h_bar},
                    {"precision_at_k", rep.precision_at_k},
                    {"random_precision_at_k", rep.random_precision_at_k},
                    {"k", k},
                    {"combined_agreement", rep.combined_agreement},
                    {"mean_entropy", rep.mean_entropy}}
                   .dump(2)
            << '\n';
  if (!dump_masks.empty()) {
    std::ofstream os(dump_masks);
    if (!os) throw ConfigError("cannot write " + dump_masks);
    os << "graph_id,u,v,score,invariant\n" << std::setprecision(17);
    for (std::size_t i = 0; i < graphs.size(); ++i) {
      const auto& g = graphs[i];
      const auto& s = rep.graphs[i].edge_scores;
      for (std::size_t e = 0; e < g.edges.size(); ++e) {
        os << g.meta.id << ',' << g.edges[e].first << ',' << g.edges[e].second << ',' << s[e]
           << ',' << (g.invariant_edge_mask[e] ? 1 : 0) << '\n';
      }
    }
  }
}

// ---- calibrate --------------------------------------------------------------

void cmd_calibrate(const fs::path& ckpt, const fs::path& test, const std::string& out) {
  auto loaded = load_model(ckpt);
  if (!loaded.model) throw ConfigError("calibration needs a full-method checkpoint");
  auto graphs = read_existing(graphs_path(test));
  EvalOptions opt;
  opt.calibrate = true;
  opt.h_bar = loaded.h_bar;
  opt.calibration = loaded.config.calibration;
  auto rep = evaluate(*loaded.model, graphs, opt);
  std::ofstream file;
  std::ostream* os = &std::cout;
  if (!out.empty()) {
    file.open(out);
    if (!file) throw ConfigError("cannot write " + out);
    os = &file;
  }
  *os << "graph_id,t_G,gap,iterations,converged,clamped\n" << std::setprecision(17);
  for (const auto& g : rep.graphs) {
    const auto& t = g.temperature;
    *os << g.id << ',' << t.t << ',' << t.gap << ',' << t.iterations << ',' << t.converged << ','
        << t.clamped << '\n';
  }
  std::cerr << "H_bar " << loaded.h_bar << "  accuracy " << rep.accuracy << " -> "
            << rep.accuracy_calibrated << '\n';
}

// ---- bench ------------------------------------------------------------------

void print_series(const char* name, const std::vector<BenchPoint>& pts, double slope) {
  std::cout << name << "  slope " << std::setprecision(3) << slope << '\n';
  for (const auto& p : pts) {
    std::cout << "  n=" << p.nodes << " d=" << p.width << " m=" << p.edges << "  "
              << std::setprecision(4) << p.seconds * 1e3 << " ms\n";
  }
}

void cmd_bench(std::size_t reps, std::uint64_t seed, const std::string& csv) {
  BenchOptions o;
  o.repetitions = reps;
  o.seed = seed;
  auto r = bench_complexity(o);
  print_series("hybrid layer vs |V|", r.by_nodes, r.slope_nodes);
  print_series("attention vs d", r.by_width, r.slope_width);
  print_series("message passing vs |E|", r.by_edges, r.slope_edges);
  if (!csv.empty()) {
    std::ofstream os(csv);
    if (!os) throw ConfigError("cannot write " + csv);
    os << "series,nodes,width,edges,seconds\n";
    auto dump = [&](const char* s, const std::vector<BenchPoint>& pts) {
      for (const auto& p : pts) {
        os << s << ',' << p.nodes << ',' << p.width << ',' << p.edges << ',' << p.seconds << '\n';
      }
    };
    dump("nodes", r.by_nodes);
    dump("width", r.by_width);
    dump("edges", r.by_edges);
  }
}

// ---- ablate -----------------------------------------------------------------

void cmd_ablate(const ConfigArgs& args, const fs::path& data_dir, std::size_t seeds,
                const std::string& out, bool quiet) {
  auto base = args.build(data_dir);
  base.method = Method::full;
  auto data = load_dataset(data_dir);
  std::vector<std::pair<std::string, TrainConfig>> variants{
      {"full", base}, {"without_entropy", base.without_entropy()},
      {"without_encoder", base.without_encoder()}};
  json table = json::array();
  for (const auto& [name, cfg0] : variants) {
    std::vector<double> acc;
    for (std::size_t s = 0; s < seeds; ++s) {
      auto cfg = cfg0;
      cfg.seed = base.seed + s;
      auto r = run_training(cfg, data, quiet);
      acc.push_back(eval_summary(r, data)["test_acc"].get<double>());
    }
    auto ms = mean_std(acc);
    table.push_back({{"variant", name}, {"test_acc", acc}, {"mean", ms.mean}, {"std", ms.std}});
    std::cout << std::left << std::setw(18) << name << std::fixed << std::setprecision(4)
              << ms.mean << " +- " << ms.std << '\n'
              << std::defaultfloat;
  }
  if (!out.empty()) write_json(out, table);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Invariant graph transformer for out-of-distribution graph classification"};
  app.require_subcommand(1);

  auto* gen = app.add_subcommand("generate", "Generate a synthetic motif-shift dataset");
  std::string gen_split = "basis", gen_spec;
  std::uint64_t gen_seed = 0;
  double gen_bias = -1;
  fs::path gen_out;
  gen->add_option("--split", gen_split, "basis or size")->check(CLI::IsMember({"basis", "size"}));
  gen->add_option("--spec", gen_spec, "JSON file of dataset overrides")->check(CLI::ExistingFile);
  gen->add_option("--bias", gen_bias, "P(base index == label) in train and val (default 0.9 basis, 0.2 size)");
  gen->add_option("--seed", gen_seed, "Generator seed");
  gen->add_option("--out", gen_out, "Output directory")->required();

  auto* pse = app.add_subcommand("precompute-pse", "Cache handcrafted positional encodings");
  fs::path pse_data;
  std::size_t pse_k = 8;
  pse->add_option("--data", pse_data, "Dataset directory or graph file")->required()->check(CLI::ExistingPath);
  pse->add_option("-k", pse_k, "Number of Laplacian eigenvectors");

  auto* tr = app.add_subcommand("train", "Train a model and write metrics, checkpoint and manifest");
  ConfigArgs tr_args;
  fs::path tr_data, tr_out;
  bool tr_quiet = false;
  tr_args.add(tr);
  tr->add_option("--data", tr_data, "Dataset directory")->required()->check(CLI::ExistingDirectory);
  tr->add_option("--out", tr_out, "Run directory")->required();
  tr->add_flag("--quiet", tr_quiet, "No per-epoch log");

  auto* ev = app.add_subcommand("eval", "Evaluate a checkpoint");
  fs::path ev_ckpt, ev_test;
  std::string ev_dump;
  bool ev_nocal = false;
  std::size_t ev_k = 10;
  ev->add_option("--checkpoint", ev_ckpt, "Model checkpoint")->required()->check(CLI::ExistingFile);
  ev->add_option("--test", ev_test, "Dataset directory or graph file")->required()->check(CLI::ExistingPath);
  ev->add_option("--dump-masks", ev_dump, "Write per-edge scores as CSV");
  ev->add_flag("--no-calibrate", ev_nocal, "Skip test-time temperature calibration");
  ev->add_option("-k", ev_k, "Cutoff of precision@k");

  auto* cal = app.add_subcommand("calibrate", "Solve the per-graph attention temperature");
  fs::path cal_ckpt, cal_test;
  std::string cal_out;
  cal->add_option("--checkpoint", cal_ckpt, "Model checkpoint")->required()->check(CLI::ExistingFile);
  cal->add_option("--test", cal_test, "Dataset directory or graph file")->required()->check(CLI::ExistingPath);
  cal->add_option("--out", cal_out, "CSV path (default stdout)");

  auto* bench = app.add_subcommand("bench", "Time the layers against graph size and width");
  std::size_t bench_reps = 3;
  std::uint64_t bench_seed = 0;
  std::string bench_csv;
  bench->add_option("--repetitions", bench_reps, "Timed repetitions per point");
  bench->add_option("--seed", bench_seed, "Seed of the random inputs");
  bench->add_option("--csv", bench_csv, "Write the timings as CSV");

  auto* abl = app.add_subcommand("ablate", "Train the full model and its ablations");
  ConfigArgs abl_args;
  fs::path abl_data;
  std::size_t abl_seeds = 3;
  std::string abl_out;
  bool abl_quiet = false;
  abl_args.add(abl);
  abl->add_option("--data", abl_data, "Dataset directory")->required()->check(CLI::ExistingDirectory);
  abl->add_option("--seeds", abl_seeds, "Seeds per variant");
  abl->add_option("--out", abl_out, "Write results as JSON");
  abl->add_flag("--quiet", abl_quiet, "No per-epoch log");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) cmd_generate(gen_split, gen_spec, gen_bias, gen_seed, gen_out);
    if (*pse) cmd_precompute(pse_data, pse_k);
    if (*tr) cmd_train(tr_args, tr_data, tr_out, tr_quiet);
    if (*ev) cmd_eval(ev_ckpt, ev_test, ev_dump, ev_nocal, ev_k);
    if (*cal) cmd_calibrate(cal_ckpt, cal_test, cal_out);
    if (*bench) cmd_bench(bench_reps, bench_seed, bench_csv);
    if (*abl) cmd_ablate(abl_args, abl_data, abl_seeds, abl_out, abl_quiet);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
