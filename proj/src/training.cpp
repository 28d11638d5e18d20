#include "igt/training.hpp"

#include <chrono>
#include <fstream>
#include <iomanip>

#include "igt/batching.hpp"
#include "igt/checkpoint.hpp"
#include "igt/errors.hpp"
#include "igt/metrics.hpp"

namespace igt {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// Fresh model with the values of `src`.
std::unique_ptr<InvariantModel> clone(const InvariantModel& src) {
  auto out = std::make_unique<InvariantModel>(src.config(), 0);
  out->params().copy_values_from(src.params());
  return out;
}

std::unique_ptr<ErmModel> clone(const ErmModel& src) {
  auto out = std::make_unique<ErmModel>(src.config(), 0);
  out->params().copy_values_from(src.params());
  return out;
}

void check_pse(const TrainConfig& config, const std::vector<Graph>& graphs) {
  if (config.method != Method::full || !config.model.use_pse) return;
  for (const auto& g : graphs) {
    if (!g.has_pse()) {
      throw ConfigError("graph '" + g.meta.id +
                        "' has no cached positional encodings; run `precompute-pse` first");
    }
    if (g.pse_dim != config.model.k) {
      throw ConfigError("cached positional encodings have width " + std::to_string(g.pse_dim) +
                        ", config expects k=" + std::to_string(config.model.k));
    }
  }
}

TrainResult train_full(const TrainConfig& config, const Dataset& data,
                       const TrainHooks& hooks) {
  TrainResult result;
  result.config = config;
  InvariantModel model(config.model, derive_seed(config.seed, 101));
  Adam adam(model.params().tensors(), {.lr = config.lr});
  std::mt19937_64 rng(derive_seed(config.seed, 202));
  const auto train_set = prepare(data.train);
  double best = -1;

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    const auto start = Clock::now();
    EpochMetrics m;
    m.epoch = epoch;
    EntropyTracker tracker;
    std::size_t correct = 0;
    const auto batches =
        make_batches(train_set.size(), config.batch_size, derive_seed(config.seed, 303, epoch));
    for (const auto& b : batches) {
      std::vector<const PreparedGraph*> graphs;
      std::vector<Tensor> xr;
      for (auto i : b.indices) {
        graphs.push_back(&train_set[i]);
        if (config.model.use_pse) {
          xr.push_back(random_features(train_set[i].graph->n_nodes, config.model.d_r, rng));
        } else {
          xr.emplace_back();
        }
      }
      const auto perms = draw_interventions(b.size(), config.interventions, rng);
      auto out = batch_objective(model, graphs, xr, config.lambda, perms, config.weights);
      adam.zero_grad();
      out.loss.total.backward();
      adam.step();
      for (std::size_t i = 0; i < graphs.size(); ++i) {
        tracker.add(out.forwards[i].dis.row_entropies);
        correct += argmax(out.forwards[i].y_c) == graphs[i]->label();
      }
      m.l_i += out.loss.l_i.item();
      m.l_s += out.loss.l_s.item();
      m.l_e += out.loss.l_e.item();
      m.l_pse += out.loss.l_pse.item();
      m.total += out.loss.total.item();
    }
    if (!model.params().all_finite()) {
      throw DomainError("non-finite parameters after epoch " + std::to_string(epoch));
    }
    const double nb = static_cast<double>(batches.size());
    m.l_i /= nb;
    m.l_s /= nb;
    m.l_e /= nb;
    m.l_pse /= nb;
    m.total /= nb;
    m.train_acc = static_cast<double>(correct) / static_cast<double>(train_set.size());
    m.mean_entropy = tracker.mean();
    m.val_acc = data.val.empty() ? m.train_acc : evaluate(model, data.val).accuracy;
    m.seconds = seconds_since(start);
    if (m.val_acc >= best) {
      best = m.val_acc;
      result.best_epoch = epoch;
      result.best_val_acc = m.val_acc;
      result.h_bar = m.mean_entropy;
      result.model = clone(model);
    }
    result.history.push_back(m);
    if (hooks.on_epoch) hooks.on_epoch(m);
    if (hooks.on_model) hooks.on_model(m, &model, nullptr);
  }
  return result;
}

TrainResult train_erm(const TrainConfig& config, const Dataset& data,
                      const TrainHooks& hooks) {
  TrainResult result;
  result.config = config;
  ErmModel model(config.model, derive_seed(config.seed, 101));
  Adam adam(model.params().tensors(), {.lr = config.lr});
  const auto train_set = prepare(data.train);
  double best = -1;

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    const auto start = Clock::now();
    EpochMetrics m;
    m.epoch = epoch;
    std::size_t correct = 0;
    const auto batches =
        make_batches(train_set.size(), config.batch_size, derive_seed(config.seed, 303, epoch));
    for (const auto& b : batches) {
      std::vector<Tensor> ce;
      for (auto i : b.indices) {
        auto logits = model.forward(train_set[i]);
        correct += argmax(logits) == train_set[i].label();
        ce.push_back(cross_entropy_logits(logits, train_set[i].label()));
      }
      auto loss = mean_n(ce);
      adam.zero_grad();
      loss.backward();
      adam.step();
      m.l_i += loss.item();
    }
    if (!model.params().all_finite()) {
      throw DomainError("non-finite parameters after epoch " + std::to_string(epoch));
    }
    m.l_i /= static_cast<double>(batches.size());
    m.total = m.l_i;
    m.train_acc = static_cast<double>(correct) / static_cast<double>(train_set.size());
    m.val_acc = data.val.empty() ? m.train_acc : evaluate(model, data.val);
    m.seconds = seconds_since(start);
    if (m.val_acc >= best) {
      best = m.val_acc;
      result.best_epoch = epoch;
      result.best_val_acc = m.val_acc;
      result.erm = clone(model);
    }
    result.history.push_back(m);
    if (hooks.on_epoch) hooks.on_epoch(m);
    if (hooks.on_model) hooks.on_model(m, nullptr, &model);
  }
  return result;
}

}  // namespace

void check_compatible(const ModelConfig& model, const std::vector<Graph>& graphs) {
  for (const auto& g : graphs) {
    if (g.label >= model.classes) {
      throw ConfigError("graph '" + g.meta.id + "' has label " + std::to_string(g.label) +
                        " but the model has " + std::to_string(model.classes) + " classes");
    }
    if (g.feature_dim != model.d_in) {
      throw ConfigError("graph '" + g.meta.id + "' has feature width " +
                        std::to_string(g.feature_dim) + ", model expects " +
                        std::to_string(model.d_in));
    }
  }
}

BatchOutputs batch_objective(const InvariantModel& model,
                             std::span<const PreparedGraph* const> batch,
                             std::span<const Tensor> random_x, double lambda,
                             const std::vector<std::vector<std::size_t>>& perms,
                             const ObjectiveWeights& weights) {
  BatchOutputs out;
  std::vector<Tensor> y_c, y_s, entropies, pse;
  std::vector<std::size_t> labels;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    auto f = model.forward(*batch[i], random_x[i]);
    y_c.push_back(f.y_c);
    y_s.push_back(f.y_s);
    entropies.push_back(f.dis.row_entropies);
    if (model.config().use_pse) pse.push_back(model.pse_loss(f, *batch[i]));
    labels.push_back(batch[i]->label());
    out.forwards.push_back(std::move(f));
  }
  auto l_i = intervention_loss(y_c, y_s, labels, lambda, perms);
  auto l_s = variant_branch_loss(y_s, labels);
  auto l_e = entropy_loss(entropies);
  Tensor l_pse = pse.empty() ? Tensor::scalar(0.0) : mean_n(pse);
  out.loss = total_objective(l_i, l_s, l_e, l_pse, weights);
  return out;
}

TrainResult train(const TrainConfig& config, const Dataset& data, const TrainHooks& hooks) {
  config.validate();
  if (data.train.size() < 2) throw ConfigError("training needs at least 2 graphs");
  check_compatible(config.model, data.train);
  check_compatible(config.model, data.val);
  if (config.method == Method::erm) return train_erm(config, data, hooks);
  check_pse(config, data.train);
  return train_full(config, data, hooks);
}

EvalReport evaluate(const InvariantModel& model, const std::vector<Graph>& graphs,
                    const EvalOptions& options) {
  check_compatible(model.config(), graphs);
  NoGradGuard no_grad;
  EvalReport r;
  std::vector<std::size_t> labels, pred, pred_cal;
  std::size_t agree = 0;
  for (const auto& g : graphs) {
    const auto pg = PreparedGraph::from(g);
    auto f = model.forward_eval(pg, 1.0);
    GraphEval ge;
    ge.id = g.meta.id;
    ge.label = g.label;
    ge.prediction = argmax(f.y_c);
    ge.prediction_combined = argmax(combine_prediction(f.y_c, f.y_s));
    ge.mean_entropy = mean(f.dis.row_entropies).item();
    ge.edge_scores = edge_scores(g, f.dis.m);
    ge.precision = precision_at_k(ge.edge_scores, g.invariant_edge_mask, options.k);
    ge.random_precision = random_precision_at_k(g.invariant_edge_mask);
    ge.prediction_calibrated = ge.prediction;
    if (options.calibrate) {
      ge.temperature = solve_temperature(f.dis.e, options.h_bar, options.calibration);
      if (ge.temperature.t != 1.0) {
        ge.prediction_calibrated = argmax(model.forward_eval(pg, ge.temperature.t).y_c);
      }
    }
    agree += ge.prediction == ge.prediction_combined;
    labels.push_back(ge.label);
    pred.push_back(ge.prediction);
    pred_cal.push_back(ge.prediction_calibrated);
    r.precision_at_k += ge.precision;
    r.random_precision_at_k += ge.random_precision;
    r.mean_entropy += ge.mean_entropy;
    r.graphs.push_back(std::move(ge));
  }
  if (!graphs.empty()) {
    const double n = static_cast<double>(graphs.size());
    r.accuracy = accuracy(pred, labels);
    r.accuracy_calibrated = accuracy(pred_cal, labels);
    r.combined_agreement = static_cast<double>(agree) / n;
    r.precision_at_k /= n;
    r.random_precision_at_k /= n;
    r.mean_entropy /= n;
  }
  return r;
}

double evaluate(const ErmModel& model, const std::vector<Graph>& graphs) {
  check_compatible(model.config(), graphs);
  NoGradGuard no_grad;
  std::vector<std::size_t> labels, pred;
  for (const auto& g : graphs) {
    labels.push_back(g.label);
    pred.push_back(argmax(model.forward(PreparedGraph::from(g))));
  }
  return accuracy(pred, labels);
}

void save_model(const std::filesystem::path& path, const TrainResult& result) {
  nlohmann::json meta = {{"format", "igt-model"},
                         {"config", to_json(result.config)},
                         {"h_bar", result.h_bar},
                         {"best_epoch", result.best_epoch},
                         {"best_val_acc", result.best_val_acc}};
  if (result.model) {
    save_checkpoint(path, meta.dump(), result.model->params());
  } else if (result.erm) {
    save_checkpoint(path, meta.dump(), result.erm->params());
  } else {
    throw UsageError("save_model: the run holds no trained parameters");
  }
}

LoadedModel load_model(const std::filesystem::path& path) {
  auto ckpt = load_checkpoint(path);
  LoadedModel out;
  try {
    out.metadata = nlohmann::json::parse(ckpt.metadata);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("checkpoint metadata is not valid JSON: ") + e.what());
  }
  if (out.metadata.value("format", "") != "igt-model" || !out.metadata.contains("config")) {
    throw ConfigError("checkpoint " + path.string() + " does not hold a model");
  }
  out.config = apply_overrides(TrainConfig{}, out.metadata["config"]);
  out.h_bar = out.metadata.value("h_bar", 0.0);
  if (out.config.method == Method::full) {
    out.model = std::make_unique<InvariantModel>(out.config.model, 0);
    restore_params(ckpt, out.model->params());
  } else {
    out.erm = std::make_unique<ErmModel>(out.config.model, 0);
    restore_params(ckpt, out.erm->params());
  }
  return out;
}

void write_metrics_csv(const std::filesystem::path& path,
                       const std::vector<EpochMetrics>& history) {
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot write " + path.string());
  os << "epoch,l_i,l_s,l_e,l_pse,total,train_acc,val_acc,mean_entropy\n";
  os << std::setprecision(17);
  for (const auto& m : history) {
    os << m.epoch << ',' << m.l_i << ',' << m.l_s << ',' << m.l_e << ',' << m.l_pse << ','
       << m.total << ',' << m.train_acc << ',' << m.val_acc << ',' << m.mean_entropy << '\n';
  }
}

}  // namespace igt
