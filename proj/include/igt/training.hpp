#pragma once

#include <filesystem>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "igt/config.hpp"
#include "igt/model.hpp"

namespace igt {

struct EpochMetrics {
  std::size_t epoch = 0;
  double l_i = 0, l_s = 0, l_e = 0, l_pse = 0, total = 0;  // batch means
  double train_acc = 0;     // running accuracy of the training forward passes
  double val_acc = 0;
  double mean_entropy = 0;  // H_bar of this epoch
  double seconds = 0;
};

struct TrainResult {
  TrainConfig config;
  std::unique_ptr<InvariantModel> model;  // method full: best-validation parameters
  std::unique_ptr<ErmModel> erm;          // method erm
  std::size_t best_epoch = 0;
  double best_val_acc = 0;
  double h_bar = 0;  // mean attention entropy of the selected epoch
  std::vector<EpochMetrics> history;
};

using EpochCallback = std::function<void(const EpochMetrics&)>;
// Sees the live model after each epoch (exactly one of the pointers is set).
using ModelObserver = std::function<void(const EpochMetrics&, const InvariantModel*, const ErmModel*)>;

struct TrainHooks {
  EpochCallback on_epoch;
  ModelObserver on_model;
};

// One optimization run on in-memory data (PSEs must already be cached for the
// full method with the encoder enabled).
TrainResult train(const TrainConfig& config, const Dataset& data, const TrainHooks& hooks = {});

// Loss breakdown of one batch of the full method (used by train and the tests).
struct BatchOutputs {
  LossBreakdown loss;
  std::vector<GraphForward> forwards;
};
BatchOutputs batch_objective(const InvariantModel& model, std::span<const PreparedGraph* const> batch,
                             std::span<const Tensor> random_x, double lambda,
                             const std::vector<std::vector<std::size_t>>& perms,
                             const ObjectiveWeights& weights);

struct EvalOptions {
  bool calibrate = false;
  double h_bar = 0;
  CalibrationConfig calibration;
  std::size_t k = 10;
};

struct GraphEval {
  std::string id;
  std::size_t label = 0;
  std::size_t prediction = 0;             // argmax y_c at t = 1
  std::size_t prediction_combined = 0;    // argmax y_c * sigmoid(y_s)
  std::size_t prediction_calibrated = 0;  // argmax y_c at t = t_G
  TemperatureSolution temperature;
  double precision = 0;
  double random_precision = 0;
  double mean_entropy = 0;
  std::vector<double> edge_scores;
};

struct EvalReport {
  double accuracy = 0;
  double accuracy_calibrated = 0;  // equals accuracy when not calibrating
  double combined_agreement = 0;   // share of graphs where infer == combined argmax
  double precision_at_k = 0;
  double random_precision_at_k = 0;
  double mean_entropy = 0;
  std::vector<GraphEval> graphs;
};

EvalReport evaluate(const InvariantModel& model, const std::vector<Graph>& graphs,
                    const EvalOptions& options = {});
double evaluate(const ErmModel& model, const std::vector<Graph>& graphs);

// Throws ConfigError when graphs do not fit the model's class count or feature width.
void check_compatible(const ModelConfig& model, const std::vector<Graph>& graphs);

// ---- persistence -----------------------------------------------------------

void save_model(const std::filesystem::path& path, const TrainResult& result);

struct LoadedModel {
  TrainConfig config;
  double h_bar = 0;
  std::unique_ptr<InvariantModel> model;
  std::unique_ptr<ErmModel> erm;
  nlohmann::json metadata;
};
LoadedModel load_model(const std::filesystem::path& path);

void write_metrics_csv(const std::filesystem::path& path, const std::vector<EpochMetrics>& history);

}  // namespace igt
