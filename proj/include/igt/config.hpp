#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "igt/calibration.hpp"
#include "igt/generator.hpp"
#include "igt/invariant_head.hpp"
#include "igt/model.hpp"

namespace igt {

enum class Method { full, erm };
std::string to_string(Method m);
Method method_from_string(const std::string& s);

struct TrainConfig {
  Method method = Method::full;
  std::size_t epochs = 100;
  ModelConfig model{.d = 128};
  double lambda = 10.0;
  ObjectiveWeights weights;
  std::size_t interventions = 4;
  std::size_t batch_size = 32;
  double lr = 1e-3;
  std::uint64_t seed = 0;
  bool calibrate = true;
  CalibrationConfig calibration;
  ShiftSpec data;

  // Hyperparameters of the given split with full-size widths.
  static TrainConfig defaults(SplitKind kind);
  // Reduced widths and epochs for single-core runs.
  static TrainConfig desk(SplitKind kind);

  // Ablations: no entropy loss and no calibration; no positional encoder.
  TrainConfig without_entropy() const;
  TrainConfig without_encoder() const;

  void validate() const;
};

nlohmann::json to_json(const TrainConfig& c);
// Applies the keys of `j` on top of `base`. Unknown keys raise ConfigError.
TrainConfig apply_overrides(TrainConfig base, const nlohmann::json& j);
TrainConfig load_config(const std::filesystem::path& path, TrainConfig base);

nlohmann::json to_json(const ShiftSpec& s);
ShiftSpec shift_spec_from_json(const nlohmann::json& j, ShiftSpec base);

}  // namespace igt
