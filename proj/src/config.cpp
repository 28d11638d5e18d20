#include "igt/config.hpp"

#include <fstream>
#include <set>

#include "igt/errors.hpp"

namespace igt {

using nlohmann::json;

std::string to_string(Method m) { return m == Method::full ? "full" : "erm"; }

Method method_from_string(const std::string& s) {
  if (s == "full") return Method::full;
  if (s == "erm") return Method::erm;
  throw ConfigError("unknown method '" + s + "' (expected full or erm)");
}

TrainConfig TrainConfig::defaults(SplitKind kind) {
  TrainConfig c;
  c.data = ShiftSpec::defaults(kind);
  c.lambda = kind == SplitKind::basis ? 10.0 : 1.0;
  c.weights = {.alpha_s = 1.0, .alpha_e = 0.1, .alpha_pse = 0.01};
  return c;
}

TrainConfig TrainConfig::desk(SplitKind kind) {
  auto c = defaults(kind);
  c.model.d = 32;
  c.model.d_r = 16;
  c.model.d_pse = 16;
  c.epochs = 20;
  return c;
}

TrainConfig TrainConfig::without_entropy() const {
  auto c = *this;
  c.weights.alpha_e = 0.0;
  c.calibrate = false;
  return c;
}

TrainConfig TrainConfig::without_encoder() const {
  auto c = *this;
  c.model.use_pse = false;
  return c;
}

void TrainConfig::validate() const {
  model.validate();
  weights.validate();
  calibration.validate();
  data.validate();
  if (epochs == 0) throw ConfigError("epochs must be positive");
  if (batch_size < 2) throw ConfigError("batch_size must be at least 2");
  if (interventions == 0) throw ConfigError("interventions must be positive");
  if (!(lr > 0)) throw ConfigError("lr must be positive");
  if (lambda < 0) throw ConfigError("lambda must be nonnegative");
  if (model.d_in != data.feature_dim) {
    throw ConfigError("model.d_in (" + std::to_string(model.d_in) +
                      ") differs from data.feature_dim (" + std::to_string(data.feature_dim) + ")");
  }
}

namespace {

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (!allowed.count(key)) throw ConfigError("unknown key '" + key + "' in " + where);
  }
}

template <class T>
void read(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
  }
}

json size_json(const SizeRange& r) { return json::array({r.lo, r.hi}); }

SizeRange size_from_json(const json& j, const char* key) {
  if (!j.is_array() || j.size() != 2) {
    throw ConfigError(std::string("'") + key + "' must be a [lo, hi] pair");
  }
  return {j[0].get<std::size_t>(), j[1].get<std::size_t>()};
}

}  // namespace

json to_json(const ShiftSpec& s) {
  return {{"split_kind", to_string(s.split_kind)}, {"bias", s.bias},
          {"train_sizes", size_json(s.train_sizes)}, {"val_sizes", size_json(s.val_sizes)},
          {"test_sizes", size_json(s.test_sizes)},   {"n_train", s.n_train},
          {"n_val", s.n_val},                        {"n_test", s.n_test},
          {"feature_dim", s.feature_dim}};
}

ShiftSpec shift_spec_from_json(const json& j, ShiftSpec base) {
  check_keys(j,
             {"split_kind", "bias", "train_sizes", "val_sizes", "test_sizes", "n_train", "n_val",
              "n_test", "feature_dim"},
             "data");
  if (j.contains("split_kind")) {
    // switching kinds starts from that kind's defaults
    auto kind = split_kind_from_string(j.at("split_kind").get<std::string>());
    if (kind != base.split_kind) base = ShiftSpec::defaults(kind);
  }
  read(j, "bias", base.bias);
  if (j.contains("train_sizes")) base.train_sizes = size_from_json(j["train_sizes"], "train_sizes");
  if (j.contains("val_sizes")) base.val_sizes = size_from_json(j["val_sizes"], "val_sizes");
  if (j.contains("test_sizes")) base.test_sizes = size_from_json(j["test_sizes"], "test_sizes");
  read(j, "n_train", base.n_train);
  read(j, "n_val", base.n_val);
  read(j, "n_test", base.n_test);
  read(j, "feature_dim", base.feature_dim);
  return base;
}

json to_json(const TrainConfig& c) {
  json model;
  to_json(model, c.model);
  return {{"method", to_string(c.method)},
          {"epochs", c.epochs},
          {"model", model},
          {"lambda", c.lambda},
          {"alpha_s", c.weights.alpha_s},
          {"alpha_e", c.weights.alpha_e},
          {"alpha_pse", c.weights.alpha_pse},
          {"interventions", c.interventions},
          {"batch_size", c.batch_size},
          {"lr", c.lr},
          {"seed", c.seed},
          {"calibrate", c.calibrate},
          {"calibration",
           {{"t_min", c.calibration.t_min},
            {"t_max", c.calibration.t_max},
            {"tol", c.calibration.tol},
            {"t_tol", c.calibration.t_tol},
            {"max_iter", c.calibration.max_iter}}},
          {"data", to_json(c.data)}};
}

TrainConfig apply_overrides(TrainConfig base, const json& j) {
  check_keys(j,
             {"method", "epochs", "model", "lambda", "alpha_s", "alpha_e", "alpha_pse",
              "interventions", "batch_size", "lr", "seed", "calibrate", "calibration", "data"},
             "config");
  if (j.contains("method")) base.method = method_from_string(j.at("method").get<std::string>());
  read(j, "epochs", base.epochs);
  if (j.contains("model")) {
    check_keys(j["model"],
               {"d_in", "d", "heads", "backbone_layers", "d_r", "d_pse", "k", "classes", "use_pse"},
               "model");
    try {
      from_json(j["model"], base.model);
    } catch (const json::exception& e) {
      throw ConfigError(std::string("bad model config: ") + e.what());
    }
  }
  read(j, "lambda", base.lambda);
  read(j, "alpha_s", base.weights.alpha_s);
  read(j, "alpha_e", base.weights.alpha_e);
  read(j, "alpha_pse", base.weights.alpha_pse);
  read(j, "interventions", base.interventions);
  read(j, "batch_size", base.batch_size);
  read(j, "lr", base.lr);
  read(j, "seed", base.seed);
  read(j, "calibrate", base.calibrate);
  if (j.contains("calibration")) {
    const auto& cj = j["calibration"];
    check_keys(cj, {"t_min", "t_max", "tol", "t_tol", "max_iter"}, "calibration");
    read(cj, "t_min", base.calibration.t_min);
    read(cj, "t_max", base.calibration.t_max);
    read(cj, "tol", base.calibration.tol);
    read(cj, "t_tol", base.calibration.t_tol);
    read(cj, "max_iter", base.calibration.max_iter);
  }
  if (j.contains("data")) base.data = shift_spec_from_json(j["data"], base.data);
  return base;
}

TrainConfig load_config(const std::filesystem::path& path, TrainConfig base) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config file " + path.string());
  json j;
  try {
    is >> j;
  } catch (const json::exception& e) {
    throw ConfigError("config file " + path.string() + " is not valid JSON: " + e.what());
  }
  return apply_overrides(std::move(base), j);
}

}  // namespace igt
