#include "igt/params.hpp"

#include <algorithm>
#include <cmath>

#include "igt/errors.hpp"

namespace igt {

Tensor ParamSet::add_weight(const std::string& name, std::size_t fan_in, std::size_t fan_out,
                            std::mt19937_64& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  std::uniform_real_distribution<double> dist(-limit, limit);
  std::vector<double> values(fan_in * fan_out);
  for (auto& v : values) v = dist(rng);
  return add(name, Tensor::parameter({fan_in, fan_out}, std::move(values)));
}

Tensor ParamSet::add_constant(const std::string& name, const Shape& shape, double value) {
  return add(name, Tensor::parameter(shape, std::vector<double>(shape_numel(shape), value)));
}

Tensor ParamSet::add(const std::string& name, Tensor value) {
  for (const auto& e : entries_) {
    if (e.name == name) throw UsageError("duplicate parameter name: " + name);
  }
  entries_.push_back({name, value});
  return value;
}

std::vector<Tensor> ParamSet::tensors() const {
  std::vector<Tensor> out;
  out.reserve(entries_.size());
  for (const auto& e : entries_) out.push_back(e.value);
  return out;
}

const Tensor& ParamSet::get(const std::string& name) const {
  for (const auto& e : entries_) {
    if (e.name == name) return e.value;
  }
  throw UsageError("unknown parameter: " + name);
}

std::size_t ParamSet::scalar_count() const {
  std::size_t n = 0;
  for (const auto& e : entries_) n += e.value.numel();
  return n;
}

void ParamSet::zero_grad() {
  for (auto& e : entries_) e.value.zero_grad();
}

void ParamSet::copy_values_from(const ParamSet& other) {
  if (other.entries_.size() != entries_.size()) {
    throw DimensionError("parameter sets differ in size");
  }
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    auto& dst = entries_[i];
    const auto& src = other.entries_[i];
    if (dst.name != src.name || dst.value.shape() != src.value.shape()) {
      throw DimensionError("parameter mismatch at " + dst.name);
    }
    auto from = src.value.data();
    std::copy(from.begin(), from.end(), dst.value.mutable_data().begin());
  }
}

bool ParamSet::all_finite() const {
  for (const auto& e : entries_) {
    for (double v : e.value.data()) {
      if (!std::isfinite(v)) return false;
    }
  }
  return true;
}

Adam::Adam(std::vector<Tensor> params, AdamConfig config)
    : params_(std::move(params)), config_(config) {
  if (!(config_.lr > 0)) throw ConfigError("Adam learning rate must be positive");
  for (const auto& p : params_) {
    m_.emplace_back(p.numel(), 0.0);
    v_.emplace_back(p.numel(), 0.0);
  }
}

void Adam::step() {
  ++t_;
  const double bc1 = 1.0 - std::pow(config_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(config_.beta2, static_cast<double>(t_));
  for (std::size_t k = 0; k < params_.size(); ++k) {
    auto& p = params_[k];
    if (!p.has_grad()) continue;
    auto g = p.grad();
    auto x = p.mutable_data();
    auto& m = m_[k];
    auto& v = v_[k];
    for (std::size_t i = 0; i < x.size(); ++i) {
      m[i] = config_.beta1 * m[i] + (1 - config_.beta1) * g[i];
      v[i] = config_.beta2 * v[i] + (1 - config_.beta2) * g[i] * g[i];
      const double mhat = m[i] / bc1;
      const double vhat = v[i] / bc2;
      x[i] -= config_.lr * mhat / (std::sqrt(vhat) + config_.eps);
    }
  }
}

void Adam::zero_grad() {
  for (auto& p : params_) p.zero_grad();
}

}  // namespace igt
