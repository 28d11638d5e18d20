#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "igt/tensor.hpp"

namespace igt {

// Ordered collection of named learnable tensors. Names are unique and the
// insertion order is the checkpoint order.
class ParamSet {
 public:
  struct Entry {
    std::string name;
    Tensor value;
  };

  // Glorot-uniform weight matrix [fan_in x fan_out].
  Tensor add_weight(const std::string& name, std::size_t fan_in, std::size_t fan_out,
                    std::mt19937_64& rng);
  Tensor add_constant(const std::string& name, const Shape& shape, double value);
  Tensor add(const std::string& name, Tensor value);

  const std::vector<Entry>& entries() const noexcept { return entries_; }
  std::vector<Tensor> tensors() const;
  const Tensor& get(const std::string& name) const;
  std::size_t scalar_count() const;

  void zero_grad();
  // Copies values (not grads) from another set with identical names/shapes.
  void copy_values_from(const ParamSet& other);
  bool all_finite() const;

 private:
  std::vector<Entry> entries_;
};

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Adam with bias correction. State is keyed by position in the tensor list.
class Adam {
 public:
  Adam(std::vector<Tensor> params, AdamConfig config);

  void step();
  void zero_grad();
  std::uint64_t steps() const noexcept { return t_; }
  const AdamConfig& config() const noexcept { return config_; }

 private:
  std::vector<Tensor> params_;
  AdamConfig config_;
  std::vector<std::vector<double>> m_, v_;
  std::uint64_t t_ = 0;
};

}  // namespace igt
