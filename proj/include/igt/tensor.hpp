#pragma once

// Dense float64 tensors with define-by-run reverse-mode differentiation.
//
// A Tensor is a cheap handle onto a shared graph node. Operations in ops.hpp
// create new nodes that remember their parents and a closure which pushes the
// output gradient back to them. Node ids increase monotonically, so sorting
// the reachable set by id yields a valid topological order; that ordering is
// exposed as a Tape.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace igt {

using Shape = std::vector<std::size_t>;

std::size_t shape_numel(const Shape& shape);
std::string shape_str(const Shape& shape);

namespace detail {

struct Node {
  std::uint64_t id = 0;
  Shape shape;
  std::vector<double> data;
  std::vector<double> grad;  // empty until first accumulation
  bool requires_grad = false;
  bool is_leaf = true;
  std::vector<std::shared_ptr<Node>> parents;
  // Reads this->grad and accumulates into parents' grads.
  std::function<void(Node&)> backward;

  std::vector<double>& ensure_grad() {
    if (grad.empty()) grad.assign(data.size(), 0.0);
    return grad;
  }
};

}  // namespace detail

class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(const Shape& shape);
  static Tensor full(const Shape& shape, double value);
  static Tensor from(const Shape& shape, std::vector<double> values);
  static Tensor scalar(double value);
  // Leaf that accumulates gradients.
  static Tensor parameter(const Shape& shape, std::vector<double> values);

  bool defined() const noexcept { return node_ != nullptr; }
  const Shape& shape() const;
  std::size_t rank() const { return shape().size(); }
  std::size_t numel() const;
  std::size_t rows() const;  // 2-D only
  std::size_t cols() const;  // 2-D only

  std::span<const double> data() const;
  // Direct write access; intended for leaves (parameters, inputs).
  std::span<double> mutable_data();
  double item() const;
  double at(std::size_t i) const;
  double at(std::size_t r, std::size_t c) const;

  bool requires_grad() const;
  bool has_grad() const;
  std::span<const double> grad() const;
  std::span<double> mutable_grad();
  void zero_grad();

  // Reverse pass from a single-element tensor. Leaf gradients accumulate
  // across calls; intermediate gradients are recomputed each call.
  void backward() const;

  std::uint64_t tape_id() const;

  // Internal: used by ops.
  const std::shared_ptr<detail::Node>& node() const { return node_; }
  explicit Tensor(std::shared_ptr<detail::Node> node) : node_(std::move(node)) {}

 private:
  std::shared_ptr<detail::Node> node_;
};

// While alive, ops on this thread record no backward graph.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};
bool grad_enabled() noexcept;

// Topologically ordered view of the nodes reachable from a root that take
// part in differentiation.
class Tape {
 public:
  struct Entry {
    std::uint64_t id;
    std::vector<std::uint64_t> parent_ids;
  };

  static Tape record(const Tensor& root);

  const std::vector<Entry>& entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }

 private:
  friend class Tensor;
  std::vector<std::shared_ptr<detail::Node>> nodes_;
  std::vector<Entry> entries_;
};

}  // namespace igt
