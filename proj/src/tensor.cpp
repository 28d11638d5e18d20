#include "igt/tensor.hpp"

#include <algorithm>
#include <atomic>
#include <sstream>
#include <unordered_set>

#include "igt/errors.hpp"

namespace igt {

namespace {

std::atomic<std::uint64_t> g_next_id{1};

std::shared_ptr<detail::Node> new_node(const Shape& shape, std::vector<double> values) {
  if (shape_numel(shape) != values.size()) {
    throw DimensionError("tensor shape " + shape_str(shape) + " does not match " +
                         std::to_string(values.size()) + " values");
  }
  auto node = std::make_shared<detail::Node>();
  node->id = g_next_id.fetch_add(1, std::memory_order_relaxed);
  node->shape = shape;
  node->data = std::move(values);
  return node;
}

}  // namespace

std::size_t shape_numel(const Shape& shape) {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

std::string shape_str(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? "x" : "") << shape[i];
  os << ']';
  return os.str();
}

Tensor Tensor::zeros(const Shape& shape) { return full(shape, 0.0); }

Tensor Tensor::full(const Shape& shape, double value) {
  for (auto d : shape) {
    if (d == 0) throw DimensionError("tensor dimensions must be positive, got " + shape_str(shape));
  }
  return Tensor(new_node(shape, std::vector<double>(shape_numel(shape), value)));
}

Tensor Tensor::from(const Shape& shape, std::vector<double> values) {
  for (auto d : shape) {
    if (d == 0) throw DimensionError("tensor dimensions must be positive, got " + shape_str(shape));
  }
  return Tensor(new_node(shape, std::move(values)));
}

Tensor Tensor::scalar(double value) { return Tensor(new_node({}, {value})); }

Tensor Tensor::parameter(const Shape& shape, std::vector<double> values) {
  Tensor t = from(shape, std::move(values));
  t.node_->requires_grad = true;
  return t;
}

const Shape& Tensor::shape() const {
  if (!node_) throw UsageError("undefined tensor");
  return node_->shape;
}

std::size_t Tensor::numel() const { return shape_numel(shape()); }

std::size_t Tensor::rows() const {
  if (rank() != 2) throw DimensionError("rows() needs a 2-D tensor, got " + shape_str(shape()));
  return node_->shape[0];
}

std::size_t Tensor::cols() const {
  if (rank() != 2) throw DimensionError("cols() needs a 2-D tensor, got " + shape_str(shape()));
  return node_->shape[1];
}

std::span<const double> Tensor::data() const {
  if (!node_) throw UsageError("undefined tensor");
  return node_->data;
}

std::span<double> Tensor::mutable_data() {
  if (!node_) throw UsageError("undefined tensor");
  return node_->data;
}

double Tensor::item() const {
  if (numel() != 1) throw UsageError("item() on tensor of shape " + shape_str(shape()));
  return node_->data[0];
}

double Tensor::at(std::size_t i) const { return data()[i]; }

double Tensor::at(std::size_t r, std::size_t c) const { return data()[r * cols() + c]; }

namespace {
thread_local bool g_grad_enabled = true;
}

NoGradGuard::NoGradGuard() : previous_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = previous_; }
bool grad_enabled() noexcept { return g_grad_enabled; }

bool Tensor::requires_grad() const { return node_ && node_->requires_grad; }

bool Tensor::has_grad() const { return node_ && !node_->grad.empty(); }

std::span<const double> Tensor::grad() const {
  if (!node_) throw UsageError("undefined tensor");
  return node_->grad;
}

std::span<double> Tensor::mutable_grad() {
  if (!node_) throw UsageError("undefined tensor");
  return node_->ensure_grad();
}

void Tensor::zero_grad() {
  if (node_ && !node_->grad.empty()) std::fill(node_->grad.begin(), node_->grad.end(), 0.0);
}

std::uint64_t Tensor::tape_id() const { return node_ ? node_->id : 0; }

Tape Tape::record(const Tensor& root) {
  Tape tape;
  if (!root.defined() || !root.requires_grad()) return tape;
  std::unordered_set<const detail::Node*> seen;
  std::vector<std::shared_ptr<detail::Node>> stack{root.node()};
  seen.insert(root.node().get());
  while (!stack.empty()) {
    auto node = std::move(stack.back());
    stack.pop_back();
    for (const auto& p : node->parents) {
      if (p->requires_grad && seen.insert(p.get()).second) stack.push_back(p);
    }
    tape.nodes_.push_back(std::move(node));
  }
  std::sort(tape.nodes_.begin(), tape.nodes_.end(),
            [](const auto& a, const auto& b) { return a->id < b->id; });
  tape.entries_.reserve(tape.nodes_.size());
  for (const auto& n : tape.nodes_) {
    Entry e{n->id, {}};
    for (const auto& p : n->parents) {
      if (p->requires_grad) e.parent_ids.push_back(p->id);
    }
    tape.entries_.push_back(std::move(e));
  }
  return tape;
}

void Tensor::backward() const {
  if (!node_) throw UsageError("backward() on undefined tensor");
  if (node_->data.size() != 1) {
    throw UsageError("backward() needs a scalar root, got shape " + shape_str(node_->shape));
  }
  if (!node_->requires_grad) return;
  Tape tape = Tape::record(*this);
  for (auto& n : tape.nodes_) {
    if (!n->is_leaf) n->grad.assign(n->data.size(), 0.0);
  }
  node_->ensure_grad()[0] += 1.0;
  for (auto it = tape.nodes_.rbegin(); it != tape.nodes_.rend(); ++it) {
    auto& n = **it;
    if (n.backward) n.backward(n);
  }
}

}  // namespace igt
