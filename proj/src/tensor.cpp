// Copyright 2026 The LSRGAN Authors
// SPDX-License-Identifier: Apache-2.0

#include "lsrgan/tensor.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <sstream>
#include <unordered_set>

namespace lsrgan {

namespace {

thread_local bool grad_mode_enabled = true;
thread_local bool finite_checks_enabled = true;
std::atomic<std::uint64_t> sequence_counter{1};

template <typename T>
void check_finite(const std::vector<T>& values, const char* op) {
  if (!FiniteChecks::enabled()) return;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) {
      std::ostringstream msg;
      msg << op << ": non-finite value " << values[i] << " at flat index " << i;
      throw NumericError(msg.str());
    }
  }
}

}  // namespace

std::string to_string(const Shape& shape) {
  std::ostringstream out;
  out << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out << 'x';
    out << shape[i];
  }
  out << ']';
  return out.str();
}

std::size_t shape_numel(const Shape& shape) {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

bool GradMode::enabled() { return grad_mode_enabled; }
void GradMode::set_enabled(bool enabled) { grad_mode_enabled = enabled; }
bool FiniteChecks::enabled() { return finite_checks_enabled; }
void FiniteChecks::set_enabled(bool enabled) { finite_checks_enabled = enabled; }

std::uint64_t detail::next_sequence_number() { return sequence_counter.fetch_add(1); }

template <typename T>
detail::Node<T>& Tensor<T>::node() const {
  if (!node_) throw Error("use of an undefined tensor");
  return *node_;
}

template <typename T>
Tensor<T> Tensor<T>::from(Shape shape, std::vector<T> values, bool requires_grad) {
  for (auto d : shape) {
    if (d == 0) throw ShapeError("tensor shape " + to_string(shape) + " has a zero dimension");
  }
  if (shape_numel(shape) != values.size()) {
    throw ShapeError("tensor shape " + to_string(shape) + " holds " +
                     std::to_string(shape_numel(shape)) + " elements but " +
                     std::to_string(values.size()) + " values were given");
  }
  check_finite(values, "Tensor::from");
  auto node = std::make_shared<detail::Node<T>>();
  node->shape = std::move(shape);
  node->value = std::move(values);
  node->requires_grad = requires_grad;
  node->seq = detail::next_sequence_number();
  return Tensor(std::move(node));
}

template <typename T>
Tensor<T> Tensor<T>::zeros(Shape shape, bool requires_grad) {
  const auto n = shape_numel(shape);
  return from(std::move(shape), std::vector<T>(n, T{0}), requires_grad);
}

template <typename T>
Tensor<T> Tensor<T>::full(Shape shape, T value, bool requires_grad) {
  const auto n = shape_numel(shape);
  return from(std::move(shape), std::vector<T>(n, value), requires_grad);
}

template <typename T>
Tensor<T> Tensor<T>::scalar(T value, bool requires_grad) {
  return from({1}, {value}, requires_grad);
}

template <typename T>
std::size_t Tensor<T>::dim(std::size_t axis) const {
  const auto& s = node().shape;
  if (axis >= s.size()) {
    throw ShapeError("axis " + std::to_string(axis) + " out of range for shape " + to_string(s));
  }
  return s[axis];
}

template <typename T>
T Tensor<T>::item() const {
  if (numel() != 1) throw ShapeError("item() on non-scalar tensor of shape " + to_string(shape()));
  return node().value[0];
}

template <typename T>
Tensor<T>& Tensor<T>::set_requires_grad(bool requires_grad) {
  if (!is_leaf()) throw Error("set_requires_grad on a non-leaf tensor");
  node().requires_grad = requires_grad;
  return *this;
}

template <typename T>
void Tensor<T>::zero_grad() {
  auto& g = node().grad;
  std::fill(g.begin(), g.end(), T{0});
}

template <typename T>
std::span<T> Tensor<T>::mutable_data() {
  if (!is_leaf()) throw Error("mutable_data on a non-leaf tensor");
  return node().value;
}

template <typename T>
Tensor<T> Tensor<T>::detach() const {
  return from(shape(), node().value, false);
}

template <typename T>
Tensor<T> Tensor<T>::clone() const {
  return from(shape(), node().value, requires_grad() && is_leaf());
}

template <typename T>
Tensor<T> Tensor<T>::record(const char* op, Shape shape, std::vector<T> values,
                            std::vector<Tensor> parents,
                            std::function<void(std::span<const T>)> backward) {
  check_finite(values, op);
  auto node = std::make_shared<detail::Node<T>>();
  node->shape = std::move(shape);
  node->value = std::move(values);
  node->op = op;
  node->seq = detail::next_sequence_number();
  bool needs_grad = false;
  if (GradMode::enabled()) {
    for (const auto& p : parents) needs_grad = needs_grad || p.requires_grad();
  }
  if (needs_grad) {
    node->requires_grad = true;
    node->parents.reserve(parents.size());
    for (auto& p : parents) node->parents.push_back(p.node_);
    node->backward = std::move(backward);
  }
  return Tensor(std::move(node));
}

template <typename T>
void Tensor<T>::backward() const {
  ComputationTape<T>::record(*this).backward();
}

template <typename T>
ComputationTape<T> ComputationTape<T>::record(const Tensor<T>& root) {
  if (root.numel() != 1) {
    throw ShapeError("backward requires a scalar root, got shape " + to_string(root.shape()));
  }
  if (!root.requires_grad()) {
    throw Error("backward on a root that is detached from every trainable leaf");
  }
  ComputationTape tape;
  tape.root_ = root.node_;
  std::unordered_set<const detail::Node<T>*> seen;
  std::vector<std::shared_ptr<detail::Node<T>>> stack{root.node_};
  seen.insert(root.node_.get());
  while (!stack.empty()) {
    auto n = std::move(stack.back());
    stack.pop_back();
    for (const auto& p : n->parents) {
      if (p->requires_grad && seen.insert(p.get()).second) stack.push_back(p);
    }
    tape.nodes_.push_back(std::move(n));
  }
  std::sort(tape.nodes_.begin(), tape.nodes_.end(),
            [](const auto& a, const auto& b) { return a->seq < b->seq; });
  return tape;
}

template <typename T>
void ComputationTape<T>::backward() {
  for (auto& n : nodes_) {
    if (!n->is_leaf()) n->grad.clear();
  }
  root_->grad_buffer()[0] += T{1};
  for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) {
    auto& n = **it;
    if (n.is_leaf() || n.grad.empty()) continue;
    n.backward(n.grad);
    if (&n != root_.get()) {
      n.grad.clear();
      n.grad.shrink_to_fit();
    }
  }
}

template class Tensor<float>;
template class Tensor<double>;
template class ComputationTape<float>;
template class ComputationTape<double>;

}  // namespace lsrgan
