// Copyright 2026 The LSRGAN Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "lsrgan/error.hpp"

namespace lsrgan {

using Shape = std::vector<std::size_t>;

std::string to_string(const Shape& shape);
std::size_t shape_numel(const Shape& shape);

/// Thread-local switch for graph recording. While disabled, operations
/// produce plain values and never record backward rules.
class GradMode {
 public:
  static bool enabled();
  static void set_enabled(bool enabled);
};

class NoGradGuard {
 public:
  NoGradGuard() : previous_(GradMode::enabled()) { GradMode::set_enabled(false); }
  ~NoGradGuard() { GradMode::set_enabled(previous_); }
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

/// Thread-local switch for the finiteness checks performed at construction
/// and after every operation. Callers that deliberately carry NaN/Inf
/// values disable it with AllowNonFiniteGuard.
class FiniteChecks {
 public:
  static bool enabled();
  static void set_enabled(bool enabled);
};

class AllowNonFiniteGuard {
 public:
  AllowNonFiniteGuard() : previous_(FiniteChecks::enabled()) { FiniteChecks::set_enabled(false); }
  ~AllowNonFiniteGuard() { FiniteChecks::set_enabled(previous_); }
  AllowNonFiniteGuard(const AllowNonFiniteGuard&) = delete;
  AllowNonFiniteGuard& operator=(const AllowNonFiniteGuard&) = delete;

 private:
  bool previous_;
};

namespace detail {

template <typename T>
struct Node {
  Shape shape;
  std::vector<T> value;
  std::vector<T> grad;  // empty until the first accumulation
  bool requires_grad = false;
  std::uint64_t seq = 0;
  const char* op = "leaf";
  std::vector<std::shared_ptr<Node>> parents;
  // Reads the gradient flowing into this node and accumulates into parents.
  std::function<void(std::span<const T>)> backward;

  bool is_leaf() const { return !backward; }
  std::vector<T>& grad_buffer() {
    if (grad.empty()) grad.assign(value.size(), T{0});
    return grad;
  }
};

std::uint64_t next_sequence_number();

}  // namespace detail

template <typename T>
class ComputationTape;

/// Dense row-major N-d array with an optional gradient record.
///
/// A Tensor is a handle: copies share the underlying node. Values are
/// immutable after construction; the only mutations are gradient
/// accumulation and optimizer updates of leaf parameters through
/// mutable_data().
template <typename T>
class Tensor {
 public:
  using value_type = T;
  using NodePtr = std::shared_ptr<detail::Node<T>>;

  Tensor() = default;

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor full(Shape shape, T value, bool requires_grad = false);
  static Tensor from(Shape shape, std::vector<T> values, bool requires_grad = false);
  static Tensor scalar(T value, bool requires_grad = false);

  bool defined() const { return static_cast<bool>(node_); }
  const Shape& shape() const { return node().shape; }
  std::size_t rank() const { return node().shape.size(); }
  std::size_t dim(std::size_t axis) const;
  std::size_t numel() const { return node().value.size(); }

  std::span<const T> data() const { return node().value; }
  T at(std::size_t flat_index) const { return node().value.at(flat_index); }
  T item() const;

  bool requires_grad() const { return node().requires_grad; }
  bool is_leaf() const { return node().is_leaf(); }
  // Leaves only: marks this tensor as a trainable parameter (or not).
  Tensor& set_requires_grad(bool requires_grad);

  bool has_grad() const { return !node().grad.empty(); }
  std::span<const T> grad() const { return node().grad; }
  void zero_grad();

  // Leaves only. Graphs recorded before the mutation keep referring to the
  // same storage, so mutate only between iterations.
  std::span<T> mutable_data();

  Tensor detach() const;
  Tensor clone() const;
  template <typename U>
  Tensor<U> cast() const {
    std::vector<U> out(numel());
    const auto src = data();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = static_cast<U>(src[i]);
    return Tensor<U>::from(shape(), std::move(out));
  }

  // Accumulates dSelf/dLeaf into every requires_grad leaf reachable from
  // this scalar tensor.
  void backward() const;

  const char* op_name() const { return node().op; }
  std::uint64_t sequence() const { return node().seq; }

  // Used by operation implementations to record a node.
  static Tensor record(const char* op, Shape shape, std::vector<T> values,
                       std::vector<Tensor> parents,
                       std::function<void(std::span<const T>)> backward);
  const NodePtr& node_ptr() const { return node_; }

 private:
  explicit Tensor(NodePtr node) : node_(std::move(node)) {}
  detail::Node<T>& node() const;

  NodePtr node_;

  friend class ComputationTape<T>;
};

/// Recorded operations reachable from a scalar root, in creation order.
/// Replaying visits nodes in exact reverse creation order; every node's
/// inputs precede it. Intermediate gradients are rebuilt on each replay
/// while leaf gradients accumulate.
template <typename T>
class ComputationTape {
 public:
  static ComputationTape record(const Tensor<T>& root);

  std::size_t size() const { return nodes_.size(); }
  void backward();

 private:
  std::shared_ptr<detail::Node<T>> root_;
  std::vector<std::shared_ptr<detail::Node<T>>> nodes_;  // ascending seq
};

using Tensor32 = Tensor<float>;
using Tensor64 = Tensor<double>;

extern template class Tensor<float>;
extern template class Tensor<double>;
extern template class ComputationTape<float>;
extern template class ComputationTape<double>;

}  // namespace lsrgan
