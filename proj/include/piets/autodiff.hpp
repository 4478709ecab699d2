// Copyright (c) 2026 The PIETS Authors
// SPDX-License-Identifier: Apache-2.0
//
// Reverse-mode automatic differentiation over dense tensors.
//
// A graph is built eagerly: every operation computes its value immediately
// and records its parents plus a closure that pushes the upstream gradient
// back to them. `backward` walks the graph in reverse topological order.
//
// Shape rules:
//   * matmul accepts [m x k]·[k x n], [k]·[k x n] -> [n], [m x k]·[k] -> [m]
//     and [k]·[k] -> [1].
//   * add/sub accept equal shapes, or a matrix [m x n] followed by a row
//     vector [n] that is broadcast over the rows (the bias rule). No other
//     broadcasting exists.
//   * mul requires equal shapes.

#pragma once

#include <functional>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "piets/tensor.hpp"

namespace piets {

struct Node;
using Var = std::shared_ptr<Node>;

struct Node {
  Tensor value;
  /// Allocated for every node that needs a gradient; same shape as value.
  Tensor grad;
  std::vector<Var> parents;
  /// Reads this node's grad and accumulates into the parents' grads.
  std::function<void(Node&)> backward_fn;
  bool needs_grad = false;

  bool is_leaf() const noexcept { return !backward_fn; }
};

/// A named trainable leaf.
struct Parameter {
  std::string name;
  Var node;

  const Tensor& value() const { return node->value; }
  Tensor& value() { return node->value; }
  const Tensor& grad() const { return node->grad; }
};

/// Ordered collection of parameters with unique names. Iteration order is
/// insertion order, which keeps optimizer updates and serialization stable.
class ParameterStore {
 public:
  Var add(const std::string& name, Tensor init);

  std::size_t size() const noexcept { return params_.size(); }
  bool contains(const std::string& name) const { return index_.contains(name); }
  Parameter& at(const std::string& name);
  const Parameter& at(const std::string& name) const;

  std::span<Parameter> all() noexcept { return params_; }
  std::span<const Parameter> all() const noexcept { return params_; }
  auto begin() noexcept { return params_.begin(); }
  auto end() noexcept { return params_.end(); }
  auto begin() const noexcept { return params_.begin(); }
  auto end() const noexcept { return params_.end(); }

  void zero_grads();

 private:
  std::vector<Parameter> params_;
  std::map<std::string, std::size_t> index_;
};

namespace ad {

/// Leaf that does not receive gradients.
Var constant(Tensor value);
/// Leaf that receives gradients; grad starts at zero.
Var variable(Tensor value);

Var matmul(const Var& a, const Var& b);
Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);
Var scale(const Var& x, double factor);
Var tanh(const Var& x);
Var sigmoid(const Var& x);
/// relu'(0) is taken as 0.
Var relu(const Var& x);

enum class Pointwise { add, sub, mul, tanh, sigmoid, relu };
/// Dispatches to the pointwise operations above; unary ops take one argument,
/// binary ops two.
Var elementwise(Pointwise op, std::span<const Var> args);

/// Softmax over a vector, stabilized by subtracting the maximum.
Var softmax(const Var& x);

/// Concatenates along `axis`; -1 means the last axis.
Var concat(std::span<const Var> parts, int axis = -1);
/// Stacks equal-length vectors into a matrix, one per row.
Var stack_rows(std::span<const Var> rows);
/// Row `i` of a matrix, as a vector.
Var row(const Var& x, std::size_t i);
Var reshape(const Var& x, Shape shape);

Var sum(const Var& x);
Var mean(const Var& x);

/// Accumulates d(loss)/d(leaf) into every reachable leaf that needs a
/// gradient. Intermediate gradients are recomputed from zero on each call,
/// so calling twice without zeroing leaves doubles their gradients.
void backward(const Var& loss);

}  // namespace ad

}  // namespace piets
