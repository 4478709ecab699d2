// Copyright (c) 2026 The PIETS Authors
// SPDX-License-Identifier: Apache-2.0

#include "piets/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "piets/errors.hpp"

namespace piets {

Var ParameterStore::add(const std::string& name, Tensor init) {
  if (index_.contains(name)) throw ContractError("duplicate parameter name '" + name + "'");
  auto node = ad::variable(std::move(init));
  index_.emplace(name, params_.size());
  params_.push_back({name, node});
  return node;
}

Parameter& ParameterStore::at(const std::string& name) {
  auto it = index_.find(name);
  if (it == index_.end()) throw ContractError("unknown parameter '" + name + "'");
  return params_[it->second];
}

const Parameter& ParameterStore::at(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw ContractError("unknown parameter '" + name + "'");
  return params_[it->second];
}

void ParameterStore::zero_grads() {
  for (auto& p : params_) p.node->grad.fill(0.0);
}

namespace ad {

namespace {

double stable_sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

bool any_needs_grad(std::span<const Var> parents) {
  return std::any_of(parents.begin(), parents.end(), [](const Var& p) { return p->needs_grad; });
}

Var make_node(Tensor value, std::vector<Var> parents, std::function<void(Node&)> fn) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  n->needs_grad = any_needs_grad(parents);
  if (n->needs_grad) {
    n->parents = std::move(parents);
    n->backward_fn = std::move(fn);
  }
  return n;
}

// C[m x n] += A[m x k] * B[k x n]
void gemm(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
          std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    double* crow = c + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double av = a[i * k + p];
      if (av == 0.0) continue;
      const double* brow = b + p * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

// dA[m x k] += G[m x n] * B^T
void gemm_nt(const double* g, const double* b, double* da, std::size_t m, std::size_t k,
             std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    const double* grow = g + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double* brow = b + p * n;
      double acc = 0.0;
      for (std::size_t j = 0; j < n; ++j) acc += grow[j] * brow[j];
      da[i * k + p] += acc;
    }
  }
}

// dB[k x n] += A^T * G[m x n]
void gemm_tn(const double* a, const double* g, double* db, std::size_t m, std::size_t k,
             std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    const double* grow = g + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double av = a[i * k + p];
      if (av == 0.0) continue;
      double* dbrow = db + p * n;
      for (std::size_t j = 0; j < n; ++j) dbrow[j] += av * grow[j];
    }
  }
}

enum class Bcast { none, rows };

Bcast binary_rule(const char* op, const Tensor& a, const Tensor& b) {
  if (a.shape() == b.shape()) return Bcast::none;
  if (a.rank() == 2 && b.rank() == 1 && a.cols() == b.size()) return Bcast::rows;
  throw DimensionError(std::string(op) + ": incompatible shapes " + shape_string(a.shape()) +
                       " and " + shape_string(b.shape()));
}

template <typename Fwd, typename Dfn>
Var unary(const Var& x, Fwd fwd, Dfn dfn) {
  Tensor out(x->value.shape());
  const auto& xv = x->value.storage();
  auto& ov = out.storage();
  for (std::size_t i = 0; i < ov.size(); ++i) ov[i] = fwd(xv[i]);
  return make_node(std::move(out), {x}, [dfn](Node& self) {
    auto& gx = self.parents[0]->grad.storage();
    const auto& y = self.value.storage();
    const auto& g = self.grad.storage();
    const auto& xin = self.parents[0]->value.storage();
    for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * dfn(xin[i], y[i]);
  });
}

void accumulate(Node& parent, const Tensor& g) {
  if (!parent.needs_grad) return;
  auto& pg = parent.grad.storage();
  const auto& gv = g.storage();
  for (std::size_t i = 0; i < pg.size(); ++i) pg[i] += gv[i];
}

}  // namespace

Var constant(Tensor value) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  return n;
}

Var variable(Tensor value) {
  auto n = std::make_shared<Node>();
  n->grad = Tensor(value.shape());
  n->value = std::move(value);
  n->needs_grad = true;
  return n;
}

Var matmul(const Var& a, const Var& b) {
  const Tensor& av = a->value;
  const Tensor& bv = b->value;
  if (av.rank() > 2 || bv.rank() > 2) {
    throw DimensionError("matmul: operands must be vectors or matrices, got " +
                         shape_string(av.shape()) + " and " + shape_string(bv.shape()));
  }
  const std::size_t m = av.rank() == 2 ? av.dim(0) : 1;
  const std::size_t k = av.cols();
  const std::size_t kb = bv.rank() == 2 ? bv.dim(0) : bv.size();
  const std::size_t n = bv.rank() == 2 ? bv.dim(1) : 1;
  if (k != kb) {
    throw DimensionError("matmul: inner dimensions differ for " + shape_string(av.shape()) +
                         " and " + shape_string(bv.shape()));
  }
  Shape out_shape;
  if (av.rank() == 2 && bv.rank() == 2) out_shape = {m, n};
  else if (av.rank() == 1 && bv.rank() == 2) out_shape = {n};
  else if (av.rank() == 2 && bv.rank() == 1) out_shape = {m};
  else out_shape = {1};

  Tensor out(out_shape);
  gemm(av.storage().data(), bv.storage().data(), out.storage().data(), m, k, n);
  return make_node(std::move(out), {a, b}, [m, k, n](Node& self) {
    Node& pa = *self.parents[0];
    Node& pb = *self.parents[1];
    const double* g = self.grad.storage().data();
    if (pa.needs_grad) gemm_nt(g, pb.value.storage().data(), pa.grad.storage().data(), m, k, n);
    if (pb.needs_grad) gemm_tn(pa.value.storage().data(), g, pb.grad.storage().data(), m, k, n);
  });
}

namespace {

Var add_sub(const Var& a, const Var& b, double sign, const char* name) {
  const Bcast rule = binary_rule(name, a->value, b->value);
  Tensor out = a->value;
  auto& ov = out.storage();
  const auto& bv = b->value.storage();
  const std::size_t nb = bv.size();
  if (rule == Bcast::none) {
    for (std::size_t i = 0; i < ov.size(); ++i) ov[i] += sign * bv[i];
  } else {
    for (std::size_t i = 0; i < ov.size(); ++i) ov[i] += sign * bv[i % nb];
  }
  return make_node(std::move(out), {a, b}, [sign, nb](Node& self) {
    Node& pa = *self.parents[0];
    Node& pb = *self.parents[1];
    const auto& g = self.grad.storage();
    accumulate(pa, self.grad);
    if (pb.needs_grad) {
      auto& gb = pb.grad.storage();
      for (std::size_t i = 0; i < g.size(); ++i) gb[i % nb] += sign * g[i];
    }
  });
}

}  // namespace

Var add(const Var& a, const Var& b) { return add_sub(a, b, 1.0, "add"); }
Var sub(const Var& a, const Var& b) { return add_sub(a, b, -1.0, "sub"); }

Var mul(const Var& a, const Var& b) {
  if (a->value.shape() != b->value.shape()) {
    throw DimensionError("mul: incompatible shapes " + shape_string(a->value.shape()) + " and " +
                         shape_string(b->value.shape()));
  }
  Tensor out = a->value;
  auto& ov = out.storage();
  const auto& bv = b->value.storage();
  for (std::size_t i = 0; i < ov.size(); ++i) ov[i] *= bv[i];
  return make_node(std::move(out), {a, b}, [](Node& self) {
    Node& pa = *self.parents[0];
    Node& pb = *self.parents[1];
    const auto& g = self.grad.storage();
    if (pa.needs_grad) {
      auto& ga = pa.grad.storage();
      const auto& bv = pb.value.storage();
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * bv[i];
    }
    if (pb.needs_grad) {
      auto& gb = pb.grad.storage();
      const auto& av = pa.value.storage();
      for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * av[i];
    }
  });
}

Var scale(const Var& x, double factor) {
  return unary(
      x, [factor](double v) { return v * factor; }, [factor](double, double) { return factor; });
}

Var tanh(const Var& x) {
  return unary(
      x, [](double v) { return std::tanh(v); }, [](double, double y) { return 1.0 - y * y; });
}

Var sigmoid(const Var& x) {
  return unary(
      x, [](double v) { return stable_sigmoid(v); },
      [](double, double y) { return y * (1.0 - y); });
}

Var relu(const Var& x) {
  return unary(
      x, [](double v) { return v > 0.0 ? v : 0.0; },
      [](double v, double) { return v > 0.0 ? 1.0 : 0.0; });
}

Var elementwise(Pointwise op, std::span<const Var> args) {
  const bool binary = op == Pointwise::add || op == Pointwise::sub || op == Pointwise::mul;
  const std::size_t want = binary ? 2 : 1;
  if (args.size() != want) {
    throw ContractError("elementwise: expected " + std::to_string(want) + " arguments, got " +
                        std::to_string(args.size()));
  }
  switch (op) {
    case Pointwise::add: return add(args[0], args[1]);
    case Pointwise::sub: return sub(args[0], args[1]);
    case Pointwise::mul: return mul(args[0], args[1]);
    case Pointwise::tanh: return tanh(args[0]);
    case Pointwise::sigmoid: return sigmoid(args[0]);
    case Pointwise::relu: return relu(args[0]);
  }
  throw ContractError("elementwise: unknown op");
}

Var softmax(const Var& x) {
  const Tensor& xv = x->value;
  if (xv.rank() != 1) throw DimensionError("softmax: expected a vector, got " + shape_string(xv.shape()));
  Tensor out(xv.shape());
  auto& ov = out.storage();
  const double mx = *std::max_element(xv.storage().begin(), xv.storage().end());
  double total = 0.0;
  for (std::size_t i = 0; i < ov.size(); ++i) {
    ov[i] = std::exp(xv[i] - mx);
    total += ov[i];
  }
  for (auto& v : ov) v /= total;
  return make_node(std::move(out), {x}, [](Node& self) {
    const auto& y = self.value.storage();
    const auto& g = self.grad.storage();
    double dot = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) dot += g[i] * y[i];
    auto& gx = self.parents[0]->grad.storage();
    for (std::size_t i = 0; i < y.size(); ++i) gx[i] += y[i] * (g[i] - dot);
  });
}

Var concat(std::span<const Var> parts, int axis) {
  if (parts.empty()) throw DomainError("concat: no tensors given");
  const Shape& first = parts[0]->value.shape();
  const std::size_t rank = first.size();
  const std::size_t ax = axis < 0 ? rank - 1 : static_cast<std::size_t>(axis);
  if (ax >= rank) throw DimensionError("concat: axis out of range for " + shape_string(first));

  std::size_t outer = 1;
  for (std::size_t i = 0; i < ax; ++i) outer *= first[i];
  std::vector<std::size_t> blocks;  // contiguous run per outer index, per part
  std::size_t axis_total = 0;
  for (const auto& p : parts) {
    const Shape& s = p->value.shape();
    bool ok = s.size() == rank;
    for (std::size_t i = 0; ok && i < rank; ++i) ok = i == ax || s[i] == first[i];
    if (!ok) {
      throw DimensionError("concat: cannot join " + shape_string(first) + " with " +
                           shape_string(s) + " along axis " + std::to_string(ax));
    }
    axis_total += s[ax];
    blocks.push_back(p->value.size() / outer);
  }
  Shape out_shape = first;
  out_shape[ax] = axis_total;
  Tensor out(out_shape);
  auto& ov = out.storage();
  std::size_t pos = 0;
  for (std::size_t o = 0; o < outer; ++o) {
    for (std::size_t k = 0; k < parts.size(); ++k) {
      const double* src = parts[k]->value.storage().data() + o * blocks[k];
      std::copy(src, src + blocks[k], ov.begin() + pos);
      pos += blocks[k];
    }
  }
  return make_node(std::move(out), std::vector<Var>(parts.begin(), parts.end()),
                   [outer, blocks](Node& self) {
                     const auto& g = self.grad.storage();
                     std::size_t pos = 0;
                     for (std::size_t o = 0; o < outer; ++o) {
                       for (std::size_t k = 0; k < blocks.size(); ++k) {
                         Node& p = *self.parents[k];
                         if (p.needs_grad) {
                           double* dst = p.grad.storage().data() + o * blocks[k];
                           for (std::size_t j = 0; j < blocks[k]; ++j) dst[j] += g[pos + j];
                         }
                         pos += blocks[k];
                       }
                     }
                   });
}

Var stack_rows(std::span<const Var> rows) {
  if (rows.empty()) throw DomainError("stack_rows: no rows given");
  const std::size_t n = rows[0]->value.size();
  for (const auto& r : rows) {
    if (r->value.rank() != 1 || r->value.size() != n) {
      throw DimensionError("stack_rows: rows must be vectors of length " + std::to_string(n) +
                           ", got " + shape_string(r->value.shape()));
    }
  }
  Tensor out({rows.size(), n});
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::copy(rows[i]->value.storage().begin(), rows[i]->value.storage().end(),
              out.storage().begin() + i * n);
  }
  return make_node(std::move(out), std::vector<Var>(rows.begin(), rows.end()), [n](Node& self) {
    const auto& g = self.grad.storage();
    for (std::size_t i = 0; i < self.parents.size(); ++i) {
      Node& p = *self.parents[i];
      if (!p.needs_grad) continue;
      auto& pg = p.grad.storage();
      for (std::size_t j = 0; j < n; ++j) pg[j] += g[i * n + j];
    }
  });
}

Var row(const Var& x, std::size_t i) {
  const Tensor& xv = x->value;
  if (xv.rank() != 2) throw DimensionError("row: expected a matrix, got " + shape_string(xv.shape()));
  if (i >= xv.dim(0)) throw DimensionError("row: index " + std::to_string(i) + " out of range");
  const std::size_t n = xv.dim(1);
  std::vector<double> data(xv.storage().begin() + i * n, xv.storage().begin() + (i + 1) * n);
  return make_node(Tensor({n}, std::move(data)), {x}, [i, n](Node& self) {
    auto& pg = self.parents[0]->grad.storage();
    const auto& g = self.grad.storage();
    for (std::size_t j = 0; j < n; ++j) pg[i * n + j] += g[j];
  });
}

Var reshape(const Var& x, Shape shape) {
  return make_node(x->value.reshaped(std::move(shape)), {x},
                   [](Node& self) { accumulate(*self.parents[0], self.grad); });
}

Var sum(const Var& x) {
  if (x->value.empty()) throw DomainError("sum: empty tensor");
  double total = 0.0;
  for (double v : x->value.storage()) total += v;
  return make_node(Tensor::scalar(total), {x}, [](Node& self) {
    const double g = self.grad[0];
    for (auto& v : self.parents[0]->grad.storage()) v += g;
  });
}

Var mean(const Var& x) {
  if (x->value.empty()) throw DomainError("mean: empty tensor");
  const double n = static_cast<double>(x->value.size());
  double total = 0.0;
  for (double v : x->value.storage()) total += v;
  return make_node(Tensor::scalar(total / n), {x}, [n](Node& self) {
    const double g = self.grad[0] / n;
    for (auto& v : self.parents[0]->grad.storage()) v += g;
  });
}

void backward(const Var& loss) {
  if (loss->value.size() != 1) {
    throw ContractError("backward: loss must be scalar, got shape " +
                        shape_string(loss->value.shape()));
  }
  if (!loss->needs_grad) return;

  // Iterative post-order DFS gives a topological order (parents first).
  std::vector<Node*> order;
  std::unordered_set<Node*> seen;
  std::vector<std::pair<Node*, std::size_t>> stack;
  stack.emplace_back(loss.get(), 0);
  seen.insert(loss.get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      Node* p = node->parents[next++].get();
      if (p->needs_grad && seen.insert(p).second) stack.emplace_back(p, 0);
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  for (Node* n : order) {
    if (!n->is_leaf()) n->grad = Tensor(n->value.shape());
  }
  loss->grad[0] += 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* n = *it;
    if (!n->is_leaf()) n->backward_fn(*n);
  }
}

}  // namespace ad

}  // namespace piets
