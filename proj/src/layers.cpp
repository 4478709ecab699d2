// Copyright (c) 2026 The PIETS Authors
// SPDX-License-Identifier: Apache-2.0

#include "piets/layers.hpp"

#include <array>
#include <cmath>

#include "piets/errors.hpp"
#include "piets/random.hpp"

namespace piets {

Tensor uniform_init(const std::string& name, Shape shape, std::size_t fan_in, std::uint64_t seed) {
  Rng rng(seed, name);
  const double k = 1.0 / std::sqrt(static_cast<double>(fan_in));
  Tensor t(std::move(shape));
  for (auto& v : t.storage()) v = rng.uniform(-k, k);
  return t;
}

LstmParams LstmParams::create(ParameterStore& store, const std::string& prefix,
                              std::size_t input_dim, std::size_t hidden_dim, std::uint64_t seed) {
  if (input_dim == 0 || hidden_dim == 0) throw DimensionError("lstm: dimensions must be positive");
  LstmParams p;
  p.input_dim = input_dim;
  p.hidden_dim = hidden_dim;
  const std::size_t D = input_dim, H = hidden_dim;
  auto weight = [&](const char* n, std::size_t rows) {
    const std::string full = prefix + "." + n;
    return store.add(full, uniform_init(full, {rows, H}, rows, seed));
  };
  p.W_i = weight("W_i", D);
  p.W_f = weight("W_f", D);
  p.W_o = weight("W_o", D);
  p.W_g = weight("W_g", D);
  p.U_i = weight("U_i", H);
  p.U_f = weight("U_f", H);
  p.U_o = weight("U_o", H);
  p.U_g = weight("U_g", H);
  p.b_i = store.add(prefix + ".b_i", Tensor({H}, 0.0));
  p.b_f = store.add(prefix + ".b_f", Tensor({H}, 1.0));
  p.b_o = store.add(prefix + ".b_o", Tensor({H}, 0.0));
  p.b_g = store.add(prefix + ".b_g", Tensor({H}, 0.0));
  return p;
}

namespace {

void check_state(const char* what, const Var& v, std::size_t H) {
  if (v->value.rank() != 1 || v->value.size() != H) {
    throw DimensionError(std::string("lstm: ") + what + " must have shape [" + std::to_string(H) +
                         "], got " + shape_string(v->value.shape()));
  }
}

// (x·W + b) + h·U, in that association for both entry points.
Var gate_pre(const Var& xw_b, const Var& h, const Var& U) {
  return h ? ad::add(xw_b, ad::matmul(h, U)) : xw_b;
}

LstmStep combine(const Var& pi, const Var& pf, const Var& po, const Var& pg, const Var& c_prev) {
  auto i = ad::sigmoid(pi);
  auto o = ad::sigmoid(po);
  auto g = ad::tanh(pg);
  Var c;
  if (c_prev) {
    auto f = ad::sigmoid(pf);
    c = ad::add(ad::mul(f, c_prev), ad::mul(i, g));
  } else {
    c = ad::mul(i, g);
  }
  return {ad::mul(o, ad::tanh(c)), c};
}

}  // namespace

LstmStep lstm_cell_step(const Var& x, const Var& h_prev, const Var& c_prev, const LstmParams& p) {
  if (x->value.rank() != 1 || x->value.size() != p.input_dim) {
    throw DimensionError("lstm: input must have shape [" + std::to_string(p.input_dim) +
                         "], got " + shape_string(x->value.shape()));
  }
  check_state("h_prev", h_prev, p.hidden_dim);
  check_state("c_prev", c_prev, p.hidden_dim);
  auto pre = [&](const Var& W, const Var& U, const Var& b) {
    return gate_pre(ad::add(ad::matmul(x, W), b), h_prev, U);
  };
  return combine(pre(p.W_i, p.U_i, p.b_i), pre(p.W_f, p.U_f, p.b_f), pre(p.W_o, p.U_o, p.b_o),
                 pre(p.W_g, p.U_g, p.b_g), c_prev);
}

LstmSequence lstm_forward(const Var& seq, const LstmParams& p) {
  const Tensor& sv = seq->value;
  if (sv.rank() != 2 || sv.dim(1) != p.input_dim) {
    throw DimensionError("lstm: sequence must have shape [M x " + std::to_string(p.input_dim) +
                         "], got " + shape_string(sv.shape()));
  }
  const std::size_t M = sv.dim(0);
  if (M == 0) throw DomainError("lstm: empty sequence");

  // Input projections for all steps at once; the rows match x·W + b per step.
  const auto xi = ad::add(ad::matmul(seq, p.W_i), p.b_i);
  const auto xf = ad::add(ad::matmul(seq, p.W_f), p.b_f);
  const auto xo = ad::add(ad::matmul(seq, p.W_o), p.b_o);
  const auto xg = ad::add(ad::matmul(seq, p.W_g), p.b_g);

  // Zero initial state: the first step drops the h·U and f*c terms, which
  // contribute exact zeros.
  Var h, c;
  std::vector<Var> rows;
  rows.reserve(M);
  for (std::size_t m = 0; m < M; ++m) {
    auto step = combine(gate_pre(ad::row(xi, m), h, p.U_i), gate_pre(ad::row(xf, m), h, p.U_f),
                        gate_pre(ad::row(xo, m), h, p.U_o), gate_pre(ad::row(xg, m), h, p.U_g), c);
    h = step.h;
    c = step.c;
    rows.push_back(h);
  }
  return {ad::stack_rows(rows), h};
}

DenseParams DenseParams::create(ParameterStore& store, const std::string& prefix, std::size_t in,
                                std::size_t out, Activation act, std::uint64_t seed) {
  DenseParams d;
  const std::string wname = prefix + ".W";
  d.W = store.add(wname, uniform_init(wname, {in, out}, in, seed));
  d.b = store.add(prefix + ".b", Tensor({out}, 0.0));
  d.activation = act;
  return d;
}

Var dense_forward(const Var& x, const DenseParams& p) {
  auto z = ad::add(ad::matmul(x, p.W), p.b);
  switch (p.activation) {
    case Activation::relu: return ad::relu(z);
    case Activation::tanh: return ad::tanh(z);
    case Activation::linear: break;
  }
  return z;
}

AttentionParams AttentionParams::create(ParameterStore& store, const std::string& prefix,
                                        std::size_t hidden_dim, std::uint64_t seed) {
  AttentionParams a;
  a.hidden_dim = hidden_dim;
  const std::string wa = prefix + ".W_a";
  const std::string wc = prefix + ".W_c";
  a.W_a = store.add(wa, uniform_init(wa, {hidden_dim, hidden_dim}, hidden_dim, seed));
  a.W_c = store.add(wc, uniform_init(wc, {2 * hidden_dim, hidden_dim}, 2 * hidden_dim, seed));
  return a;
}

Var attention_score(const Var& h_t, const Var& h_s, const Var& W_a) {
  if (h_t->value.rank() != 1 || h_s->value.shape() != h_t->value.shape()) {
    throw DimensionError("attention_score: h_t " + shape_string(h_t->value.shape()) + " and h_s " +
                         shape_string(h_s->value.shape()) + " must be equal-length vectors");
  }
  return ad::matmul(ad::matmul(h_t, W_a), h_s);
}

Var attention_scores(const Var& h_t, const Var& states, const Var& W_a) {
  return ad::matmul(states, ad::matmul(h_t, W_a));
}

Var attention_weights(const Var& scores) { return ad::softmax(scores); }

Var attention_context(const Var& alpha, const Var& states) {
  const Tensor& s = states->value;
  if (alpha->value.rank() != 1 || s.rank() != 2 || s.dim(0) != alpha->value.size()) {
    throw DimensionError("attention_context: weights " + shape_string(alpha->value.shape()) +
                         " do not match states " + shape_string(s.shape()));
  }
  return ad::matmul(alpha, states);
}

Var attention_output(const Var& c_t, const Var& h_t, const Var& W_c) {
  const std::array<Var, 2> parts{c_t, h_t};
  const Tensor& w = W_c->value;
  if (w.rank() != 2 || w.dim(0) != c_t->value.size() + h_t->value.size()) {
    throw DimensionError("attention_output: W_c " + shape_string(w.shape()) +
                         " does not match [c_t; h_t]");
  }
  return ad::tanh(ad::matmul(ad::concat(parts), W_c));
}

AttentionResult attend(const Var& h_t, const Var& states, const AttentionParams& p) {
  auto alpha = attention_weights(attention_scores(h_t, states, p.W_a));
  auto context = attention_context(alpha, states);
  return {attention_output(context, h_t, p.W_c), alpha};
}

}  // namespace piets
