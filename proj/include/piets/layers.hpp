// Copyright (c) 2026 The PIETS Authors
// SPDX-License-Identifier: Apache-2.0
//
// Recurrent, dense and attention layers built from autodiff primitives.
// Layers own no state beyond Var handles into a ParameterStore; calling a
// layer builds a fresh graph over the current parameter values.

#pragma once

#include <cstdint>
#include <string>
#include <utility>

#include "piets/autodiff.hpp"

namespace piets {

/// Uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)], drawn from a stream keyed by
/// (seed, parameter name) so the value of a parameter never depends on the
/// order in which a model was assembled.
Tensor uniform_init(const std::string& name, Shape shape, std::size_t fan_in, std::uint64_t seed);

struct LstmParams {
  std::size_t input_dim = 0;
  std::size_t hidden_dim = 0;
  Var W_i, W_f, W_o, W_g;  // input_dim x hidden_dim
  Var U_i, U_f, U_o, U_g;  // hidden_dim x hidden_dim
  Var b_i, b_f, b_o, b_g;  // hidden_dim

  /// Registers `<prefix>.W_i` ... `<prefix>.b_g`. Forget bias starts at 1,
  /// the other biases at 0.
  static LstmParams create(ParameterStore& store, const std::string& prefix,
                           std::size_t input_dim, std::size_t hidden_dim, std::uint64_t seed);

  /// Tensor suffixes in registration order.
  static constexpr const char* kNames[12] = {"W_i", "W_f", "W_o", "W_g", "U_i", "U_f",
                                             "U_o", "U_g", "b_i", "b_f", "b_o", "b_g"};
};

struct LstmStep {
  Var h;
  Var c;
};

/// One step of the standard LSTM recurrence with sigmoid gates i, f, o and a
/// tanh candidate g: c = f*c_prev + i*g, h = o*tanh(c).
LstmStep lstm_cell_step(const Var& x, const Var& h_prev, const Var& c_prev, const LstmParams& p);

struct LstmSequence {
  Var states;  // [M x H], row m is the hidden state after step m
  Var last;    // [H]
};

/// Runs the recurrence over `seq` [M x D] from zero initial state.
LstmSequence lstm_forward(const Var& seq, const LstmParams& p);

enum class Activation { linear, relu, tanh };

struct DenseParams {
  Var W;  // in x out
  Var b;  // out
  Activation activation = Activation::linear;

  static DenseParams create(ParameterStore& store, const std::string& prefix, std::size_t in,
                            std::size_t out, Activation act, std::uint64_t seed);
};

/// act(x·W + b). Accepts a vector [in] or a matrix [rows x in].
Var dense_forward(const Var& x, const DenseParams& p);

struct AttentionParams {
  Var W_a;  // H x H, alignment
  Var W_c;  // 2H x H, output projection
  std::size_t hidden_dim = 0;

  static AttentionParams create(ParameterStore& store, const std::string& prefix,
                                std::size_t hidden_dim, std::uint64_t seed);
};

/// Multiplicative alignment score h_t^T · W_a · h_s.
Var attention_score(const Var& h_t, const Var& h_s, const Var& W_a);
/// Scores of h_t against every row of `states` [M x H]; result [M].
Var attention_scores(const Var& h_t, const Var& states, const Var& W_a);
/// Softmax of the scores.
Var attention_weights(const Var& scores);
/// Weighted sum of the rows of `states`.
Var attention_context(const Var& alpha, const Var& states);
/// tanh([c_t; h_t] · W_c).
Var attention_output(const Var& c_t, const Var& h_t, const Var& W_c);

struct AttentionResult {
  Var output;  // a_t, [H]
  Var alpha;   // [M]
};

/// Full attention block: query h_t over keys/values `states`.
AttentionResult attend(const Var& h_t, const Var& states, const AttentionParams& p);

}  // namespace piets
