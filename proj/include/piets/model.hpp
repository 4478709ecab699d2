// Copyright (c) 2026 The PIETS Authors
// SPDX-License-Identifier: Apache-2.0
//
// Forecasting models over per-source windows.
//
// PietsModel: each source's [M x D_s] window runs through its own branch
// LSTM; the S branch hidden states of every step are concatenated into an
// [M x S·H] sequence for a fusion LSTM. With attention, the last fusion
// state queries all M fusion states and the attention output feeds a linear
// head; without it the head reads the last fusion state directly.
//
// BaselineModel: the fixed-window feature-fusion reference. All sources'
// features at each step are concatenated into one vector, followed by a
// single LSTM and a linear head.

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "piets/layers.hpp"
#include "piets/tensor_io.hpp"

namespace piets {

/// What the encoder pre-training head predicts from each early window.
enum class PretrainObjective {
  next_step,  // the source's own next feature vector
  target,     // the forecasting target, where it covers the early range
};

struct TrainConfig {
  std::size_t epochs = 150;
  double lr = 1e-3;
  std::uint64_t seed = 1;
  std::size_t hidden = 128;
  std::size_t batch_size = 32;
  bool warm_start = true;
  bool attention = true;
  /// Encoder pre-training epochs; 0 means the same as `epochs`.
  std::size_t pretrain_epochs = 0;
  /// With `target`, sources whose early range the target does not cover
  /// fall back to next_step.
  PretrainObjective pretrain_objective = PretrainObjective::next_step;
  /// Run branch forward passes on separate threads.
  bool parallel_branches = false;

  std::size_t effective_pretrain_epochs() const { return pretrain_epochs ? pretrain_epochs : epochs; }
};

struct Prediction {
  Var value;  // [1]
  Var alpha;  // [M] attention weights, null when attention is off
};

class Forecaster {
 public:
  virtual ~Forecaster() = default;

  /// One window per source, each [lag x D_s].
  virtual Prediction forward(std::span<const Tensor> windows) const = 0;
  virtual ParameterStore& params() = 0;
  virtual const ParameterStore& params() const = 0;
  virtual std::size_t lag() const = 0;
  virtual bool attention_on() const = 0;
  virtual std::string kind() const = 0;
};

struct BranchEncoder {
  std::string source_id;
  LstmParams lstm;
};

struct PretrainProvenance {
  std::string source_id;
  std::size_t epochs = 0;
  std::size_t windows = 0;
  std::size_t early_rows = 0;
  double first_loss = 0.0;
  double final_loss = 0.0;
  std::uint64_t seed = 0;
  bool insufficient_early_data = false;
  PretrainObjective objective = PretrainObjective::next_step;
  std::vector<double> loss_curve;
};

const char* objective_name(PretrainObjective o);
/// Inverse of objective_name; throws ParseError.
PretrainObjective parse_objective(const std::string& name);

struct PretrainedWeights {
  std::string source_id;
  std::size_t source_index = 0;
  /// Named exactly like the branch it initializes ("branch.<s>.lstm.W_i", ...).
  NamedTensors tensors;
  PretrainProvenance provenance;

  bool usable() const { return !provenance.insufficient_early_data; }
};

class PietsModel final : public Forecaster {
 public:
  PietsModel(std::vector<std::string> source_ids, std::vector<std::size_t> dims, std::size_t lag,
             const TrainConfig& cfg);
  PietsModel(PietsModel&&) = default;
  PietsModel& operator=(PietsModel&&) = default;
  PietsModel(const PietsModel&) = delete;
  PietsModel& operator=(const PietsModel&) = delete;

  Prediction forward(std::span<const Tensor> windows) const override;
  ParameterStore& params() override { return store_; }
  const ParameterStore& params() const override { return store_; }
  std::size_t lag() const override { return lag_; }
  bool attention_on() const override { return attention_on_; }
  std::string kind() const override { return "piets"; }

  const std::vector<BranchEncoder>& branches() const { return branches_; }
  const LstmParams& fusion() const { return fusion_; }
  const AttentionParams& attention() const { return attention_; }
  const DenseParams& head() const { return head_; }
  const std::vector<std::size_t>& dims() const { return dims_; }
  std::size_t hidden() const { return hidden_; }
  void set_parallel_branches(bool on) { parallel_ = on; }

 private:
  ParameterStore store_;
  std::vector<BranchEncoder> branches_;
  LstmParams fusion_;
  AttentionParams attention_;
  DenseParams head_;
  std::vector<std::size_t> dims_;
  std::size_t lag_ = 0;
  std::size_t hidden_ = 0;
  bool attention_on_ = true;
  bool parallel_ = false;
};

/// Assembles a model with every parameter drawn from `cfg.seed`. With
/// warm_start, each branch whose pre-training succeeded is then overwritten
/// by its snapshot; fusion, attention and head stay random.
PietsModel build_model(std::span<const std::string> source_ids, std::span<const std::size_t> dims,
                       std::size_t lag, std::span<const PretrainedWeights> pretrained,
                       const TrainConfig& cfg);

class BaselineModel final : public Forecaster {
 public:
  BaselineModel(std::vector<std::size_t> dims, std::size_t lag, const TrainConfig& cfg);
  BaselineModel(BaselineModel&&) = default;
  BaselineModel& operator=(BaselineModel&&) = default;

  Prediction forward(std::span<const Tensor> windows) const override;
  ParameterStore& params() override { return store_; }
  const ParameterStore& params() const override { return store_; }
  std::size_t lag() const override { return lag_; }
  bool attention_on() const override { return false; }
  std::string kind() const override { return "baseline"; }

  std::size_t fused_dim() const { return lstm_.input_dim; }

 private:
  ParameterStore store_;
  LstmParams lstm_;
  DenseParams head_;
  std::vector<std::size_t> dims_;
  std::size_t lag_ = 0;
};

}  // namespace piets
