// Copyright (c) 2026 The PIETS Authors
// SPDX-License-Identifier: Apache-2.0

#include "piets/model.hpp"

#include <future>
#include <numeric>

#include "piets/errors.hpp"

namespace piets {

const char* objective_name(PretrainObjective o) {
  return o == PretrainObjective::target ? "target" : "next_step";
}

PretrainObjective parse_objective(const std::string& name) {
  if (name == "next_step") return PretrainObjective::next_step;
  if (name == "target") return PretrainObjective::target;
  throw ParseError("unknown pre-training objective '" + name + "' (expected next_step or target)");
}

namespace {

void check_windows(std::span<const Tensor> windows, std::span<const std::size_t> dims,
                   std::size_t lag) {
  if (windows.size() != dims.size()) {
    throw DimensionError("expected " + std::to_string(dims.size()) + " source windows, got " +
                         std::to_string(windows.size()));
  }
  for (std::size_t s = 0; s < windows.size(); ++s) {
    const Tensor& w = windows[s];
    if (w.rank() != 2 || w.dim(0) != lag || w.dim(1) != dims[s]) {
      throw DimensionError("window for source " + std::to_string(s) + " must be [" +
                           std::to_string(lag) + "x" + std::to_string(dims[s]) + "], got " +
                           shape_string(w.shape()));
    }
  }
}

}  // namespace

PietsModel::PietsModel(std::vector<std::string> source_ids, std::vector<std::size_t> dims,
                       std::size_t lag, const TrainConfig& cfg)
    : dims_(std::move(dims)), lag_(lag), hidden_(cfg.hidden), attention_on_(cfg.attention),
      parallel_(cfg.parallel_branches) {
  if (source_ids.size() != dims_.size() || dims_.empty()) {
    throw ContractError("one source id and dimension is required per branch");
  }
  if (lag_ == 0 || hidden_ == 0) throw ContractError("lag and hidden size must be positive");
  for (std::size_t s = 0; s < dims_.size(); ++s) {
    branches_.push_back({source_ids[s],
                         LstmParams::create(store_, "branch." + std::to_string(s) + ".lstm",
                                            dims_[s], hidden_, cfg.seed)});
  }
  fusion_ = LstmParams::create(store_, "fusion.lstm", dims_.size() * hidden_, hidden_, cfg.seed);
  attention_ = AttentionParams::create(store_, "attention", hidden_, cfg.seed);
  head_ = DenseParams::create(store_, "head", hidden_, 1, Activation::linear, cfg.seed);
}

Prediction PietsModel::forward(std::span<const Tensor> windows) const {
  check_windows(windows, dims_, lag_);
  const std::size_t S = branches_.size();

  std::vector<Var> branch_states(S);
  if (parallel_ && S > 1) {
    std::vector<std::future<Var>> jobs;
    for (std::size_t s = 0; s < S; ++s) {
      jobs.push_back(std::async(std::launch::async, [this, s, &windows] {
        return lstm_forward(ad::constant(windows[s]), branches_[s].lstm).states;
      }));
    }
    for (std::size_t s = 0; s < S; ++s) branch_states[s] = jobs[s].get();
  } else {
    for (std::size_t s = 0; s < S; ++s) {
      branch_states[s] = lstm_forward(ad::constant(windows[s]), branches_[s].lstm).states;
    }
  }

  // [M x S·H]: per step, the branch states side by side.
  auto fused = S == 1 ? branch_states[0] : ad::concat(branch_states, 1);
  auto seq = lstm_forward(fused, fusion_);

  if (!attention_on_) return {dense_forward(seq.last, head_), nullptr};
  auto att = attend(seq.last, seq.states, attention_);
  return {dense_forward(att.output, head_), att.alpha};
}

PietsModel build_model(std::span<const std::string> source_ids, std::span<const std::size_t> dims,
                       std::size_t lag, std::span<const PretrainedWeights> pretrained,
                       const TrainConfig& cfg) {
  PietsModel model(std::vector<std::string>(source_ids.begin(), source_ids.end()),
                   std::vector<std::size_t>(dims.begin(), dims.end()), lag, cfg);
  if (!cfg.warm_start) return model;
  if (pretrained.size() != source_ids.size()) {
    throw ContractError("warm start needs one pre-training result per source (got " +
                        std::to_string(pretrained.size()) + " for " +
                        std::to_string(source_ids.size()) + " sources)");
  }
  for (const auto& pw : pretrained) {
    if (!pw.usable()) continue;
    const std::string prefix = "branch." + std::to_string(pw.source_index) + ".lstm.";
    for (const auto& [name, t] : pw.tensors) {
      if (!name.starts_with(prefix)) {
        throw ContractError("pre-trained tensor '" + name + "' does not belong to branch " +
                            std::to_string(pw.source_index));
      }
    }
    restore(model.params(), pw.tensors);
  }
  return model;
}

BaselineModel::BaselineModel(std::vector<std::size_t> dims, std::size_t lag, const TrainConfig& cfg)
    : dims_(std::move(dims)), lag_(lag) {
  if (dims_.empty() || lag_ == 0 || cfg.hidden == 0) throw ContractError("invalid baseline shape");
  const std::size_t fused = std::accumulate(dims_.begin(), dims_.end(), std::size_t{0});
  lstm_ = LstmParams::create(store_, "baseline.lstm", fused, cfg.hidden, cfg.seed);
  head_ = DenseParams::create(store_, "head", cfg.hidden, 1, Activation::linear, cfg.seed);
}

Prediction BaselineModel::forward(std::span<const Tensor> windows) const {
  check_windows(windows, dims_, lag_);
  std::vector<Var> parts;
  for (const auto& w : windows) parts.push_back(ad::constant(w));
  auto fused = parts.size() == 1 ? parts[0] : ad::concat(parts, 1);
  return {dense_forward(lstm_forward(fused, lstm_).last, head_), nullptr};
}

}  // namespace piets
