// Copyright (c) 2026 The PIETS Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <functional>
#include <span>
#include <vector>

#include "piets/data.hpp"
#include "piets/model.hpp"
#include "piets/report.hpp"

namespace piets {

/// Called after every epoch with (epoch starting at 1, train loss, val loss).
using EpochLogger = std::function<void(std::size_t, double, double)>;

/// Encoder pre-training on one source's early rows: sliding windows of `lag`
/// rows feed the branch LSTM and a temporary linear head, which is discarded.
/// The head predicts the next row's features, or with the `target` objective
/// and a non-empty `early_target` (one value per early row) the next row's
/// target. Fewer than lag+1 rows yields a result flagged
/// insufficient_early_data with no tensors.
PretrainedWeights pretrain_encoder(const Matrix& early, std::size_t source_index,
                                   const std::string& source_id, std::size_t lag,
                                   const TrainConfig& cfg,
                                   std::span<const double> early_target = {});

/// Pre-trains every source of a prepared dataset.
std::vector<PretrainedWeights> pretrain_all(const PreparedData& data, const TrainConfig& cfg);

struct TrainResult {
  std::vector<double> train_loss;
  std::vector<double> val_loss;
};

/// Minimizes squared error over the training block in fixed chronological
/// order, mini-batches of cfg.batch_size, one Adam update per batch. The
/// epoch train loss is the mean squared error seen during the epoch; the
/// validation loss is measured after it. A non-finite loss throws
/// DivergenceError naming the epoch.
TrainResult train(Forecaster& model, const WindowedDataset& data, const SplitRanges& ranges,
                  const TrainConfig& cfg, const EpochLogger& log = {});

struct Evaluation {
  Metrics normalized;
  Metrics raw;
  std::vector<double> predictions;  // normalized scale
  std::vector<double> targets;
  std::vector<std::vector<double>> alphas;  // per window, empty without attention
  std::vector<double> attention_by_lag;
};

Evaluation evaluate(const Forecaster& model, const WindowedDataset& data, Range block,
                    double target_mean = 0.0, double target_std = 1.0);

/// Every source window of dataset entry i, in source order.
std::vector<Tensor> windows_at(const WindowedDataset& data, std::size_t i);

struct PietsRun {
  ExperimentReport report;
  PietsModel model;
  std::vector<PretrainedWeights> pretrained;
};

/// Build, train and evaluate a PIETS model on prepared data. `pretrained`
/// is only consulted when cfg.warm_start is set.
PietsRun run_piets(const PreparedData& data, std::span<const PretrainedWeights> pretrained,
                   const TrainConfig& cfg, const EpochLogger& log = {});

/// Full pipeline from a timeline: prepare, pre-train if warm-starting,
/// build, train, evaluate.
PietsRun run_piets(const AlignedTimeline& tl, const DataConfig& data_cfg, const TrainConfig& cfg,
                   const EpochLogger& log = {});

/// Fills the parts of a report shared by every model kind.
ExperimentReport make_report(const Forecaster& model, const PreparedData& data,
                             const TrainConfig& cfg, const TrainResult& curves,
                             const Evaluation& eval);

/// model.bin (named tensors) plus checkpoint.json (source ids, dims, lag,
/// configuration and its hash).
void save_checkpoint(const std::filesystem::path& dir, const PietsModel& model,
                     const TrainConfig& cfg, const DataConfig& data_cfg);
PietsModel load_checkpoint(const std::filesystem::path& dir);

}  // namespace piets
