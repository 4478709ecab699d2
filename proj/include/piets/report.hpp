// Copyright (c) 2026 The PIETS Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "piets/data.hpp"
#include "piets/model.hpp"

namespace piets {

struct Metrics {
  double mse = 0.0;
  double rmse = 0.0;
  double mape = 0.0;
};

/// mse = mean((y-ŷ)²), rmse = √mse, mape = mean(|y-ŷ| / max(|y|, 1e-8)).
Metrics compute_metrics(std::span<const double> y, std::span<const double> y_hat);

struct ExperimentReport {
  std::string model_kind;  // "piets" or "baseline"
  TrainConfig config;
  DataConfig data;
  std::uint64_t seed = 0;

  Metrics test;      // normalized target scale
  Metrics test_raw;  // original target scale
  std::vector<double> train_loss;  // per epoch
  std::vector<double> val_loss;
  /// Mean attention weight per lag position over the test windows; empty
  /// when attention is off.
  std::vector<double> attention_by_lag;

  std::size_t n_train = 0;
  std::size_t n_val = 0;
  std::size_t n_test = 0;
  /// Early-range rows consumed by encoder pre-training.
  std::size_t early_rows_used = 0;
  std::vector<PretrainProvenance> pretraining;
  std::vector<std::string> source_ids;
  std::vector<std::size_t> source_dims;
};

/// Stable rendering of the report; key order is fixed.
std::string metrics_json(const ExperimentReport& r);
std::string loss_curve_csv(const ExperimentReport& r);
std::string attention_csv(const ExperimentReport& r);

/// Writes metrics.json, loss_curve.csv and, when attention was on,
/// attention_by_lag.csv into `out_dir` (created if needed).
void export_report(const ExperimentReport& r, const std::filesystem::path& out_dir);

/// Writes `content` to `path` atomically (temporary file, then rename).
void write_text_file(const std::filesystem::path& path, const std::string& content);

/// Hex FNV-1a of the canonical JSON form of a configuration.
std::string config_hash(const TrainConfig& cfg, const DataConfig& data);

}  // namespace piets
