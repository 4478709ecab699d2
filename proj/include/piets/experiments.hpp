// Copyright (c) 2026 The PIETS Authors
// SPDX-License-Identifier: Apache-2.0
//
// Experiment protocol: the fixed-window baseline, the 2x2 ablation grid over
// (warm start, attention), multi-seed summaries and the epochs-to-threshold
// convergence comparison.

#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "piets/training.hpp"

namespace piets {

struct AblationConfig {
  bool warm_start = false;
  bool attention = false;

  std::string label() const;
  friend bool operator==(const AblationConfig&, const AblationConfig&) = default;
};

/// Grid rows in reporting order: base, weights only, attention only, full.
inline constexpr std::array<AblationConfig, 4> kAblationGrid{
    AblationConfig{false, false}, AblationConfig{true, false}, AblationConfig{false, true},
    AblationConfig{true, true}};

/// Fixed-window feature-level fusion baseline: early rows are discarded and
/// a single LSTM reads all sources' late features side by side. Shares the
/// splits, training loop and metrics with the PIETS runs.
ExperimentReport run_baseline_predefined_window(const PreparedData& data, const TrainConfig& cfg,
                                                const EpochLogger& log = {});

struct SummaryStat {
  double median = 0.0;
  double mean = 0.0;
  double stdev = 0.0;  // sample standard deviation, 0 for one value
};

SummaryStat summary_stat(std::span<const double> values);

struct SummaryRow {
  AblationConfig config;
  std::size_t seed_count = 0;
  SummaryStat mse;
  SummaryStat rmse;
  SummaryStat mape;
};

/// Per-configuration statistics across seeds, in grid order. Reports must
/// share one schema (model kind, epochs, data layout).
std::vector<SummaryRow> summarize(std::span<const ExperimentReport> reports);

/// First epoch (1-based) whose loss is strictly below `threshold`.
std::optional<std::size_t> epochs_to_threshold(std::span<const double> curve, double threshold);

struct ConvergenceAnalysis {
  std::size_t reference_epochs = 100;
  /// Mean cold-start loss over the first `reference_epochs` epochs.
  double threshold = 0.0;
  std::optional<std::size_t> cold_epochs;
  std::optional<std::size_t> warm_epochs;
  /// cold - warm; positive when the warm start gets there first. Undefined
  /// if either run never reaches the threshold.
  std::optional<long> difference() const;
};

ConvergenceAnalysis convergence_analysis(std::span<const double> cold_curve,
                                         std::span<const double> warm_curve,
                                         std::size_t reference_epochs = 100);

struct AblationRun {
  AblationConfig config;
  std::uint64_t seed = 0;
  ExperimentReport report;
};

struct ConvergenceRow {
  AblationConfig config;
  std::uint64_t seed = 0;
  double threshold = 0.0;
  std::optional<std::size_t> epochs;
};

struct AblationResult {
  std::vector<AblationRun> runs;  // grid order, seeds in the given order within
  std::vector<SummaryRow> summary;
  std::vector<ConvergenceRow> convergence;
  /// Warm vs cold for each seed with attention on, then with attention off.
  std::vector<ConvergenceAnalysis> convergence_attention_on;
  std::vector<ConvergenceAnalysis> convergence_attention_off;

  const AblationRun& find(AblationConfig c, std::uint64_t seed) const;
};

using RunObserver = std::function<void(const AblationRun&)>;

/// Runs every grid configuration for every seed on the same prepared data.
/// Seeds are independent and may run on up to `jobs` threads; results do not
/// depend on `jobs`. Convergence uses min(100, epochs) reference epochs.
AblationResult run_ablation_grid(const PreparedData& data, const TrainConfig& base,
                                 std::span<const std::uint64_t> seeds, std::size_t jobs = 1,
                                 const RunObserver& observer = {});

std::string summary_csv(std::span<const SummaryRow> rows);
std::string convergence_csv(std::span<const ConvergenceRow> rows);

}  // namespace piets
