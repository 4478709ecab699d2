// Copyright (c) 2026 The PIETS Authors
// SPDX-License-Identifier: Apache-2.0
//
// Multi-source time-series containers and the preprocessing that turns a
// set of staggered sources into model-ready windows.
//
// Timeline convention: one integer tick per day. A source observes every
// tick from `initial_t` to its last observation, with no interior gaps.

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "piets/tensor.hpp"

namespace piets {

/// Row-major matrix that may have zero rows (an empty early range).
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

  double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
  std::span<const double> row(std::size_t r) const { return {data.data() + r * cols, cols}; }

  /// Rows [begin, end).
  Matrix slice_rows(std::size_t begin, std::size_t end) const;
  std::vector<double> column(std::size_t c) const;

  friend bool operator==(const Matrix&, const Matrix&) = default;
};

struct SourceSeries {
  std::string id;
  std::int64_t initial_t = 0;
  std::int64_t interval = 1;
  Matrix features;  // n_obs x D
  std::vector<std::string> feature_names;

  std::size_t n_obs() const noexcept { return features.rows; }
  std::size_t dim() const noexcept { return features.cols; }
  std::int64_t last_t() const noexcept {
    return initial_t + (static_cast<std::int64_t>(n_obs()) - 1) * interval;
  }
  std::optional<std::size_t> column_index(const std::string& name) const;
};

struct AlignedTimeline {
  std::vector<SourceSeries> sources;
  std::int64_t present_t = 0;
  std::size_t target_source = 0;
  std::size_t target_column = 0;

  std::int64_t latest_initial() const;
  /// Throws DomainError or ContractError when an invariant does not hold.
  void validate() const;
};

/// Aligns sources on the shared timeline. `present_t` defaults to the latest
/// tick observed by every source; observations after it are dropped.
AlignedTimeline make_timeline(std::vector<SourceSeries> sources, std::size_t target_source,
                              std::size_t target_column,
                              std::optional<std::int64_t> present_t = std::nullopt);

struct SourceSplit {
  std::string id;
  std::int64_t early_begin = 0;  // ticks [early_begin, early_end)
  std::int64_t early_end = 0;
  std::int64_t late_begin = 0;  // ticks [late_begin, late_end]
  std::int64_t late_end = 0;
  Matrix early;
  Matrix late;

  std::vector<std::int64_t> early_times() const;
  std::vector<std::int64_t> late_times() const;
};

struct SubsequenceSplit {
  std::vector<SourceSplit> parts;
  std::int64_t latest_initial = 0;
  std::int64_t present_t = 0;

  std::size_t late_length() const { return parts.empty() ? 0 : parts[0].late.rows; }
};

/// Early sub-sequence: [initial_t, latest_initial); late: [latest_initial, present_t].
SubsequenceSplit split_early_late(const AlignedTimeline& tl);

/// Number of windows of length `lag` whose target lies `horizon` rows past
/// the window's last row: n - lag - horizon + 1. With horizon 0 the target
/// is the window's own last row and the count is n - lag + 1.
std::size_t window_count(std::size_t n, std::size_t lag, std::size_t horizon);

struct WindowSlice {
  Tensor inputs;                        // [N x lag x D]
  std::vector<double> targets;          // [N]
  std::vector<std::size_t> starts;      // first row of each window
  std::vector<std::size_t> target_rows; // row each target was taken from
};

/// Sliding windows over `rows` [n x D]. Window i covers rows [i, i+lag) and
/// its target is target[i + lag + horizon - 1].
WindowSlice sliding_windows(const Matrix& rows, std::span<const double> target, std::size_t lag,
                            std::size_t horizon = 1);

struct WindowedDataset {
  std::vector<Tensor> inputs;  // per source [N x lag x D_s]
  std::vector<double> targets; // [N]
  std::vector<std::size_t> target_rows;
  std::size_t lag = 0;
  std::size_t horizon = 1;

  std::size_t size() const noexcept { return targets.size(); }
  std::size_t sources() const noexcept { return inputs.size(); }
  std::size_t dim(std::size_t s) const { return inputs[s].dim(2); }
  /// Window i of source s as a [lag x D_s] tensor.
  Tensor window(std::size_t s, std::size_t i) const;
};

/// Windows every source's late range with a shared target series.
WindowedDataset make_windowed_dataset(std::span<const Matrix> late, std::span<const double> target,
                                      std::size_t lag, std::size_t horizon = 1);

struct NormStats {
  std::vector<double> mean;
  std::vector<double> stddev;  // population, floored at 1e-8
};

NormStats normalize_fit(const Matrix& train);
Matrix normalize_apply(const Matrix& x, const NormStats& stats);
Matrix denormalize(const Matrix& y, const NormStats& stats);
/// Identity statistics (mean 0, sd 1) for `cols` features.
NormStats identity_stats(std::size_t cols);

struct Range {
  std::size_t begin = 0;
  std::size_t end = 0;  // exclusive

  std::size_t size() const noexcept { return end - begin; }
  friend bool operator==(const Range&, const Range&) = default;
};

struct SplitRanges {
  Range train;
  Range val;
  Range test;
};

/// Chronological split of N windows: floor(train_frac·N) windows form the
/// training block, the last floor(val_frac·block) of which validate; the
/// remainder is the test block. Every block must be non-empty.
SplitRanges train_test_split(std::size_t n_windows, double train_frac = 0.66,
                             double val_frac = 0.20);

/// Sample autocorrelation r_0..r_max_lag.
std::vector<double> acf(std::span<const double> series, std::size_t max_lag);

struct DataConfig {
  std::size_t lag = 7;
  std::size_t horizon = 1;
  double train_frac = 0.66;
  double val_frac = 0.20;
  bool normalize = true;
};

/// Everything the models consume, derived once from a timeline.
struct PreparedData {
  SubsequenceSplit split;
  std::vector<Matrix> early;       // per source, normalized with early-range statistics
  std::vector<NormStats> early_stats;
  /// Per source, the target at each early row on the normalized target
  /// scale; empty when the target series does not cover that early range.
  std::vector<std::vector<double>> early_target;
  std::vector<NormStats> late_stats;
  double target_mean = 0.0;
  double target_std = 1.0;
  WindowedDataset windows;         // normalized late features and target
  SplitRanges ranges;
  DataConfig config;
  /// Late rows used to fit the late statistics: [0, stats_rows).
  std::size_t stats_rows = 0;

  std::vector<std::string> source_ids() const;
  std::vector<std::size_t> dims() const;
};

PreparedData prepare_data(const AlignedTimeline& tl, const DataConfig& cfg);

}  // namespace piets
