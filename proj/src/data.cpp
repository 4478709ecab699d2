// Copyright (c) 2026 The PIETS Authors
// SPDX-License-Identifier: Apache-2.0

#include "piets/data.hpp"

#include <algorithm>
#include <cmath>

#include "piets/errors.hpp"

namespace piets {

Matrix Matrix::slice_rows(std::size_t begin, std::size_t end) const {
  if (begin > end || end > rows) throw DimensionError("row slice out of range");
  Matrix out(end - begin, cols);
  std::copy(data.begin() + begin * cols, data.begin() + end * cols, out.data.begin());
  return out;
}

std::vector<double> Matrix::column(std::size_t c) const {
  if (c >= cols) throw DimensionError("column " + std::to_string(c) + " out of range");
  std::vector<double> out(rows);
  for (std::size_t r = 0; r < rows; ++r) out[r] = at(r, c);
  return out;
}

std::optional<std::size_t> SourceSeries::column_index(const std::string& name) const {
  auto it = std::find(feature_names.begin(), feature_names.end(), name);
  if (it == feature_names.end()) return std::nullopt;
  return static_cast<std::size_t>(it - feature_names.begin());
}

std::int64_t AlignedTimeline::latest_initial() const {
  std::int64_t latest = sources.at(0).initial_t;
  for (const auto& s : sources) latest = std::max(latest, s.initial_t);
  return latest;
}

void AlignedTimeline::validate() const {
  if (sources.empty()) throw DomainError("timeline has no sources");
  if (target_source >= sources.size()) throw ContractError("target source index out of range");
  if (target_column >= sources[target_source].dim()) {
    throw ContractError("target column out of range for source '" + sources[target_source].id + "'");
  }
  for (const auto& s : sources) {
    if (s.n_obs() == 0) throw DomainError("source '" + s.id + "' has no observations");
    if (s.interval != 1) {
      throw DomainError("source '" + s.id + "' has interval " + std::to_string(s.interval) +
                        "; only daily (interval 1) sources are supported");
    }
    if (s.feature_names.size() != s.dim()) {
      throw ContractError("source '" + s.id + "' feature names do not match its columns");
    }
    if (s.last_t() > present_t) {
      throw DomainError("source '" + s.id + "' observes past the present tick " +
                        std::to_string(present_t));
    }
    if (s.last_t() < present_t) {
      throw DomainError("source '" + s.id + "' stops at tick " + std::to_string(s.last_t()) +
                        " before the present tick " + std::to_string(present_t));
    }
    for (double v : s.features.data) {
      if (!std::isfinite(v)) throw DomainError("source '" + s.id + "' contains a non-finite value");
    }
  }
  if (latest_initial() > present_t) throw DomainError("latest initial tick is after the present tick");
}

AlignedTimeline make_timeline(std::vector<SourceSeries> sources, std::size_t target_source,
                              std::size_t target_column, std::optional<std::int64_t> present_t) {
  if (sources.empty()) throw DomainError("timeline has no sources");
  std::int64_t present = present_t.value_or(sources[0].last_t());
  if (!present_t) {
    for (const auto& s : sources) present = std::min(present, s.last_t());
  }
  for (auto& s : sources) {
    if (s.last_t() > present && s.initial_t <= present) {
      const auto keep = static_cast<std::size_t>(present - s.initial_t + 1);
      s.features = s.features.slice_rows(0, keep);
    }
  }
  AlignedTimeline tl{std::move(sources), present, target_source, target_column};
  tl.validate();
  return tl;
}

std::vector<std::int64_t> SourceSplit::early_times() const {
  std::vector<std::int64_t> t;
  for (auto i = early_begin; i < early_end; ++i) t.push_back(i);
  return t;
}

std::vector<std::int64_t> SourceSplit::late_times() const {
  std::vector<std::int64_t> t;
  for (auto i = late_begin; i <= late_end; ++i) t.push_back(i);
  return t;
}

SubsequenceSplit split_early_late(const AlignedTimeline& tl) {
  tl.validate();
  SubsequenceSplit out;
  out.latest_initial = tl.latest_initial();
  out.present_t = tl.present_t;
  for (const auto& s : tl.sources) {
    SourceSplit part;
    part.id = s.id;
    part.early_begin = s.initial_t;
    part.early_end = out.latest_initial;
    part.late_begin = out.latest_initial;
    part.late_end = tl.present_t;
    const auto n_early = static_cast<std::size_t>(out.latest_initial - s.initial_t);
    part.early = s.features.slice_rows(0, n_early);
    part.late = s.features.slice_rows(n_early, s.n_obs());
    out.parts.push_back(std::move(part));
  }
  return out;
}

std::size_t window_count(std::size_t n, std::size_t lag, std::size_t horizon) {
  if (lag == 0) throw DomainError("window length must be positive");
  if (n < lag + horizon) return 0;
  return n - lag - horizon + 1;
}

WindowSlice sliding_windows(const Matrix& rows, std::span<const double> target, std::size_t lag,
                            std::size_t horizon) {
  if (target.size() != rows.rows) {
    throw DimensionError("target has " + std::to_string(target.size()) + " rows, features have " +
                         std::to_string(rows.rows));
  }
  const std::size_t n = rows.rows;
  const std::size_t count = window_count(n, lag, horizon);
  if (count == 0) {
    throw DomainError("series of length " + std::to_string(n) + " is too short: need at least " +
                      std::to_string(lag + horizon) + " rows for windows of length " +
                      std::to_string(lag) + " with horizon " + std::to_string(horizon));
  }
  const std::size_t D = rows.cols;
  WindowSlice out;
  out.inputs = Tensor({count, lag, D});
  auto& dst = out.inputs.storage();
  for (std::size_t i = 0; i < count; ++i) {
    std::copy(rows.data.begin() + i * D, rows.data.begin() + (i + lag) * D,
              dst.begin() + i * lag * D);
    const std::size_t t = i + lag + horizon - 1;
    out.starts.push_back(i);
    out.target_rows.push_back(t);
    out.targets.push_back(target[t]);
  }
  return out;
}

Tensor WindowedDataset::window(std::size_t s, std::size_t i) const {
  const Tensor& all = inputs.at(s);
  const std::size_t M = all.dim(1), D = all.dim(2);
  if (i >= all.dim(0)) throw DimensionError("window index out of range");
  std::vector<double> data(all.storage().begin() + i * M * D,
                           all.storage().begin() + (i + 1) * M * D);
  return Tensor({M, D}, std::move(data));
}

WindowedDataset make_windowed_dataset(std::span<const Matrix> late, std::span<const double> target,
                                      std::size_t lag, std::size_t horizon) {
  if (late.empty()) throw DomainError("no sources to window");
  WindowedDataset ds;
  ds.lag = lag;
  ds.horizon = horizon;
  for (std::size_t s = 0; s < late.size(); ++s) {
    if (late[s].rows != late[0].rows) throw DimensionError("late ranges differ in length");
    auto slice = sliding_windows(late[s], target, lag, horizon);
    if (s == 0) {
      ds.targets = std::move(slice.targets);
      ds.target_rows = std::move(slice.target_rows);
    }
    ds.inputs.push_back(std::move(slice.inputs));
  }
  return ds;
}

NormStats normalize_fit(const Matrix& train) {
  if (train.rows == 0) throw DomainError("cannot fit normalization on zero rows");
  NormStats st;
  st.mean.assign(train.cols, 0.0);
  st.stddev.assign(train.cols, 0.0);
  const double n = static_cast<double>(train.rows);
  for (std::size_t c = 0; c < train.cols; ++c) {
    double sum = 0.0;
    for (std::size_t r = 0; r < train.rows; ++r) sum += train.at(r, c);
    const double mu = sum / n;
    double ss = 0.0;
    for (std::size_t r = 0; r < train.rows; ++r) {
      const double d = train.at(r, c) - mu;
      ss += d * d;
    }
    st.mean[c] = mu;
    st.stddev[c] = std::max(std::sqrt(ss / n), 1e-8);
  }
  return st;
}

namespace {

void check_stats(const Matrix& x, const NormStats& st) {
  if (st.mean.size() != x.cols || st.stddev.size() != x.cols) {
    throw DimensionError("normalization statistics cover " + std::to_string(st.mean.size()) +
                         " features, data has " + std::to_string(x.cols));
  }
}

}  // namespace

Matrix normalize_apply(const Matrix& x, const NormStats& st) {
  check_stats(x, st);
  Matrix out = x;
  for (std::size_t r = 0; r < x.rows; ++r) {
    for (std::size_t c = 0; c < x.cols; ++c) out.at(r, c) = (x.at(r, c) - st.mean[c]) / st.stddev[c];
  }
  return out;
}

Matrix denormalize(const Matrix& y, const NormStats& st) {
  check_stats(y, st);
  Matrix out = y;
  for (std::size_t r = 0; r < y.rows; ++r) {
    for (std::size_t c = 0; c < y.cols; ++c) out.at(r, c) = y.at(r, c) * st.stddev[c] + st.mean[c];
  }
  return out;
}

NormStats identity_stats(std::size_t cols) {
  return {std::vector<double>(cols, 0.0), std::vector<double>(cols, 1.0)};
}

SplitRanges train_test_split(std::size_t n_windows, double train_frac, double val_frac) {
  if (!(train_frac > 0.0 && train_frac < 1.0) || !(val_frac > 0.0 && val_frac < 1.0)) {
    throw DomainError("split fractions must lie strictly between 0 and 1");
  }
  // The epsilon absorbs representation error such as 0.66 * 50 = 32.99999...
  auto floor_frac = [](double frac, std::size_t n) {
    return static_cast<std::size_t>(std::floor(frac * static_cast<double>(n) + 1e-9));
  };
  const std::size_t block = floor_frac(train_frac, n_windows);
  const std::size_t n_val = floor_frac(val_frac, block);
  const std::size_t n_train = block - n_val;
  const std::size_t n_test = n_windows - block;
  if (n_train == 0 || n_val == 0 || n_test == 0) {
    throw DomainError("split of " + std::to_string(n_windows) + " windows leaves an empty block (train " +
                      std::to_string(n_train) + ", validation " + std::to_string(n_val) + ", test " +
                      std::to_string(n_test) + ")");
  }
  return {{0, n_train}, {n_train, block}, {block, n_windows}};
}

std::vector<double> acf(std::span<const double> series, std::size_t max_lag) {
  const std::size_t n = series.size();
  if (n <= max_lag) {
    throw DomainError("series of length " + std::to_string(n) + " is too short for max lag " +
                      std::to_string(max_lag));
  }
  double mean = 0.0;
  for (double v : series) mean += v;
  mean /= static_cast<double>(n);
  double denom = 0.0;
  for (double v : series) denom += (v - mean) * (v - mean);
  if (denom == 0.0) throw DomainError("autocorrelation undefined: series has zero variance");
  std::vector<double> r(max_lag + 1);
  for (std::size_t k = 0; k <= max_lag; ++k) {
    double num = 0.0;
    for (std::size_t t = 0; t + k < n; ++t) num += (series[t] - mean) * (series[t + k] - mean);
    r[k] = num / denom;
  }
  return r;
}

std::vector<std::string> PreparedData::source_ids() const {
  std::vector<std::string> ids;
  for (const auto& p : split.parts) ids.push_back(p.id);
  return ids;
}

std::vector<std::size_t> PreparedData::dims() const {
  std::vector<std::size_t> d;
  for (const auto& p : split.parts) d.push_back(p.late.cols);
  return d;
}

PreparedData prepare_data(const AlignedTimeline& tl, const DataConfig& cfg) {
  PreparedData pd;
  pd.config = cfg;
  pd.split = split_early_late(tl);
  const std::size_t n = pd.split.late_length();
  const std::size_t n_windows = window_count(n, cfg.lag, cfg.horizon);
  if (n_windows == 0) {
    throw DomainError("overlapping range of " + std::to_string(n) + " ticks is too short for lag " +
                      std::to_string(cfg.lag));
  }
  pd.ranges = train_test_split(n_windows, cfg.train_frac, cfg.val_frac);
  // Statistics come from the rows touched by training windows: their inputs
  // and their targets, nothing later.
  pd.stats_rows = pd.ranges.train.end - 1 + cfg.lag + cfg.horizon;

  std::vector<Matrix> late;
  for (const auto& part : pd.split.parts) {
    NormStats ls = cfg.normalize ? normalize_fit(part.late.slice_rows(0, pd.stats_rows))
                                 : identity_stats(part.late.cols);
    late.push_back(normalize_apply(part.late, ls));
    pd.late_stats.push_back(std::move(ls));

    NormStats es = cfg.normalize && part.early.rows > 0 ? normalize_fit(part.early)
                                                         : identity_stats(part.early.cols);
    pd.early.push_back(normalize_apply(part.early, es));
    pd.early_stats.push_back(std::move(es));
  }

  const auto& tstats = pd.late_stats[tl.target_source];
  pd.target_mean = tstats.mean[tl.target_column];
  pd.target_std = tstats.stddev[tl.target_column];
  const std::vector<double> target = late[tl.target_source].column(tl.target_column);

  const auto& provider = tl.sources[tl.target_source];
  for (const auto& part : pd.split.parts) {
    std::vector<double> et;
    if (part.early.rows > 0 && part.early_begin >= provider.initial_t) {
      for (std::int64_t t = part.early_begin; t < part.early_end; ++t) {
        const double raw = provider.features.at(static_cast<std::size_t>(t - provider.initial_t), tl.target_column);
        et.push_back((raw - pd.target_mean) / pd.target_std);
      }
    }
    pd.early_target.push_back(std::move(et));
  }
  pd.windows = make_windowed_dataset(late, target, cfg.lag, cfg.horizon);
  return pd;
}

}  // namespace piets
