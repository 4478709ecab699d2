// Copyright (c) 2026 The PIETS Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>

#include "piets/errors.hpp"
#include "piets/experiments.hpp"
#include "piets/random.hpp"
#include "piets/synth.hpp"

using namespace piets;

namespace {

ExperimentReport fake_report(bool warm, bool attn, double mse) {
  ExperimentReport r;
  r.model_kind = "piets";
  r.config.warm_start = warm;
  r.config.attention = attn;
  r.config.epochs = 10;
  r.test = {mse, std::sqrt(mse), mse / 2};
  r.n_train = 5;
  r.n_val = 2;
  r.n_test = 3;
  return r;
}

const PreparedData& benchmark_data() {
  static const PreparedData pd = prepare_data(generate_synthetic(SynthConfig{}), DataConfig{});
  return pd;
}

}  // namespace

TEST(SummaryStat, Cases) {
  const std::vector<double> one{0.3};
  const auto s = summary_stat(one);
  EXPECT_EQ(s.median, 0.3);
  EXPECT_EQ(s.mean, 0.3);
  EXPECT_EQ(s.stdev, 0.0);
  const std::vector<double> four{4, 1, 3, 2};
  const auto f = summary_stat(four);
  EXPECT_DOUBLE_EQ(f.median, 2.5);
  EXPECT_DOUBLE_EQ(f.mean, 2.5);
  EXPECT_NEAR(f.stdev, std::sqrt(5.0 / 3.0), 1e-12);
  const std::vector<double> same(5, 0.7);
  EXPECT_EQ(summary_stat(same).stdev, 0.0);
  EXPECT_THROW(summary_stat(std::vector<double>{}), DomainError);
}

TEST(Summarize, RowPerConfigInGridOrder) {
  std::vector<ExperimentReport> reports;
  for (int k = 0; k < 3; ++k) {
    for (const auto& c : kAblationGrid) reports.push_back(fake_report(c.warm_start, c.attention, 0.1 * (k + 1)));
  }
  const auto rows = summarize(reports);
  ASSERT_EQ(rows.size(), 4u);
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_EQ(rows[i].config, kAblationGrid[i]);
    EXPECT_EQ(rows[i].seed_count, 3u);
    EXPECT_NEAR(rows[i].mse.median, 0.2, 1e-15);
  }
  const auto csv = summary_csv(rows);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 5);
  EXPECT_TRUE(csv.starts_with(
      "config_warm,config_attn,seed_count,mse_median,mse_mean,mse_std,rmse_median,mape_median\n0,0,3,"));
}

TEST(Summarize, MixedSchemasRejected) {
  std::vector<ExperimentReport> reports{fake_report(false, false, 1), fake_report(true, false, 1)};
  reports[1].config.epochs = 11;
  EXPECT_THROW(summarize(reports), ContractError);
  reports[1] = fake_report(true, false, 1);
  reports[1].model_kind = "baseline";
  EXPECT_THROW(summarize(reports), ContractError);
  EXPECT_THROW(summarize(std::vector<ExperimentReport>{}), DomainError);
}

TEST(SummarizeProperty, PermutationInvariant) {
  Rng rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<ExperimentReport> reports;
    const int n = 1 + static_cast<int>(rng.uniform(0, 6));
    for (int i = 0; i < n; ++i) {
      const auto& c = kAblationGrid[static_cast<std::size_t>(rng.uniform(0, 4)) % 4];
      reports.push_back(fake_report(c.warm_start, c.attention, rng.uniform(0, 2)));
    }
    const auto a = summarize(reports);
    std::reverse(reports.begin(), reports.end());
    std::rotate(reports.begin(), reports.begin() + reports.size() / 2, reports.end());
    const auto b = summarize(reports);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      EXPECT_EQ(a[i].config, b[i].config);
      EXPECT_EQ(a[i].mse.median, b[i].mse.median);
      EXPECT_NEAR(a[i].mse.mean, b[i].mse.mean, 1e-14);
      EXPECT_NEAR(a[i].mse.stdev, b[i].mse.stdev, 1e-12);
    }
  }
}

TEST(Convergence, IdenticalCurvesGiveZero) {
  const std::vector<double> c{1.0, 0.6, 0.4, 0.3, 0.2};
  const auto a = convergence_analysis(c, c, 5);
  EXPECT_DOUBLE_EQ(a.threshold, 0.5);
  EXPECT_EQ(a.cold_epochs, 3u);
  EXPECT_EQ(a.warm_epochs, 3u);
  EXPECT_EQ(a.difference(), 0);
}

TEST(Convergence, LowerCurveArrivesFirst) {
  const std::vector<double> cold{1.0, 0.6, 0.4, 0.3, 0.2};
  std::vector<double> warm = cold;
  for (auto& v : warm) v -= 0.15;
  const auto a = convergence_analysis(cold, warm, 5);
  EXPECT_EQ(a.warm_epochs, 2u);
  EXPECT_EQ(a.difference(), 1);
}

TEST(Convergence, UnreachedAndShortCurves) {
  const std::vector<double> cold{1.0, 0.6, 0.4, 0.3, 0.2};
  const std::vector<double> flat(5, 2.0);
  const auto a = convergence_analysis(cold, flat, 5);
  EXPECT_FALSE(a.warm_epochs.has_value());
  EXPECT_FALSE(a.difference().has_value());
  EXPECT_THROW(convergence_analysis(cold, std::vector<double>(3, 0.1), 5), DomainError);
  EXPECT_THROW(convergence_analysis(cold, cold, 0), DomainError);
  // Strictly below: equal to the threshold does not count.
  EXPECT_EQ(epochs_to_threshold(std::vector<double>{0.5, 0.5, 0.49}, 0.5), 3u);
}

TEST(Convergence, CsvMarksUnreached) {
  const std::vector<ConvergenceRow> rows{{{false, true}, 2, 0.25, 7}, {{true, true}, 2, 0.25, std::nullopt}};
  EXPECT_EQ(convergence_csv(rows),
            "config,seed,threshold,epochs_to_threshold\nwarm0_attn1,2,0.25,7\nwarm1_attn1,2,0.25,unreached\n");
}

TEST(Baseline, SharesSchemaAndSkipsEarlyRows) {
  const auto& pd = benchmark_data();
  TrainConfig cfg;
  cfg.hidden = 4;
  cfg.epochs = 3;
  BaselineModel m(pd.dims(), 7, cfg);
  EXPECT_EQ(m.fused_dim(), 7u);
  EXPECT_TRUE(m.params().contains("baseline.lstm.W_i"));
  EXPECT_EQ(m.params().at("baseline.lstm.W_i").value().shape(), (Shape{7, 4}));
  const auto r = run_baseline_predefined_window(pd, cfg);
  EXPECT_EQ(r.model_kind, "baseline");
  EXPECT_EQ(r.early_rows_used, 0u);
  EXPECT_TRUE(r.attention_by_lag.empty());
  EXPECT_EQ(r.n_train, pd.ranges.train.size());
  EXPECT_EQ(r.n_test, pd.ranges.test.size());
  EXPECT_EQ(r.train_loss.size(), 3u);
}

TEST(Grid, SmallGridIsDeterministicAcrossJobs) {
  const auto& pd = benchmark_data();
  TrainConfig cfg;
  cfg.hidden = 4;
  cfg.epochs = 3;
  const std::vector<std::uint64_t> seeds{1, 2};
  std::size_t observed = 0;
  const auto a = run_ablation_grid(pd, cfg, seeds, 1, [&](const AblationRun&) { ++observed; });
  const auto b = run_ablation_grid(pd, cfg, seeds, 2);
  EXPECT_EQ(observed, 8u);
  ASSERT_EQ(a.runs.size(), 8u);
  for (std::size_t i = 0; i < a.runs.size(); ++i) {
    EXPECT_EQ(a.runs[i].config, kAblationGrid[i / 2]);
    EXPECT_EQ(a.runs[i].seed, seeds[i % 2]);
    EXPECT_EQ(a.runs[i].report.train_loss, b.runs[i].report.train_loss);
    EXPECT_EQ(a.runs[i].report.test.mse, b.runs[i].report.test.mse);
    // Every configuration sees the same windows.
    EXPECT_EQ(a.runs[i].report.n_test, pd.ranges.test.size());
  }
  EXPECT_EQ(a.summary.size(), 4u);
  EXPECT_EQ(a.convergence.size(), 8u);
  EXPECT_EQ(a.convergence_attention_on.size(), 2u);
  EXPECT_EQ(a.convergence_attention_off.size(), 2u);
  EXPECT_EQ(a.convergence_attention_on[0].reference_epochs, 3u);
  // Cold rows compare a curve with itself.
  EXPECT_EQ(a.convergence[0].epochs, a.convergence_attention_off[0].cold_epochs);
  // Attention on/off differ; warm start changes the branch weights.
  EXPECT_NE(a.find({false, false}, 1).report.test.mse, a.find({false, true}, 1).report.test.mse);
  EXPECT_NE(a.find({false, true}, 1).report.test.mse, a.find({true, true}, 1).report.test.mse);
  EXPECT_THROW(a.find({false, false}, 9), ContractError);
  EXPECT_THROW(run_ablation_grid(pd, cfg, std::vector<std::uint64_t>{}), DomainError);
}
