// Copyright (c) 2026 The PIETS Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "piets/errors.hpp"
#include "piets/grad_check.hpp"
#include "piets/synth.hpp"
#include "piets/training.hpp"
#include "test_helpers.hpp"

using namespace piets;
using piets::testing::random_tensor;
using piets::testing::read_file;
using piets::testing::scratch_dir;

namespace {

TrainConfig small_config(std::size_t epochs = 3) {
  TrainConfig c;
  c.hidden = 4;
  c.epochs = epochs;
  c.seed = 3;
  return c;
}

const PreparedData& benchmark_data() {
  static const PreparedData pd = prepare_data(generate_synthetic(SynthConfig{}), DataConfig{});
  return pd;
}

std::vector<Tensor> random_windows(Rng& rng, const std::vector<std::size_t>& dims, std::size_t lag) {
  std::vector<Tensor> w;
  for (auto d : dims) w.push_back(random_tensor(rng, {lag, d}, -1.5, 1.5));
  return w;
}

const std::vector<std::string> kIds{"a", "b", "c"};
const std::vector<std::size_t> kDims{3, 2, 1};

}  // namespace

TEST(Model, ParameterNamesAndShapes) {
  TrainConfig cfg = small_config();
  PietsModel m(kIds, kDims, 5, cfg);
  EXPECT_EQ(m.params().at("branch.0.lstm.W_i").value().shape(), (Shape{3, 4}));
  EXPECT_EQ(m.params().at("branch.2.lstm.U_g").value().shape(), (Shape{4, 4}));
  EXPECT_EQ(m.params().at("fusion.lstm.W_f").value().shape(), (Shape{12, 4}));
  EXPECT_EQ(m.params().at("attention.W_a").value().shape(), (Shape{4, 4}));
  EXPECT_EQ(m.params().at("attention.W_c").value().shape(), (Shape{8, 4}));
  EXPECT_EQ(m.params().at("head.W").value().shape(), (Shape{4, 1}));
  EXPECT_EQ(m.params().size(), 3 * 12 + 12 + 2 + 2u);
}

TEST(Model, AttentionOffIsFiniteAndIgnoresAttentionWeights) {
  TrainConfig cfg = small_config();
  cfg.attention = false;
  PietsModel m(kIds, kDims, 5, cfg);
  Rng rng(1);
  const auto w = random_windows(rng, kDims, 5);
  const auto before = m.forward(w);
  EXPECT_TRUE(before.value->value.all_finite());
  EXPECT_EQ(before.alpha, nullptr);
  for (const char* n : {"attention.W_a", "attention.W_c"}) {
    for (auto& v : m.params().at(n).value().storage()) v += rng.uniform(-3.0, 3.0);
  }
  EXPECT_EQ(m.forward(w).value->value, before.value->value);
}

TEST(Model, AlphaIsDistributionOverLags) {
  PietsModel m(kIds, kDims, 6, small_config());
  Rng rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    const auto p = m.forward(random_windows(rng, kDims, 6));
    ASSERT_EQ(p.alpha->value.shape(), (Shape{6}));
    double s = 0.0;
    for (double a : p.alpha->value.storage()) {
      EXPECT_GE(a, 0.0);
      s += a;
    }
    EXPECT_NEAR(s, 1.0, 1e-9);
  }
}

TEST(Model, WrongWindowLengthIsDimensionError) {
  PietsModel m(kIds, kDims, 5, small_config());
  Rng rng(3);
  auto w = random_windows(rng, kDims, 5);
  w[1] = random_tensor(rng, {4, 2});
  EXPECT_THROW(m.forward(w), DimensionError);
  w.pop_back();
  EXPECT_THROW(m.forward(w), DimensionError);
}

TEST(Model, EndToEndGradientAllParameters) {
  TrainConfig cfg = small_config();
  cfg.hidden = 3;
  PietsModel m(kIds, kDims, 4, cfg);
  Rng rng(4);
  const auto w = random_windows(rng, kDims, 4);
  auto loss = [&] {
    auto d = ad::sub(m.forward(w).value, ad::constant(Tensor::scalar(0.7)));
    return ad::mul(d, d);
  };
  const auto rep = grad_check_parameters(loss, m.params(), 1e-5, 1e-4);
  EXPECT_TRUE(rep.passed) << rep.worst_name << "[" << rep.worst_index << "] " << rep.max_rel_error;
  EXPECT_EQ(rep.coordinates, [&] {
    std::size_t n = 0;
    for (const auto& p : m.params()) n += p.value().size();
    return n;
  }());
}

TEST(Model, EveryParameterReceivesGradient) {
  PietsModel m(kIds, kDims, 5, small_config());
  Rng rng(5);
  m.params().zero_grads();
  ad::backward(ad::mul(m.forward(random_windows(rng, kDims, 5)).value, ad::constant(Tensor::scalar(1.0))));
  for (const auto& p : m.params()) {
    const auto& g = p.grad().storage();
    EXPECT_TRUE(std::any_of(g.begin(), g.end(), [](double v) { return v != 0.0; })) << p.name;
  }
}

TEST(Model, SameSeedBuildsAreBitIdentical) {
  const auto cfg = small_config();
  PietsModel a(kIds, kDims, 5, cfg), b(kIds, kDims, 5, cfg);
  EXPECT_EQ(snapshot(a.params()), snapshot(b.params()));
  TrainConfig other = cfg;
  other.seed = 4;
  PietsModel c(kIds, kDims, 5, other);
  EXPECT_NE(snapshot(a.params()), snapshot(c.params()));
}

TEST(Model, ParallelBranchesMatchSerial) {
  TrainConfig cfg = small_config();
  PietsModel serial(kIds, kDims, 5, cfg);
  cfg.parallel_branches = true;
  PietsModel parallel(kIds, kDims, 5, cfg);
  parallel.set_parallel_branches(true);
  Rng rng(6);
  for (int i = 0; i < 5; ++i) {
    const auto w = random_windows(rng, kDims, 5);
    const auto a = serial.forward(w), b = parallel.forward(w);
    EXPECT_EQ(a.value->value, b.value->value);
    ad::backward(ad::mul(a.value, a.value));
    ad::backward(ad::mul(b.value, b.value));
  }
  for (const auto& p : serial.params()) EXPECT_EQ(p.grad(), parallel.params().at(p.name).grad()) << p.name;
}

TEST(Pretrain, ExactlyOneWindowAtBoundary) {
  Rng rng(7);
  Matrix early(6, 2);
  for (auto& v : early.data) v = rng.uniform(-1, 1);
  const auto cfg = small_config(4);
  const auto pw = pretrain_encoder(early, 0, "a", 5, cfg);
  EXPECT_TRUE(pw.usable());
  EXPECT_EQ(pw.provenance.windows, 1u);
  EXPECT_EQ(pw.provenance.epochs, 4u);
  EXPECT_EQ(pw.tensors.size(), 12u);
  EXPECT_EQ(pw.tensors.front().first, "branch.0.lstm.W_i");
}

TEST(Pretrain, InsufficientEarlyData) {
  const auto pw = pretrain_encoder(Matrix(5, 2), 2, "c", 5, small_config());
  EXPECT_FALSE(pw.usable());
  EXPECT_TRUE(pw.provenance.insufficient_early_data);
  EXPECT_TRUE(pw.tensors.empty());
  const auto empty = pretrain_encoder(Matrix(0, 2), 2, "c", 5, small_config());
  EXPECT_TRUE(empty.provenance.insufficient_early_data);
}

TEST(Pretrain, NoiselessLossDecreases) {
  SynthConfig sc;
  sc.noise = 0.0;
  const auto pd = prepare_data(generate_synthetic(sc), DataConfig{});
  TrainConfig cfg = small_config(40);
  cfg.hidden = 8;
  const auto all = pretrain_all(pd, cfg);
  ASSERT_EQ(all.size(), 3u);
  for (std::size_t s = 0; s < 2; ++s) {
    EXPECT_LT(all[s].provenance.final_loss, all[s].provenance.first_loss) << s;
  }
  EXPECT_TRUE(all[2].provenance.insufficient_early_data);
}

TEST(Pretrain, TargetObjective) {
  const auto& pd = benchmark_data();
  TrainConfig cfg = small_config(30);
  cfg.pretrain_objective = PretrainObjective::target;
  const auto all = pretrain_all(pd, cfg);
  EXPECT_EQ(all[0].provenance.objective, PretrainObjective::target);
  EXPECT_EQ(all[1].provenance.objective, PretrainObjective::target);
  EXPECT_LT(all[0].provenance.final_loss, all[0].provenance.first_loss);
  // Snapshots still carry branch tensors only.
  for (const auto& [name, t] : all[0].tensors) EXPECT_TRUE(name.starts_with("branch.0.lstm.")) << name;
  EXPECT_THROW(pretrain_encoder(pd.early[0], 0, "s0", 7, cfg, std::vector<double>(3)), DimensionError);
}

TEST(BuildModel, WarmStartCopiesSnapshotExactly) {
  const auto& pd = benchmark_data();
  TrainConfig cfg = small_config(5);
  const auto pre = pretrain_all(pd, cfg);
  const auto model = build_model(pd.source_ids(), pd.dims(), 7, pre, cfg);
  for (std::size_t s = 0; s < 2; ++s) {
    for (const auto& [name, t] : pre[s].tensors) EXPECT_EQ(model.params().at(name).value(), t) << name;
  }
  // The branch without early data and everything downstream stay at their seeded values.
  cfg.warm_start = false;
  const auto cold = build_model(pd.source_ids(), pd.dims(), 7, {}, cfg);
  for (const auto& p : model.params()) {
    if (p.name.starts_with("branch.0.") || p.name.starts_with("branch.1.")) {
      EXPECT_NE(p.value(), cold.params().at(p.name).value()) << p.name;
    } else {
      EXPECT_EQ(p.value(), cold.params().at(p.name).value()) << p.name;
    }
  }
}

TEST(BuildModel, WrongHiddenSizeNamesTensor) {
  const auto& pd = benchmark_data();
  TrainConfig small = small_config(2);
  auto pre = pretrain_all(pd, small);
  TrainConfig big = small;
  big.hidden = 5;
  pre[0].provenance.insufficient_early_data = true;  // only branch 1 is checked
  try {
    build_model(pd.source_ids(), pd.dims(), 7, pre, big);
    FAIL() << "expected ContractError";
  } catch (const ContractError& e) {
    EXPECT_NE(std::string(e.what()).find("branch.1.lstm."), std::string::npos) << e.what();
  }
}

TEST(BuildModel, ForeignTensorRejected) {
  const auto& pd = benchmark_data();
  const auto cfg = small_config(2);
  auto pre = pretrain_all(pd, cfg);
  std::swap(pre[0].tensors, pre[1].tensors);
  EXPECT_THROW(build_model(pd.source_ids(), pd.dims(), 7, pre, cfg), ContractError);
}

TEST(Train, ZeroLearningRateLeavesParameters) {
  const auto& pd = benchmark_data();
  TrainConfig cfg = small_config(3);
  cfg.lr = 0.0;
  cfg.warm_start = false;
  auto model = build_model(pd.source_ids(), pd.dims(), 7, {}, cfg);
  const auto before = snapshot(model.params());
  train(model, pd.windows, pd.ranges, cfg);
  EXPECT_EQ(snapshot(model.params()), before);
}

TEST(Train, DeterministicCurvesAndShape) {
  const auto& pd = benchmark_data();
  TrainConfig cfg = small_config(4);
  std::vector<std::string> log;
  auto a = run_piets(pd, pretrain_all(pd, cfg), cfg,
                     [&](std::size_t e, double, double) { log.push_back(std::to_string(e)); });
  auto b = run_piets(pd, pretrain_all(pd, cfg), cfg);
  EXPECT_EQ(a.report.train_loss, b.report.train_loss);
  EXPECT_EQ(a.report.val_loss, b.report.val_loss);
  EXPECT_EQ(a.report.train_loss.size(), 4u);
  EXPECT_EQ(log, (std::vector<std::string>{"1", "2", "3", "4"}));
}

TEST(Train, LossDecreasesOnBenchmark) {
  const auto& pd = benchmark_data();
  TrainConfig cfg = small_config(30);
  cfg.hidden = 8;
  cfg.warm_start = false;
  const auto run = run_piets(pd, {}, cfg);
  EXPECT_LT(run.report.train_loss.back(), run.report.train_loss.front());
}

TEST(Train, RejectsEmptyBlocksAndZeroEpochs) {
  const auto& pd = benchmark_data();
  TrainConfig cfg = small_config(0);
  cfg.warm_start = false;
  auto model = build_model(pd.source_ids(), pd.dims(), 7, {}, cfg);
  EXPECT_THROW(train(model, pd.windows, pd.ranges, cfg), ContractError);
  cfg.epochs = 1;
  SplitRanges r = pd.ranges;
  r.val = {r.val.begin, r.val.begin};
  EXPECT_THROW(train(model, pd.windows, r, cfg), DomainError);
}

TEST(Train, DivergenceNamesEpoch) {
  const auto& pd = benchmark_data();
  TrainConfig cfg = small_config(2);
  cfg.warm_start = false;
  auto model = build_model(pd.source_ids(), pd.dims(), 7, {}, cfg);
  model.params().at("head.b").value()[0] = std::numeric_limits<double>::quiet_NaN();
  try {
    train(model, pd.windows, pd.ranges, cfg);
    FAIL() << "expected DivergenceError";
  } catch (const DivergenceError& e) {
    EXPECT_NE(std::string(e.what()).find("epoch 1"), std::string::npos) << e.what();
  }
}

TEST(Metrics, HandCases) {
  const std::vector<double> y{1, 2};
  const auto perfect = compute_metrics(y, y);
  EXPECT_EQ(perfect.mse, 0.0);
  EXPECT_EQ(perfect.rmse, 0.0);
  EXPECT_EQ(perfect.mape, 0.0);
  const auto m = compute_metrics(y, std::vector<double>{1.1, 1.8});
  EXPECT_NEAR(m.mse, 0.025, 1e-15);
  EXPECT_NEAR(m.rmse, 0.158113883, 1e-9);
  EXPECT_NEAR(m.mape, 0.1, 1e-15);
  Rng rng(8);
  for (int i = 0; i < 50; ++i) {
    std::vector<double> a(10), b(10);
    for (auto& v : a) v = rng.uniform(-3, 3);
    for (auto& v : b) v = rng.uniform(-3, 3);
    const auto r = compute_metrics(a, b);
    EXPECT_NEAR(r.rmse, std::sqrt(r.mse), 1e-12);
    EXPECT_NEAR(r.rmse * r.rmse, r.mse, 1e-10);
  }
}

TEST(Evaluate, ReportInvariantsAndRawScale) {
  const auto& pd = benchmark_data();
  TrainConfig cfg = small_config(3);
  const auto run = run_piets(pd, pretrain_all(pd, cfg), cfg);
  const auto& r = run.report;
  EXPECT_EQ(r.attention_by_lag.size(), 7u);
  double s = 0.0;
  for (double a : r.attention_by_lag) s += a;
  EXPECT_NEAR(s, 1.0, 1e-9);
  EXPECT_NEAR(r.test.rmse * r.test.rmse, r.test.mse, 1e-10);
  // Raw-scale MSE is the normalized MSE times the target variance.
  EXPECT_NEAR(r.test_raw.mse, r.test.mse * pd.target_std * pd.target_std, 1e-9);
  EXPECT_EQ(r.n_test, pd.ranges.test.size());
  EXPECT_EQ(r.early_rows_used, 45u);
}

TEST(Evaluate, PredictionIsPureFunction) {
  const auto& pd = benchmark_data();
  const auto run = run_piets(pd, {}, [] { auto c = small_config(2); c.warm_start = false; return c; }());
  const auto w = windows_at(pd.windows, 100);
  EXPECT_EQ(run.model.forward(w).value->value, run.model.forward(w).value->value);
  const auto e1 = evaluate(run.model, pd.windows, pd.ranges.test);
  const auto e2 = evaluate(run.model, pd.windows, pd.ranges.test);
  EXPECT_EQ(e1.predictions, e2.predictions);
  EXPECT_THROW(evaluate(run.model, pd.windows, Range{3, 3}), DomainError);
}

TEST(Export, FilesRowsAndIdempotence) {
  const auto& pd = benchmark_data();
  TrainConfig cfg = small_config(3);
  const auto run = run_piets(pd, pretrain_all(pd, cfg), cfg);
  const auto dir = scratch_dir("export");
  export_report(run.report, dir);
  const auto metrics = read_file(dir / "metrics.json");
  const auto curve = read_file(dir / "loss_curve.csv");
  const auto att = read_file(dir / "attention_by_lag.csv");
  EXPECT_EQ(std::count(curve.begin(), curve.end(), '\n'), 1 + 3);
  EXPECT_EQ(std::count(att.begin(), att.end(), '\n'), 1 + 7);
  EXPECT_TRUE(curve.starts_with("epoch,train_loss,val_loss\n1,"));
  EXPECT_TRUE(att.starts_with("lag,weight\n1,"));
  EXPECT_LT(metrics.find("\"model\""), metrics.find("\"test\""));
  export_report(run.report, dir);
  EXPECT_EQ(read_file(dir / "metrics.json"), metrics);
  EXPECT_EQ(read_file(dir / "loss_curve.csv"), curve);

  ExperimentReport no_att = run.report;
  no_att.attention_by_lag.clear();
  const auto dir2 = scratch_dir("export_noatt");
  export_report(no_att, dir2);
  EXPECT_FALSE(std::filesystem::exists(dir2 / "attention_by_lag.csv"));
  EXPECT_TRUE(std::filesystem::exists(dir2 / "metrics.json"));
}

TEST(Export, UnwritablePathIsIoError) {
  const auto dir = scratch_dir("export_bad");
  write_text_file(dir / "file", "x");
  const auto run = run_piets(benchmark_data(), {}, [] { auto c = small_config(1); c.warm_start = false; return c; }());
  EXPECT_THROW(export_report(run.report, dir / "file" / "sub"), IoError);
}

TEST(Checkpoint, RoundTrip) {
  const auto& pd = benchmark_data();
  const auto cfg = small_config(2);
  const auto run = run_piets(pd, pretrain_all(pd, cfg), cfg);
  const auto dir = scratch_dir("checkpoint");
  save_checkpoint(dir, run.model, cfg, pd.config);
  const auto loaded = load_checkpoint(dir);
  EXPECT_EQ(snapshot(loaded.params()), snapshot(run.model.params()));
  const auto w = windows_at(pd.windows, 120);
  EXPECT_EQ(loaded.forward(w).value->value, run.model.forward(w).value->value);
  EXPECT_NE(read_file(dir / "checkpoint.json").find(config_hash(cfg, pd.config)), std::string::npos);
}

TEST(Relevance, ZeroingRelevantSourceMattersMore) {
  // Target driven by source 1 alone; source 2 is pure distraction.
  SynthConfig sc;
  sc.weights = {0.0, 1.0, 0.0};
  sc.seed = 5;
  const auto pd = prepare_data(generate_synthetic(sc), DataConfig{});
  TrainConfig cfg;
  cfg.hidden = 8;
  cfg.epochs = 60;
  cfg.warm_start = false;
  const auto run = run_piets(pd, {}, cfg);
  std::vector<double> d_relevant, d_irrelevant;
  for (std::size_t i = 0; i < 50; ++i) {
    const auto w = windows_at(pd.windows, pd.ranges.test.begin + i % pd.ranges.test.size());
    const double base = run.model.forward(w).value->value[0];
    auto zero = [&](std::size_t s) {
      auto z = w;
      z[s].fill(0.0);
      return std::abs(run.model.forward(z).value->value[0] - base);
    };
    d_relevant.push_back(zero(1));
    d_irrelevant.push_back(zero(2));
  }
  auto median = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return 0.5 * (v[v.size() / 2 - 1] + v[v.size() / 2]);
  };
  EXPECT_LT(median(d_irrelevant), median(d_relevant));
}
