// Copyright (c) 2026 The PIETS Authors
// SPDX-License-Identifier: Apache-2.0

#include "piets/training.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "piets/adam.hpp"
#include "piets/errors.hpp"

namespace piets {

namespace {

// One pass over items [0, n) in order, one Adam update per mini-batch of the
// batch-mean loss. Returns the mean per-item loss seen during the pass.
template <typename ItemLoss>
double run_epoch(ParameterStore& params, AdamState& adam, std::size_t n, std::size_t batch,
                 ItemLoss&& item_loss) {
  double total = 0.0;
  for (std::size_t b = 0; b < n; b += batch) {
    const std::size_t e = std::min(n, b + batch);
    const double inv = 1.0 / static_cast<double>(e - b);
    params.zero_grads();
    for (std::size_t i = b; i < e; ++i) {
      Var loss = item_loss(i);
      total += loss->value[0];
      ad::backward(ad::scale(loss, inv));
    }
    adam_step(params, adam);
  }
  return total / static_cast<double>(n);
}

Var squared_error(const Var& pred, double y) {
  auto diff = ad::sub(pred, ad::constant(Tensor::scalar(y)));
  return ad::mul(diff, diff);
}

}  // namespace

PretrainedWeights pretrain_encoder(const Matrix& early, std::size_t source_index,
                                   const std::string& source_id, std::size_t lag,
                                   const TrainConfig& cfg, std::span<const double> early_target) {
  PretrainedWeights out;
  out.source_id = source_id;
  out.source_index = source_index;
  out.provenance.source_id = source_id;
  out.provenance.seed = cfg.seed;
  out.provenance.early_rows = early.rows;
  if (early.rows < lag + 1) {
    out.provenance.insufficient_early_data = true;
    return out;
  }

  const bool supervised = cfg.pretrain_objective == PretrainObjective::target && !early_target.empty();
  if (supervised && early_target.size() != early.rows) {
    throw DimensionError("early target has " + std::to_string(early_target.size()) + " values for " +
                         std::to_string(early.rows) + " early rows");
  }
  out.provenance.objective = supervised ? PretrainObjective::target : PretrainObjective::next_step;

  const std::size_t D = early.cols;
  const std::size_t out_dim = supervised ? 1 : D;
  const std::string prefix = "branch." + std::to_string(source_index) + ".lstm";
  ParameterStore store;
  auto lstm = LstmParams::create(store, prefix, D, cfg.hidden, cfg.seed);
  auto head = DenseParams::create(store, "pretrain." + std::to_string(source_index) + ".head",
                                  cfg.hidden, out_dim, Activation::linear, cfg.seed);

  const std::vector<double> unused(early.rows, 0.0);
  const auto slice = sliding_windows(early, unused, lag, 1);
  const std::size_t N = slice.starts.size();
  std::vector<Var> inputs, targets;
  for (std::size_t i = 0; i < N; ++i) {
    std::vector<double> w(slice.inputs.storage().begin() + i * lag * D,
                          slice.inputs.storage().begin() + (i + 1) * lag * D);
    inputs.push_back(ad::constant(Tensor({lag, D}, std::move(w))));
    const std::size_t r = slice.target_rows[i];
    if (supervised) {
      targets.push_back(ad::constant(Tensor::scalar(early_target[r])));
    } else {
      const auto next = early.row(r);
      targets.push_back(ad::constant(Tensor({D}, std::vector<double>(next.begin(), next.end()))));
    }
  }

  AdamState adam;
  adam.lr = cfg.lr;
  const std::size_t epochs = cfg.effective_pretrain_epochs();
  for (std::size_t epoch = 1; epoch <= epochs; ++epoch) {
    const double loss = run_epoch(store, adam, N, cfg.batch_size, [&](std::size_t i) {
      auto pred = dense_forward(lstm_forward(inputs[i], lstm).last, head);
      auto diff = ad::sub(pred, targets[i]);
      return ad::mean(ad::mul(diff, diff));
    });
    if (!std::isfinite(loss)) {
      throw DivergenceError("encoder pre-training for source '" + source_id +
                            "' diverged at epoch " + std::to_string(epoch));
    }
    out.provenance.loss_curve.push_back(loss);
  }
  out.provenance.epochs = epochs;
  out.provenance.windows = N;
  out.provenance.first_loss = out.provenance.loss_curve.front();
  out.provenance.final_loss = out.provenance.loss_curve.back();
  out.tensors = snapshot(store, prefix + ".");
  return out;
}

std::vector<PretrainedWeights> pretrain_all(const PreparedData& data, const TrainConfig& cfg) {
  std::vector<PretrainedWeights> out;
  for (std::size_t s = 0; s < data.early.size(); ++s) {
    out.push_back(pretrain_encoder(data.early[s], s, data.split.parts[s].id, data.config.lag, cfg,
                                   data.early_target.at(s)));
  }
  return out;
}

std::vector<Tensor> windows_at(const WindowedDataset& data, std::size_t i) {
  std::vector<Tensor> w;
  w.reserve(data.sources());
  for (std::size_t s = 0; s < data.sources(); ++s) w.push_back(data.window(s, i));
  return w;
}

TrainResult train(Forecaster& model, const WindowedDataset& data, const SplitRanges& ranges,
                  const TrainConfig& cfg, const EpochLogger& log) {
  if (ranges.train.size() == 0 || ranges.val.size() == 0) {
    throw DomainError("training needs non-empty training and validation blocks");
  }
  if (cfg.epochs == 0) throw ContractError("epochs must be at least 1");
  if (cfg.batch_size == 0) throw ContractError("batch size must be at least 1");

  std::vector<std::vector<Tensor>> train_windows, val_windows;
  for (std::size_t i = ranges.train.begin; i < ranges.train.end; ++i) train_windows.push_back(windows_at(data, i));
  for (std::size_t i = ranges.val.begin; i < ranges.val.end; ++i) val_windows.push_back(windows_at(data, i));

  AdamState adam;
  adam.lr = cfg.lr;
  TrainResult result;
  ParameterStore& params = model.params();
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const double train_loss =
        run_epoch(params, adam, train_windows.size(), cfg.batch_size, [&](std::size_t i) {
          return squared_error(model.forward(train_windows[i]).value,
                               data.targets[ranges.train.begin + i]);
        });
    double val_sum = 0.0;
    for (std::size_t i = 0; i < val_windows.size(); ++i) {
      const double e = model.forward(val_windows[i]).value->value[0] - data.targets[ranges.val.begin + i];
      val_sum += e * e;
    }
    const double val_loss = val_sum / static_cast<double>(val_windows.size());
    if (!std::isfinite(train_loss) || !std::isfinite(val_loss)) {
      throw DivergenceError("training diverged at epoch " + std::to_string(epoch) +
                            " (non-finite loss)");
    }
    result.train_loss.push_back(train_loss);
    result.val_loss.push_back(val_loss);
    if (log) log(epoch, train_loss, val_loss);
  }
  return result;
}

Evaluation evaluate(const Forecaster& model, const WindowedDataset& data, Range block,
                    double target_mean, double target_std) {
  if (block.size() == 0) throw DomainError("evaluation block is empty");
  Evaluation ev;
  std::vector<double> raw_y, raw_hat;
  ev.attention_by_lag.assign(model.attention_on() ? model.lag() : 0, 0.0);
  for (std::size_t i = block.begin; i < block.end; ++i) {
    const auto pred = model.forward(windows_at(data, i));
    const double y_hat = pred.value->value[0];
    ev.predictions.push_back(y_hat);
    ev.targets.push_back(data.targets[i]);
    raw_hat.push_back(y_hat * target_std + target_mean);
    raw_y.push_back(data.targets[i] * target_std + target_mean);
    if (pred.alpha) {
      const auto& a = pred.alpha->value.storage();
      ev.alphas.emplace_back(a.begin(), a.end());
      for (std::size_t m = 0; m < a.size(); ++m) ev.attention_by_lag[m] += a[m];
    }
  }
  for (auto& w : ev.attention_by_lag) w /= static_cast<double>(block.size());
  ev.normalized = compute_metrics(ev.targets, ev.predictions);
  ev.raw = compute_metrics(raw_y, raw_hat);
  return ev;
}

ExperimentReport make_report(const Forecaster& model, const PreparedData& data,
                             const TrainConfig& cfg, const TrainResult& curves,
                             const Evaluation& eval) {
  ExperimentReport r;
  r.model_kind = model.kind();
  r.config = cfg;
  r.data = data.config;
  r.seed = cfg.seed;
  r.test = eval.normalized;
  r.test_raw = eval.raw;
  r.train_loss = curves.train_loss;
  r.val_loss = curves.val_loss;
  r.attention_by_lag = eval.attention_by_lag;
  r.n_train = data.ranges.train.size();
  r.n_val = data.ranges.val.size();
  r.n_test = data.ranges.test.size();
  r.source_ids = data.source_ids();
  r.source_dims = data.dims();
  return r;
}

PietsRun run_piets(const PreparedData& data, std::span<const PretrainedWeights> pretrained,
                   const TrainConfig& cfg, const EpochLogger& log) {
  const auto ids = data.source_ids();
  const auto dims = data.dims();
  std::span<const PretrainedWeights> used = cfg.warm_start ? pretrained : std::span<const PretrainedWeights>{};
  PietsModel model = build_model(ids, dims, data.config.lag, used, cfg);
  const auto curves = train(model, data.windows, data.ranges, cfg, log);
  const auto eval = evaluate(model, data.windows, data.ranges.test, data.target_mean, data.target_std);
  ExperimentReport report = make_report(model, data, cfg, curves, eval);
  for (const auto& p : used) {
    report.pretraining.push_back(p.provenance);
    if (p.usable()) report.early_rows_used += p.provenance.early_rows;
  }
  return {std::move(report), std::move(model),
          std::vector<PretrainedWeights>(used.begin(), used.end())};
}

PietsRun run_piets(const AlignedTimeline& tl, const DataConfig& data_cfg, const TrainConfig& cfg,
                   const EpochLogger& log) {
  const PreparedData data = prepare_data(tl, data_cfg);
  std::vector<PretrainedWeights> pretrained;
  if (cfg.warm_start) pretrained = pretrain_all(data, cfg);
  return run_piets(data, pretrained, cfg, log);
}

void save_checkpoint(const std::filesystem::path& dir, const PietsModel& model,
                     const TrainConfig& cfg, const DataConfig& data_cfg) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create '" + dir.string() + "': " + ec.message());
  save_tensors(dir / "model.bin", snapshot(model.params()));

  nlohmann::ordered_json j;
  nlohmann::ordered_json sources = nlohmann::ordered_json::array();
  for (std::size_t s = 0; s < model.branches().size(); ++s) {
    sources.push_back({{"id", model.branches()[s].source_id}, {"dim", model.dims()[s]}});
  }
  j["sources"] = sources;
  j["lag"] = model.lag();
  j["hidden"] = model.hidden();
  j["attention"] = model.attention_on();
  j["seed"] = cfg.seed;
  j["config_hash"] = config_hash(cfg, data_cfg);
  write_text_file(dir / "checkpoint.json", j.dump(2) + "\n");
}

PietsModel load_checkpoint(const std::filesystem::path& dir) {
  std::ifstream f(dir / "checkpoint.json");
  if (!f) throw IoError("cannot open '" + (dir / "checkpoint.json").string() + "'");
  nlohmann::json j;
  try {
    f >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("checkpoint.json: " + std::string(e.what()));
  }
  std::vector<std::string> ids;
  std::vector<std::size_t> dims;
  TrainConfig cfg;
  try {
    for (const auto& s : j.at("sources")) {
      ids.push_back(s.at("id").get<std::string>());
      dims.push_back(s.at("dim").get<std::size_t>());
    }
    cfg.hidden = j.at("hidden").get<std::size_t>();
    cfg.attention = j.at("attention").get<bool>();
    cfg.seed = j.at("seed").get<std::uint64_t>();
    cfg.warm_start = false;
    PietsModel model(ids, dims, j.at("lag").get<std::size_t>(), cfg);
    const auto tensors = load_tensors(dir / "model.bin");
    if (tensors.size() != model.params().size()) {
      throw ContractError("checkpoint holds " + std::to_string(tensors.size()) +
                          " tensors, model expects " + std::to_string(model.params().size()));
    }
    restore(model.params(), tensors);
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("checkpoint.json: " + std::string(e.what()));
  }
}

}  // namespace piets
