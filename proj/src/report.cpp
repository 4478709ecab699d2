// Copyright (c) 2026 The PIETS Authors
// SPDX-License-Identifier: Apache-2.0

#include "piets/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "json.hpp"
#include "piets/csv.hpp"
#include "piets/errors.hpp"
#include "piets/random.hpp"

namespace piets {

using ojson = nlohmann::ordered_json;

Metrics compute_metrics(std::span<const double> y, std::span<const double> y_hat) {
  if (y.size() != y_hat.size()) throw DimensionError("metrics: prediction count differs from target count");
  if (y.empty()) throw DomainError("metrics: no predictions");
  double se = 0.0, ape = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double e = y[i] - y_hat[i];
    se += e * e;
    ape += std::abs(e) / std::max(std::abs(y[i]), 1e-8);
  }
  const double n = static_cast<double>(y.size());
  Metrics m;
  m.mse = se / n;
  m.rmse = std::sqrt(m.mse);
  m.mape = ape / n;
  return m;
}

namespace {

ojson train_config_json(const TrainConfig& c) {
  ojson j;
  j["epochs"] = c.epochs;
  j["lr"] = c.lr;
  j["seed"] = c.seed;
  j["hidden"] = c.hidden;
  j["batch_size"] = c.batch_size;
  j["warm_start"] = c.warm_start;
  j["attention"] = c.attention;
  j["pretrain_epochs"] = c.effective_pretrain_epochs();
  j["pretrain_objective"] = objective_name(c.pretrain_objective);
  return j;
}

ojson data_config_json(const DataConfig& d) {
  ojson j;
  j["lag"] = d.lag;
  j["horizon"] = d.horizon;
  j["train_frac"] = d.train_frac;
  j["val_frac"] = d.val_frac;
  j["normalize"] = d.normalize;
  return j;
}

ojson metrics_obj(const Metrics& m) {
  ojson j;
  j["mse"] = m.mse;
  j["rmse"] = m.rmse;
  j["mape"] = m.mape;
  return j;
}

}  // namespace

std::string metrics_json(const ExperimentReport& r) {
  ojson j;
  j["model"] = r.model_kind;
  j["seed"] = r.seed;
  j["test"] = metrics_obj(r.test);
  j["test_raw"] = metrics_obj(r.test_raw);
  j["final_train_loss"] = r.train_loss.empty() ? 0.0 : r.train_loss.back();
  j["final_val_loss"] = r.val_loss.empty() ? 0.0 : r.val_loss.back();
  j["windows"] = {{"train", r.n_train}, {"val", r.n_val}, {"test", r.n_test}};
  j["early_rows_used"] = r.early_rows_used;
  ojson sources = ojson::array();
  for (std::size_t s = 0; s < r.source_ids.size(); ++s) {
    sources.push_back({{"id", r.source_ids[s]}, {"dim", r.source_dims.at(s)}});
  }
  j["sources"] = sources;
  ojson pre = ojson::array();
  for (const auto& p : r.pretraining) {
    ojson e;
    e["source"] = p.source_id;
    e["insufficient_early_data"] = p.insufficient_early_data;
    e["objective"] = objective_name(p.objective);
    e["early_rows"] = p.early_rows;
    e["windows"] = p.windows;
    e["epochs"] = p.epochs;
    e["first_loss"] = p.first_loss;
    e["final_loss"] = p.final_loss;
    e["seed"] = p.seed;
    pre.push_back(e);
  }
  j["pretraining"] = pre;
  j["config"] = train_config_json(r.config);
  j["data"] = data_config_json(r.data);
  j["config_hash"] = config_hash(r.config, r.data);
  return j.dump(2) + "\n";
}

std::string loss_curve_csv(const ExperimentReport& r) {
  std::string out = "epoch,train_loss,val_loss\n";
  for (std::size_t e = 0; e < r.train_loss.size(); ++e) {
    out += std::to_string(e + 1) + "," + format_double(r.train_loss[e]) + "," +
           format_double(e < r.val_loss.size() ? r.val_loss[e] : 0.0) + "\n";
  }
  return out;
}

std::string attention_csv(const ExperimentReport& r) {
  std::string out = "lag,weight\n";
  for (std::size_t m = 0; m < r.attention_by_lag.size(); ++m) {
    out += std::to_string(m + 1) + "," + format_double(r.attention_by_lag[m]) + "\n";
  }
  return out;
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open '" + tmp.string() + "' for writing");
    f << content;
    if (!f) throw IoError("write failed for '" + tmp.string() + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot move '" + tmp.string() + "' to '" + path.string() + "': " + ec.message());
}

void export_report(const ExperimentReport& r, const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create '" + out_dir.string() + "': " + ec.message());
  write_text_file(out_dir / "loss_curve.csv", loss_curve_csv(r));
  if (r.config.attention && !r.attention_by_lag.empty()) {
    write_text_file(out_dir / "attention_by_lag.csv", attention_csv(r));
  }
  // Last, so its presence marks a complete run.
  write_text_file(out_dir / "metrics.json", metrics_json(r));
}

std::string config_hash(const TrainConfig& cfg, const DataConfig& data) {
  ojson j;
  j["train"] = train_config_json(cfg);
  j["data"] = data_config_json(data);
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fnv1a(j.dump())));
  return buf;
}

}  // namespace piets
