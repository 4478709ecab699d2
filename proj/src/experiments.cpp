// Copyright (c) 2026 The PIETS Authors
// SPDX-License-Identifier: Apache-2.0

#include "piets/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include "piets/csv.hpp"
#include "piets/errors.hpp"

namespace piets {

std::string AblationConfig::label() const {
  return std::string("warm") + (warm_start ? "1" : "0") + "_attn" + (attention ? "1" : "0");
}

ExperimentReport run_baseline_predefined_window(const PreparedData& data, const TrainConfig& cfg,
                                                const EpochLogger& log) {
  TrainConfig bcfg = cfg;
  bcfg.warm_start = false;
  bcfg.attention = false;
  BaselineModel model(data.dims(), data.config.lag, bcfg);
  const auto curves = train(model, data.windows, data.ranges, bcfg, log);
  const auto eval = evaluate(model, data.windows, data.ranges.test, data.target_mean, data.target_std);
  ExperimentReport r = make_report(model, data, bcfg, curves, eval);
  r.early_rows_used = 0;
  return r;
}

SummaryStat summary_stat(std::span<const double> values) {
  if (values.empty()) throw DomainError("summary of no values");
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  SummaryStat s;
  s.median = n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
  double sum = 0.0;
  for (double x : v) sum += x;
  s.mean = sum / static_cast<double>(n);
  if (n > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - s.mean) * (x - s.mean);
    s.stdev = std::sqrt(ss / static_cast<double>(n - 1));
  }
  return s;
}

std::vector<SummaryRow> summarize(std::span<const ExperimentReport> reports) {
  if (reports.empty()) throw DomainError("nothing to summarize");
  const auto& ref = reports.front();
  for (const auto& r : reports) {
    if (r.model_kind != ref.model_kind || r.config.epochs != ref.config.epochs ||
        r.n_train != ref.n_train || r.n_val != ref.n_val || r.n_test != ref.n_test ||
        r.data.lag != ref.data.lag) {
      throw ContractError("cannot summarize reports with different schemas");
    }
  }
  std::vector<SummaryRow> rows;
  for (const auto& cfg : kAblationGrid) {
    std::vector<double> mse, rmse, mape;
    for (const auto& r : reports) {
      if (r.config.warm_start == cfg.warm_start && r.config.attention == cfg.attention) {
        mse.push_back(r.test.mse);
        rmse.push_back(r.test.rmse);
        mape.push_back(r.test.mape);
      }
    }
    if (mse.empty()) continue;
    rows.push_back({cfg, mse.size(), summary_stat(mse), summary_stat(rmse), summary_stat(mape)});
  }
  return rows;
}

std::optional<std::size_t> epochs_to_threshold(std::span<const double> curve, double threshold) {
  for (std::size_t e = 0; e < curve.size(); ++e) {
    if (curve[e] < threshold) return e + 1;
  }
  return std::nullopt;
}

std::optional<long> ConvergenceAnalysis::difference() const {
  if (!cold_epochs || !warm_epochs) return std::nullopt;
  return static_cast<long>(*cold_epochs) - static_cast<long>(*warm_epochs);
}

ConvergenceAnalysis convergence_analysis(std::span<const double> cold_curve,
                                         std::span<const double> warm_curve,
                                         std::size_t reference_epochs) {
  if (reference_epochs == 0) throw DomainError("reference window must cover at least one epoch");
  if (cold_curve.size() < reference_epochs || warm_curve.size() < reference_epochs) {
    throw DomainError("convergence analysis needs at least " + std::to_string(reference_epochs) +
                      " epochs per curve");
  }
  ConvergenceAnalysis a;
  a.reference_epochs = reference_epochs;
  double sum = 0.0;
  for (std::size_t e = 0; e < reference_epochs; ++e) sum += cold_curve[e];
  a.threshold = sum / static_cast<double>(reference_epochs);
  a.cold_epochs = epochs_to_threshold(cold_curve, a.threshold);
  a.warm_epochs = epochs_to_threshold(warm_curve, a.threshold);
  return a;
}

const AblationRun& AblationResult::find(AblationConfig c, std::uint64_t seed) const {
  for (const auto& r : runs) {
    if (r.config == c && r.seed == seed) return r;
  }
  throw ContractError("no run for " + c.label() + " seed " + std::to_string(seed));
}

AblationResult run_ablation_grid(const PreparedData& data, const TrainConfig& base,
                                 std::span<const std::uint64_t> seeds, std::size_t jobs,
                                 const RunObserver& observer) {
  if (seeds.empty()) throw DomainError("ablation grid needs at least one seed");
  const std::size_t n_seeds = seeds.size();
  // Slot [config][seed], filled independently per seed.
  std::vector<std::optional<AblationRun>> slots(kAblationGrid.size() * n_seeds);
  std::mutex observer_mutex;

  auto run_seed = [&](std::size_t k) {
    TrainConfig cfg = base;
    cfg.seed = seeds[k];
    const auto pretrained = pretrain_all(data, cfg);
    for (std::size_t c = 0; c < kAblationGrid.size(); ++c) {
      cfg.warm_start = kAblationGrid[c].warm_start;
      cfg.attention = kAblationGrid[c].attention;
      auto run = run_piets(data, pretrained, cfg);
      slots[c * n_seeds + k] = AblationRun{kAblationGrid[c], seeds[k], std::move(run.report)};
      if (observer) {
        std::lock_guard lock(observer_mutex);
        observer(*slots[c * n_seeds + k]);
      }
    }
  };

  const std::size_t workers = std::clamp<std::size_t>(jobs, 1, n_seeds);
  if (workers == 1) {
    for (std::size_t k = 0; k < n_seeds; ++k) run_seed(k);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(n_seeds);
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t k; (k = next.fetch_add(1)) < n_seeds;) {
          try {
            run_seed(k);
          } catch (...) {
            errors[k] = std::current_exception();
          }
        }
      });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  AblationResult result;
  for (auto& s : slots) result.runs.push_back(std::move(*s));
  std::vector<ExperimentReport> reports;
  for (const auto& r : result.runs) reports.push_back(r.report);
  result.summary = summarize(reports);

  const std::size_t reference = std::min<std::size_t>(100, base.epochs);
  for (const bool attn : {false, true}) {
    for (const auto seed : seeds) {
      const auto& cold = result.find({false, attn}, seed).report.train_loss;
      const auto& warm = result.find({true, attn}, seed).report.train_loss;
      auto a = convergence_analysis(cold, warm, reference);
      (attn ? result.convergence_attention_on : result.convergence_attention_off).push_back(a);
    }
  }
  for (const auto& r : result.runs) {
    const auto& cold = result.find({false, r.config.attention}, r.seed).report.train_loss;
    const auto a = convergence_analysis(cold, r.report.train_loss, reference);
    result.convergence.push_back({r.config, r.seed, a.threshold, a.warm_epochs});
  }
  return result;
}

std::string summary_csv(std::span<const SummaryRow> rows) {
  std::string out = "config_warm,config_attn,seed_count,mse_median,mse_mean,mse_std,rmse_median,mape_median\n";
  for (const auto& r : rows) {
    out += std::string(r.config.warm_start ? "1" : "0") + "," + (r.config.attention ? "1" : "0") +
           "," + std::to_string(r.seed_count) + "," + format_double(r.mse.median) + "," +
           format_double(r.mse.mean) + "," + format_double(r.mse.stdev) + "," +
           format_double(r.rmse.median) + "," + format_double(r.mape.median) + "\n";
  }
  return out;
}

std::string convergence_csv(std::span<const ConvergenceRow> rows) {
  std::string out = "config,seed,threshold,epochs_to_threshold\n";
  for (const auto& r : rows) {
    out += r.config.label() + "," + std::to_string(r.seed) + "," + format_double(r.threshold) + "," +
           (r.epochs ? std::to_string(*r.epochs) : std::string("unreached")) + "\n";
  }
  return out;
}

}  // namespace piets
