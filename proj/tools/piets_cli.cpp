// Copyright (c) 2026 The PIETS Authors
// SPDX-License-Identifier: Apache-2.0
//
// piets: command-line front end.
//
//   piets synth    --out DIR [--sources S --offsets LIST --length N --noise X --seed K]
//   piets train    --manifest FILE [--warm-start BOOL --attention BOOL --epochs N --seed K --out DIR]
//   piets baseline --manifest FILE [--epochs N --seed K --out DIR]
//   piets ablate   --manifest FILE [--seeds LIST --epochs N --jobs J --out DIR]
//   piets acf      --csv FILE --column NAME --max-lag N
//
// Failures print "piets: error: <kind>: <message>" to stderr. Usage errors
// exit 2, runtime errors exit 1.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "piets/csv.hpp"
#include "piets/data.hpp"
#include "piets/errors.hpp"
#include "piets/experiments.hpp"
#include "piets/manifest.hpp"
#include "piets/synth.hpp"
#include "piets/tensor_io.hpp"
#include "piets/training.hpp"

namespace fs = std::filesystem;
using namespace piets;

namespace {

constexpr const char* kSynthOrigin = "2020-01-01";

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SynthArgs {
  fs::path out;
  std::size_t sources = 3;
  std::vector<std::int64_t> offsets{0, 15, 30};
  std::vector<std::size_t> dims{2};
  std::size_t length = 200;
  double noise = 0.05;
  std::uint64_t seed = 1;
  std::size_t hidden = 16;
  std::size_t epochs = 150;
};

struct TrainOverrides {
  std::optional<bool> warm_start;
  std::optional<bool> attention;
  std::optional<std::size_t> epochs;
  std::optional<std::size_t> pretrain_epochs;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> hidden;
  std::optional<double> lr;
  std::optional<std::size_t> batch_size;
  std::optional<fs::path> out;

  void apply(RunManifest& m) const {
    if (warm_start) m.train.warm_start = *warm_start;
    if (attention) m.train.attention = *attention;
    if (epochs) m.train.epochs = *epochs;
    if (pretrain_epochs) m.train.pretrain_epochs = *pretrain_epochs;
    if (seed) m.train.seed = *seed;
    if (hidden) m.train.hidden = *hidden;
    if (lr) m.train.lr = *lr;
    if (batch_size) m.train.batch_size = *batch_size;
  }
};

void add_train_flags(CLI::App* cmd, TrainOverrides& o, bool toggles) {
  if (toggles) {
    cmd->add_option("--warm-start", o.warm_start, "Initialize branches from pre-trained encoders (true/false)");
    cmd->add_option("--attention", o.attention, "Enable the attention layer (true/false)");
  }
  cmd->add_option("--epochs", o.epochs, "Training epochs")->check(CLI::PositiveNumber);
  cmd->add_option("--pretrain-epochs", o.pretrain_epochs, "Encoder pre-training epochs");
  cmd->add_option("--hidden", o.hidden, "Hidden size")->check(CLI::PositiveNumber);
  cmd->add_option("--lr", o.lr, "Adam learning rate")->check(CLI::NonNegativeNumber);
  cmd->add_option("--batch-size", o.batch_size, "Mini-batch size")->check(CLI::PositiveNumber);
}

fs::path output_dir(const RunManifest& m, const std::optional<fs::path>& flag) {
  return flag ? *flag : m.resolve(m.out);
}

void print_epoch(std::size_t epoch, double train_loss, double val_loss) {
  std::cout << epoch << ',' << format_double(train_loss) << ',' << format_double(val_loss) << '\n';
}

int cmd_synth(const SynthArgs& a) {
  if (a.offsets.size() != a.sources) {
    throw UsageError("--offsets lists " + std::to_string(a.offsets.size()) + " values for " +
                     std::to_string(a.sources) + " sources");
  }
  for (auto off : a.offsets) {
    if (off < 0 || off >= static_cast<std::int64_t>(a.length)) {
      throw UsageError("offset " + std::to_string(off) + " outside [0, " + std::to_string(a.length) + ")");
    }
  }
  if (a.dims.size() != 1 && a.dims.size() != a.sources) {
    throw UsageError("--dims must list one value or one per source");
  }

  SynthConfig sc;
  sc.sources = a.sources;
  sc.offsets = a.offsets;
  sc.dims = a.dims;
  sc.length = a.length;
  sc.noise = a.noise;
  sc.seed = a.seed;
  const auto tl = generate_synthetic(sc);

  std::error_code ec;
  fs::create_directories(a.out, ec);
  if (ec) throw IoError("cannot create '" + a.out.string() + "': " + ec.message());

  RunManifest m;
  m.origin = kSynthOrigin;
  for (std::size_t s = 0; s < tl.sources.size(); ++s) {
    const auto& src = tl.sources[s];
    const std::string file = src.id + ".csv";
    write_source_csv(a.out / file, src, kSynthOrigin);
    ManifestSource ms;
    ms.id = src.id;
    ms.path = file;
    ms.is_target = s == tl.target_source;
    ms.target_column = src.feature_names[tl.target_column];
    m.sources.push_back(ms);
  }
  m.train.hidden = a.hidden;
  m.train.epochs = a.epochs;
  write_text_file(a.out / "manifest.json", manifest_json(m));
  std::cout << "wrote " << tl.sources.size() << " sources and manifest.json to " << a.out.string() << '\n';
  return 0;
}

int cmd_train(const fs::path& manifest_path, const TrainOverrides& o) {
  RunManifest m = load_manifest(manifest_path);
  o.apply(m);
  const fs::path out = output_dir(m, o.out);
  const auto tl = load_timeline(m);
  const auto data = prepare_data(tl, m.data);
  std::vector<PretrainedWeights> pretrained;
  if (m.train.warm_start) pretrained = pretrain_all(data, m.train);

  std::cout << "epoch,train_loss,val_loss\n";
  auto run = run_piets(data, pretrained, m.train, print_epoch);

  save_checkpoint(out / "checkpoint", run.model, m.train, m.data);
  for (const auto& p : run.pretrained) {
    if (p.usable()) save_tensors(out / ("encoder_" + p.source_id + ".bin"), p.tensors);
  }
  export_report(run.report, out);
  std::cout << "test mse " << format_double(run.report.test.mse) << '\n';
  return 0;
}

int cmd_baseline(const fs::path& manifest_path, const TrainOverrides& o) {
  RunManifest m = load_manifest(manifest_path);
  o.apply(m);
  const fs::path out = output_dir(m, o.out);
  const auto data = prepare_data(load_timeline(m), m.data);
  std::cout << "epoch,train_loss,val_loss\n";
  const auto report = run_baseline_predefined_window(data, m.train, print_epoch);
  export_report(report, out);
  std::cout << "test mse " << format_double(report.test.mse) << '\n';
  return 0;
}

int cmd_ablate(const fs::path& manifest_path, const TrainOverrides& o,
               const std::optional<std::vector<std::uint64_t>>& seeds, std::size_t jobs) {
  RunManifest m = load_manifest(manifest_path);
  o.apply(m);
  if (seeds) m.seeds = *seeds;
  if (m.seeds.empty()) throw UsageError("--seeds must list at least one seed");
  const fs::path out = output_dir(m, o.out);
  const auto data = prepare_data(load_timeline(m), m.data);

  const auto result = run_ablation_grid(data, m.train, m.seeds, jobs, [](const AblationRun& r) {
    std::cout << r.config.label() << " seed " << r.seed << " test_mse "
              << format_double(r.report.test.mse) << std::endl;
  });
  for (const auto& r : result.runs) {
    export_report(r.report, out / (r.config.label() + "_seed" + std::to_string(r.seed)));
  }
  write_text_file(out / "ablation_summary.csv", summary_csv(result.summary));
  write_text_file(out / "convergence.csv", convergence_csv(result.convergence));
  return 0;
}

int cmd_acf(const fs::path& csv, const std::string& column, std::size_t max_lag) {
  const auto series = read_csv_column(csv, column);
  // --max-lag N prints N rows: lags 0 .. N-1.
  const auto r = acf(series, max_lag - 1);
  std::cout << "lag,autocorrelation\n";
  for (std::size_t k = 0; k < r.size(); ++k) std::cout << k << ',' << format_double(r[k]) << '\n';
  return 0;
}

void error_line(const std::string& kind, const std::string& msg) {
  std::cerr << "piets: error: " << kind << ": " << msg << std::endl;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-source irregular time-series forecasting"};
  app.require_subcommand(1);

  SynthArgs synth;
  auto* synth_cmd = app.add_subcommand("synth", "Write the synthetic benchmark and its manifest");
  synth_cmd->add_option("--out", synth.out, "Output directory")->required();
  synth_cmd->add_option("--sources", synth.sources, "Number of sources")->check(CLI::PositiveNumber);
  synth_cmd->add_option("--offsets", synth.offsets, "First tick of each source (comma separated)")
      ->delimiter(',');
  synth_cmd->add_option("--dims", synth.dims, "Features per source (one value or one per source)")
      ->delimiter(',')
      ->check(CLI::PositiveNumber);
  synth_cmd->add_option("--length", synth.length, "Timeline length")->check(CLI::PositiveNumber);
  synth_cmd->add_option("--noise", synth.noise, "Target noise level")->check(CLI::NonNegativeNumber);
  synth_cmd->add_option("--seed", synth.seed, "Generator seed");
  synth_cmd->add_option("--hidden", synth.hidden, "Hidden size written to the manifest")
      ->check(CLI::PositiveNumber);
  synth_cmd->add_option("--epochs", synth.epochs, "Epochs written to the manifest")
      ->check(CLI::PositiveNumber);

  fs::path manifest;
  TrainOverrides train_o, base_o, ablate_o;
  auto* train_cmd = app.add_subcommand("train", "Pre-train, train, evaluate and export one run");
  train_cmd->add_option("--manifest", manifest, "Run manifest")->required()->check(CLI::ExistingFile);
  add_train_flags(train_cmd, train_o, true);
  train_cmd->add_option("--seed", train_o.seed, "Model seed");
  train_cmd->add_option("--out", train_o.out, "Output directory (default: manifest 'out')");

  auto* base_cmd = app.add_subcommand("baseline", "Train the fixed-window feature-fusion baseline");
  base_cmd->add_option("--manifest", manifest, "Run manifest")->required()->check(CLI::ExistingFile);
  add_train_flags(base_cmd, base_o, false);
  base_cmd->add_option("--seed", base_o.seed, "Model seed");
  base_cmd->add_option("--out", base_o.out, "Output directory (default: manifest 'out')");

  std::optional<std::vector<std::uint64_t>> seeds;
  std::size_t jobs = 1;
  auto* ablate_cmd = app.add_subcommand("ablate", "Run the warm-start x attention grid over seeds");
  ablate_cmd->add_option("--manifest", manifest, "Run manifest")->required()->check(CLI::ExistingFile);
  ablate_cmd->add_option("--seeds", seeds, "Seeds (comma separated)")->delimiter(',');
  add_train_flags(ablate_cmd, ablate_o, false);
  ablate_cmd->add_option("--jobs", jobs, "Seeds trained in parallel")->check(CLI::PositiveNumber);
  ablate_cmd->add_option("--out", ablate_o.out, "Output directory (default: manifest 'out')");

  fs::path acf_csv;
  std::string acf_column;
  std::size_t max_lag = 0;
  auto* acf_cmd = app.add_subcommand("acf", "Print the sample autocorrelation of one column");
  acf_cmd->add_option("--csv", acf_csv, "Source CSV")->required()->check(CLI::ExistingFile);
  acf_cmd->add_option("--column", acf_column, "Column name")->required();
  acf_cmd->add_option("--max-lag", max_lag, "Number of lags to print, starting at 0")
      ->required()
      ->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    error_line("usage", e.what());
    return 2;
  }

  try {
    if (*synth_cmd) return cmd_synth(synth);
    if (*train_cmd) return cmd_train(manifest, train_o);
    if (*base_cmd) return cmd_baseline(manifest, base_o);
    if (*ablate_cmd) return cmd_ablate(manifest, ablate_o, seeds, jobs);
    if (*acf_cmd) return cmd_acf(acf_csv, acf_column, max_lag);
  } catch (const UsageError& e) {
    error_line("usage", e.what());
    return 2;
  } catch (const Error& e) {
    error_line(e.kind(), e.what());
    return 1;
  } catch (const std::exception& e) {
    error_line("internal", e.what());
    return 1;
  }
  return 2;
}
