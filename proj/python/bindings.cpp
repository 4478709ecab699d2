// Copyright (c) 2026 The PIETS Authors
// SPDX-License-Identifier: Apache-2.0
//
// Python bindings for the data pipeline, training runs and experiments.

#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "piets/csv.hpp"
#include "piets/errors.hpp"
#include "piets/experiments.hpp"
#include "piets/manifest.hpp"
#include "piets/synth.hpp"

namespace py = pybind11;
using namespace piets;

namespace {

py::tuple range_tuple(const Range& r) { return py::make_tuple(r.begin, r.end); }

}  // namespace

PYBIND11_MODULE(_piets, m) {
  m.doc() = "Multi-source time-series forecasting with pre-trained encoders and attention";

  static py::exception<Error> base(m, "Error", PyExc_RuntimeError);
  static py::exception<DimensionError> dimension(m, "DimensionError", base.ptr());
  static py::exception<DomainError> domain(m, "DomainError", base.ptr());
  static py::exception<ContractError> contract(m, "ContractError", base.ptr());
  static py::exception<ParseError> parse(m, "ParseError", base.ptr());
  static py::exception<GapError> gap(m, "GapError", base.ptr());
  static py::exception<IoError> io(m, "IoError", base.ptr());
  static py::exception<DivergenceError> divergence(m, "DivergenceError", base.ptr());
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const DimensionError& e) {
      dimension(e.what());
    } catch (const DomainError& e) {
      domain(e.what());
    } catch (const ContractError& e) {
      contract(e.what());
    } catch (const ParseError& e) {
      parse(e.what());
    } catch (const GapError& e) {
      gap(e.what());
    } catch (const IoError& e) {
      io(e.what());
    } catch (const DivergenceError& e) {
      divergence(e.what());
    } catch (const Error& e) {
      base(e.what());
    }
  });

  py::enum_<PretrainObjective>(m, "PretrainObjective")
      .value("next_step", PretrainObjective::next_step)
      .value("target", PretrainObjective::target);

  py::class_<SynthConfig>(m, "SynthConfig")
      .def(py::init<>())
      .def_readwrite("sources", &SynthConfig::sources)
      .def_readwrite("offsets", &SynthConfig::offsets)
      .def_readwrite("dims", &SynthConfig::dims)
      .def_readwrite("length", &SynthConfig::length)
      .def_readwrite("noise", &SynthConfig::noise)
      .def_readwrite("weights", &SynthConfig::weights)
      .def_readwrite("seed", &SynthConfig::seed);

  py::class_<DataConfig>(m, "DataConfig")
      .def(py::init<>())
      .def_readwrite("lag", &DataConfig::lag)
      .def_readwrite("horizon", &DataConfig::horizon)
      .def_readwrite("train_frac", &DataConfig::train_frac)
      .def_readwrite("val_frac", &DataConfig::val_frac)
      .def_readwrite("normalize", &DataConfig::normalize);

  py::class_<TrainConfig>(m, "TrainConfig")
      .def(py::init<>())
      .def_readwrite("epochs", &TrainConfig::epochs)
      .def_readwrite("lr", &TrainConfig::lr)
      .def_readwrite("seed", &TrainConfig::seed)
      .def_readwrite("hidden", &TrainConfig::hidden)
      .def_readwrite("batch_size", &TrainConfig::batch_size)
      .def_readwrite("warm_start", &TrainConfig::warm_start)
      .def_readwrite("attention", &TrainConfig::attention)
      .def_readwrite("pretrain_epochs", &TrainConfig::pretrain_epochs)
      .def_readwrite("pretrain_objective", &TrainConfig::pretrain_objective)
      .def_readwrite("parallel_branches", &TrainConfig::parallel_branches);

  py::class_<SourceSeries>(m, "SourceSeries")
      .def_readonly("id", &SourceSeries::id)
      .def_readonly("initial_t", &SourceSeries::initial_t)
      .def_readonly("feature_names", &SourceSeries::feature_names)
      .def_property_readonly("n_obs", &SourceSeries::n_obs)
      .def("column", [](const SourceSeries& s, const std::string& name) {
        const auto c = s.column_index(name);
        if (!c) throw DomainError("no column '" + name + "' in source '" + s.id + "'");
        return s.features.column(*c);
      });

  py::class_<AlignedTimeline>(m, "Timeline")
      .def_readonly("sources", &AlignedTimeline::sources)
      .def_readonly("present_t", &AlignedTimeline::present_t)
      .def_readonly("target_source", &AlignedTimeline::target_source)
      .def_property_readonly("latest_initial", &AlignedTimeline::latest_initial);

  py::class_<PreparedData>(m, "PreparedData")
      .def_property_readonly("source_ids", &PreparedData::source_ids)
      .def_property_readonly("dims", &PreparedData::dims)
      .def_property_readonly("n_windows", [](const PreparedData& d) { return d.windows.size(); })
      .def_property_readonly("early_rows",
                             [](const PreparedData& d) {
                               std::vector<std::size_t> r;
                               for (const auto& e : d.early) r.push_back(e.rows);
                               return r;
                             })
      .def_property_readonly("late_length", [](const PreparedData& d) { return d.split.late_length(); })
      .def_property_readonly("train", [](const PreparedData& d) { return range_tuple(d.ranges.train); })
      .def_property_readonly("val", [](const PreparedData& d) { return range_tuple(d.ranges.val); })
      .def_property_readonly("test", [](const PreparedData& d) { return range_tuple(d.ranges.test); })
      .def_readonly("target_mean", &PreparedData::target_mean)
      .def_readonly("target_std", &PreparedData::target_std);

  py::class_<Metrics>(m, "Metrics")
      .def_readonly("mse", &Metrics::mse)
      .def_readonly("rmse", &Metrics::rmse)
      .def_readonly("mape", &Metrics::mape)
      .def("__repr__", [](const Metrics& x) {
        return "Metrics(mse=" + format_double(x.mse) + ", rmse=" + format_double(x.rmse) +
               ", mape=" + format_double(x.mape) + ")";
      });

  py::class_<ExperimentReport>(m, "Report")
      .def_readonly("model_kind", &ExperimentReport::model_kind)
      .def_readonly("test", &ExperimentReport::test)
      .def_readonly("test_raw", &ExperimentReport::test_raw)
      .def_readonly("train_loss", &ExperimentReport::train_loss)
      .def_readonly("val_loss", &ExperimentReport::val_loss)
      .def_readonly("attention_by_lag", &ExperimentReport::attention_by_lag)
      .def_readonly("early_rows_used", &ExperimentReport::early_rows_used)
      .def("to_json", &metrics_json)
      .def("export", &export_report, py::arg("out_dir"));

  py::class_<SummaryStat>(m, "SummaryStat")
      .def_readonly("median", &SummaryStat::median)
      .def_readonly("mean", &SummaryStat::mean)
      .def_readonly("stdev", &SummaryStat::stdev);

  py::class_<SummaryRow>(m, "SummaryRow")
      .def_property_readonly("warm_start", [](const SummaryRow& r) { return r.config.warm_start; })
      .def_property_readonly("attention", [](const SummaryRow& r) { return r.config.attention; })
      .def_readonly("seed_count", &SummaryRow::seed_count)
      .def_readonly("mse", &SummaryRow::mse)
      .def_readonly("rmse", &SummaryRow::rmse)
      .def_readonly("mape", &SummaryRow::mape);

  m.def("generate_synthetic", &generate_synthetic, py::arg("config") = SynthConfig{});
  m.def("load_timeline", [](const std::filesystem::path& manifest) { return load_timeline(load_manifest(manifest)); },
        py::arg("manifest"), "Ingest and align every source named by a run manifest.");
  m.def("prepare_data", &prepare_data, py::arg("timeline"), py::arg("config") = DataConfig{});
  m.def("train_test_split",
        [](std::size_t n, double train_frac, double val_frac) {
          const auto r = train_test_split(n, train_frac, val_frac);
          return py::make_tuple(range_tuple(r.train), range_tuple(r.val), range_tuple(r.test));
        },
        py::arg("n_windows"), py::arg("train_frac") = 0.66, py::arg("val_frac") = 0.20);
  m.def("window_count", &window_count, py::arg("n"), py::arg("lag"), py::arg("horizon"));
  m.def("acf", [](const std::vector<double>& x, std::size_t max_lag) { return acf(x, max_lag); },
        py::arg("series"), py::arg("max_lag"));
  m.def("compute_metrics",
        [](const std::vector<double>& y, const std::vector<double>& y_hat) { return compute_metrics(y, y_hat); },
        py::arg("y"), py::arg("y_hat"));

  m.def("run_piets",
        [](const PreparedData& data, const TrainConfig& cfg) {
          py::gil_scoped_release release;
          const auto pre = cfg.warm_start ? pretrain_all(data, cfg) : std::vector<PretrainedWeights>{};
          return run_piets(data, pre, cfg).report;
        },
        py::arg("data"), py::arg("config") = TrainConfig{});
  m.def("run_baseline",
        [](const PreparedData& data, const TrainConfig& cfg) {
          py::gil_scoped_release release;
          return run_baseline_predefined_window(data, cfg);
        },
        py::arg("data"), py::arg("config") = TrainConfig{});
  m.def("run_ablation_grid",
        [](const PreparedData& data, const TrainConfig& cfg, const std::vector<std::uint64_t>& seeds,
           std::size_t jobs) {
          py::gil_scoped_release release;
          return run_ablation_grid(data, cfg, seeds, jobs).summary;
        },
        py::arg("data"), py::arg("config"), py::arg("seeds"), py::arg("jobs") = 1,
        "Run the warm-start x attention grid and return one summary row per configuration.");
}
