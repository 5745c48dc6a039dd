#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <map>
#include <optional>
#include <string>

#include "delaybench/experiment.hpp"
#include "delaybench/metrics.hpp"
#include "delaybench/rng.hpp"

namespace py = pybind11;
using namespace delaybench;

namespace {

py::object opt_to_py(const std::optional<double>& v) {
    if (!v) return py::none();
    return py::float_(*v);
}

py::dict output_to_dict(const RunOutput& out) {
    py::dict d;
    d["model"] = out.model;
    d["dataset"] = out.dataset;
    d["delay_factor"] = out.delay_factor;
    d["mean"] = out.mean;
    d["std"] = out.stddev;
    d["runtime_s"] = out.runtime_s;
    d["run_dir"] = out.run_dir;
    py::list chunks;
    for (const ChunkReport& r : out.result.reports) {
        py::dict c;
        c["chunk_id"] = r.chunk_id;
        c["n"] = r.n;
        c["positives"] = r.positives;
        c["metric"] = r.metric;
        c["value"] = opt_to_py(r.value);
        chunks.append(std::move(c));
    }
    d["chunks"] = std::move(chunks);
    py::dict stats;
    stats["instances"] = out.result.stats.instances;
    stats["peak_unlabeled"] = out.result.stats.peak_unlabeled;
    stats["peak_retained_chunks"] = out.result.stats.peak_retained_chunks;
    d["stats"] = std::move(stats);
    return d;
}

ExperimentConfig config_from_args(const std::string& dataset, const std::string& csv,
                                  const std::string& model,
                                  const std::map<std::string, double>& params,
                                  const std::string& delay_mode, double delay_factor,
                                  std::uint64_t delay_fixed, double positive_factor,
                                  double negative_factor, double chunk_mean,
                                  double offline_fraction, const std::string& metric,
                                  std::uint64_t seed, bool timing, const std::string& out) {
    ExperimentConfig c;
    if (!csv.empty()) {
        c.dataset = "csv";
        c.csv_path = csv;
    } else {
        c.dataset = dataset;
    }
    c.model = model;
    c.model_params = params;
    c.delay_mode = delay_mode;
    c.delay_factor = delay_factor;
    c.delay_fixed = delay_fixed;
    c.delay_positive_factor = positive_factor;
    c.delay_negative_factor = negative_factor;
    c.chunk_mean = chunk_mean;
    c.offline_fraction = offline_fraction;
    c.metric = metric;
    c.seed = seed;
    c.timing = timing;
    c.out = out;
    return c;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Benchmarks for supervised learning on drifting streams with delayed labels";

    m.def(
        "auc_roc",
        [](const std::vector<double>& scores, const std::vector<int>& labels) {
            return opt_to_py(auc_roc(scores, labels));
        },
        py::arg("scores"), py::arg("labels"),
        "Area under the ROC curve; None when only one class is present.");

    m.def(
        "auc_pr",
        [](const std::vector<double>& scores, const std::vector<int>& labels) {
            return opt_to_py(auc_pr(scores, labels));
        },
        py::arg("scores"), py::arg("labels"),
        "Average precision; None when no positives are present.");

    m.def("known_presets", &known_presets, "Names of the built-in dataset presets.");

    m.def(
        "run",
        [](const std::string& dataset, const std::string& csv, const std::string& model,
           const std::map<std::string, double>& params, const std::string& delay_mode,
           double delay_factor, std::uint64_t delay_fixed, double positive_factor,
           double negative_factor, double chunk_mean, double offline_fraction,
           const std::string& metric, std::uint64_t seed, bool timing, const std::string& out) {
            ExperimentConfig c = config_from_args(
                dataset, csv, model, params, delay_mode, delay_factor, delay_fixed,
                positive_factor, negative_factor, chunk_mean, offline_fraction, metric, seed,
                timing, out);
            RunOutput result;
            {
                py::gil_scoped_release release;
                result = run_experiment(c);
            }
            return output_to_dict(result);
        },
        py::kw_only(), py::arg("dataset") = "", py::arg("csv") = "", py::arg("model") = "ht",
        py::arg("params") = std::map<std::string, double>{}, py::arg("delay_mode") = "zero",
        py::arg("delay_factor") = 0.0, py::arg("delay_fixed") = 0,
        py::arg("positive_factor") = 0.0, py::arg("negative_factor") = 0.0,
        py::arg("chunk_mean") = 0.0, py::arg("offline_fraction") = 0.0, py::arg("metric") = "",
        py::arg("seed") = 1, py::arg("timing") = false, py::arg("out") = "runs",
        "Execute one experiment; writes chunks.csv and summary.csv and returns the results.");

    m.def(
        "run_config",
        [](const std::string& text) {
            ExperimentConfig c = parse_experiment_config(text);
            RunOutput result;
            {
                py::gil_scoped_release release;
                result = run_experiment(c);
            }
            return output_to_dict(result);
        },
        py::arg("text"), "Execute one experiment from dotted-key config text.");

    m.def(
        "sweep_config",
        [](const std::string& text, std::size_t jobs) {
            SweepSpec spec = parse_sweep_config(text);
            std::vector<ExperimentConfig> configs = expand_sweep(spec);
            SweepOutcome outcome;
            {
                py::gil_scoped_release release;
                outcome = run_sweep(configs, jobs, spec.base.out);
            }
            py::dict d;
            py::list runs;
            for (const RunOutput& run : outcome.runs) runs.append(output_to_dict(run));
            d["runs"] = std::move(runs);
            d["failures"] = outcome.failures;
            return d;
        },
        py::arg("text"), py::arg("jobs") = 1,
        "Run a sweep from config text; merges summary.csv and delay_impact.csv.");

    m.def(
        "report",
        [](const std::string& results_dir) {
            py::gil_scoped_release release;
            emit_report(results_dir);
        },
        py::arg("results_dir"), "Aggregate run directories into table.csv.");

    m.def(
        "tune_config",
        [](const std::string& text) {
            TuneSpec spec = parse_tune_config(text);
            MaterializedStream data = materialize_stream(spec.base);
            RunSeed seeds{spec.base.seed};
            std::string model_name = spec.base.model;
            std::map<std::string, double> base_params = spec.base.model_params;
            auto builder = [&](const TrialConfig& trial, std::uint64_t seed) {
                std::map<std::string, double> params = base_params;
                for (const auto& [name, value] : trial.values) params[name] = value;
                return build_model(model_name, params, data.n_features, seed);
            };
            TuneResult result;
            {
                py::gil_scoped_release release;
                result = tune_random_search(spec.space, data.offline, spec.trials, builder,
                                            seeds.substream_seed("tuner"), data.metric);
            }
            py::dict d;
            d["best"] = result.best.values;
            d["best_score"] = result.best_score;
            d["best_trial"] = result.best_trial;
            d["trial_scores"] = result.trial_scores;
            return d;
        },
        py::arg("text"), "Random search from config text; returns the best parameters.");
}
