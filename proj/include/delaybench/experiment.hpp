#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "delaybench/harness.hpp"
#include "delaybench/metrics.hpp"
#include "delaybench/model.hpp"
#include "delaybench/tuner.hpp"

namespace delaybench {

// One benchmark run, fully specified. Zero-valued numeric fields fall
// back to the dataset preset's defaults when one is named.
struct ExperimentConfig {
    std::string dataset;      // preset name, or "csv" together with csv_path
    std::string csv_path;
    std::string delay_mode = "zero";  // zero | poisson_factor | fixed | class_conditional
    double delay_factor = 0.0;
    std::uint64_t delay_fixed = 0;
    double delay_positive_factor = 0.0;
    double delay_negative_factor = 0.0;
    double chunk_mean = 0.0;
    double offline_fraction = 0.0;
    std::string model = "ht";
    std::map<std::string, double> model_params;
    std::string metric;  // aucroc | aucpr, empty keeps the preset default
    std::uint64_t seed = 1;
    bool timing = false;
    std::string out = "runs";
};

// Config files are dotted-key lines, `key = value`, with `#` comments.
// Unknown keys are rejected by name.
ExperimentConfig parse_experiment_config(const std::string& text);

// Sweeps cross a base config with models, delay factors and seeds.
struct SweepSpec {
    ExperimentConfig base;
    std::vector<std::string> models;
    std::vector<double> delay_factors;
    std::vector<std::uint64_t> seeds;
};

SweepSpec parse_sweep_config(const std::string& text);
std::vector<ExperimentConfig> expand_sweep(const SweepSpec& spec);

// Random-search settings for the tune subcommand. Ranges read
// `lo:hi[:log][:int]`.
struct TuneSpec {
    ExperimentConfig base;
    std::size_t trials = 30;
    std::vector<ParamSpec> space;
};

TuneSpec parse_tune_config(const std::string& text);

std::vector<std::string> known_presets();

// Builds one model from its registry label. Every label owns a fixed
// set of tunable parameters; anything else is rejected by name.
std::unique_ptr<StreamModel> build_model(const std::string& name,
                                         const std::map<std::string, double>& params,
                                         std::size_t n_features, std::uint64_t seed);

// The generated (or replayed) data of one run: the offline reserve,
// the stream part with ids rebased to zero, and per-instance label
// delays already drawn.
struct MaterializedStream {
    LabeledChunk offline;
    std::vector<Instance> stream;
    std::vector<std::int64_t> delays;
    std::size_t n_features = 0;
    MetricKind metric = MetricKind::auc_roc;
    double chunk_mean = 0.0;
    std::string dataset_label;
    // Column value for summaries: alpha for Poisson delay, 0 for the
    // zero model, -1 for fixed and class-conditional delays.
    double delay_factor_column = 0.0;
};

MaterializedStream materialize_stream(const ExperimentConfig& config);

struct RunOutput {
    std::string run_dir;
    std::string model;
    std::string dataset;
    double delay_factor = 0.0;
    double mean = 0.0;
    double stddev = 0.0;
    double runtime_s = 0.0;
    RunResult result;
};

// Pretrains, streams, and writes chunks.csv plus summary.csv into a
// run directory under config.out.
RunOutput run_experiment(const ExperimentConfig& config);

struct SweepOutcome {
    std::vector<RunOutput> runs;
    std::vector<std::string> failures;
};

// Runs configs with up to `parallelism` worker threads, then writes
// the merged summary.csv and delay_impact.csv under out_root. Child
// failures are recorded and the rest of the sweep continues.
SweepOutcome run_sweep(const std::vector<ExperimentConfig>& configs, std::size_t parallelism,
                       const std::string& out_root);

// Rebuilds per-model per-dataset chunk series from every chunks.csv
// under results_dir and writes the cross-model table.csv there.
void emit_report(const std::string& results_dir);

// Shortest round-trip decimal text, the format of every CSV number.
std::string format_number(double value);

}  // namespace delaybench
