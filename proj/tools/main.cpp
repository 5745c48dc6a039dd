#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "delaybench/experiment.hpp"
#include "delaybench/rng.hpp"

namespace {

std::string read_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::invalid_argument("cannot read config file '" + path + "'");
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

struct CommonFlags {
    std::string config_path;
    std::string preset;
    std::string model;
    std::string out;
    double delay_factor = -1.0;
    std::int64_t seed = -1;
    bool has_delay_factor = false;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
    cmd->add_option("--config", flags.config_path, "experiment config file (dotted keys)");
    cmd->add_option("--preset", flags.preset, "dataset preset name");
    cmd->add_option("--model", flags.model, "model registry label");
    cmd->add_option("--seed", flags.seed, "master seed");
    cmd->add_option("--out", flags.out, "output directory root");
    cmd->add_option("--delay-factor", flags.delay_factor, "Poisson delay factor")
        ->each([&](const std::string&) { flags.has_delay_factor = true; });
}

// CLI flags override config file keys, which override environment.
void apply_overrides(delaybench::ExperimentConfig& config, const CommonFlags& flags) {
    if (const char* env_out = std::getenv("DELAYBENCH_OUT"); env_out && *env_out)
        config.out = env_out;
    if (!flags.preset.empty()) config.dataset = flags.preset;
    if (!flags.model.empty()) config.model = flags.model;
    if (flags.seed >= 0) config.seed = std::uint64_t(flags.seed);
    if (!flags.out.empty()) config.out = flags.out;
    if (flags.has_delay_factor) {
        config.delay_mode = "poisson_factor";
        config.delay_factor = flags.delay_factor;
    }
}

std::size_t resolve_jobs(std::size_t cli_jobs) {
    if (cli_jobs > 0) return cli_jobs;
    if (const char* env = std::getenv("DELAYBENCH_JOBS"); env && *env) {
        char* end = nullptr;
        unsigned long v = std::strtoul(env, &end, 10);
        if (end && *end == '\0' && v > 0) return std::size_t(v);
    }
    return 1;
}

int cmd_run(const CommonFlags& flags) {
    delaybench::ExperimentConfig config;
    if (!flags.config_path.empty())
        config = delaybench::parse_experiment_config(read_file(flags.config_path));
    apply_overrides(config, flags);
    if (config.dataset.empty())
        throw std::invalid_argument("no dataset: set dataset.preset (or --preset) or dataset.csv");

    delaybench::RunOutput out = delaybench::run_experiment(config);
    std::cout << "run " << out.dataset << " model=" << out.model
              << " chunks=" << out.result.reports.size()
              << " mean=" << delaybench::format_number(out.mean)
              << " runtime_s=" << delaybench::format_number(out.runtime_s) << "\n"
              << "wrote " << out.run_dir << "\n";
    return 0;
}

int cmd_sweep(const CommonFlags& flags, std::size_t jobs) {
    if (flags.config_path.empty())
        throw std::invalid_argument("sweep needs --config with sweep.* lists");
    delaybench::SweepSpec spec = delaybench::parse_sweep_config(read_file(flags.config_path));
    apply_overrides(spec.base, flags);
    if (spec.base.dataset.empty())
        throw std::invalid_argument("no dataset: set dataset.preset (or --preset) or dataset.csv");

    std::vector<delaybench::ExperimentConfig> configs = delaybench::expand_sweep(spec);
    delaybench::SweepOutcome outcome =
        delaybench::run_sweep(configs, resolve_jobs(jobs), spec.base.out);
    std::cout << "sweep " << outcome.runs.size() << "/" << configs.size() << " runs ok, merged "
              << spec.base.out << "/summary.csv and delay_impact.csv\n";
    for (const std::string& failure : outcome.failures)
        std::cerr << "failed: " << failure << "\n";
    return outcome.failures.empty() ? 0 : 1;
}

int cmd_tune(const CommonFlags& flags) {
    if (flags.config_path.empty())
        throw std::invalid_argument("tune needs --config with tune.param.* ranges");
    delaybench::TuneSpec spec = delaybench::parse_tune_config(read_file(flags.config_path));
    apply_overrides(spec.base, flags);
    if (spec.space.empty()) throw std::invalid_argument("tune.param.* ranges missing");

    delaybench::MaterializedStream data = delaybench::materialize_stream(spec.base);
    delaybench::RunSeed seeds{spec.base.seed};
    std::string model_name = spec.base.model;
    std::map<std::string, double> base_params = spec.base.model_params;
    auto builder = [&](const delaybench::TrialConfig& trial, std::uint64_t seed) {
        std::map<std::string, double> params = base_params;
        for (const auto& [name, value] : trial.values) params[name] = value;
        return delaybench::build_model(model_name, params, data.n_features, seed);
    };
    delaybench::TuneResult result = delaybench::tune_random_search(
        spec.space, data.offline, spec.trials, builder, seeds.substream_seed("tuner"),
        data.metric);

    std::cout << "best trial " << result.best_trial << " score "
              << delaybench::format_number(result.best_score) << "\n";
    for (const auto& [name, value] : result.best.values)
        std::cout << "model." << name << " = " << delaybench::format_number(value) << "\n";

    std::filesystem::create_directories(spec.base.out);
    std::ofstream f(std::filesystem::path(spec.base.out) / "tuned.csv", std::ios::binary);
    f << "trial,score\n";
    for (std::size_t i = 0; i < result.trial_scores.size(); ++i) {
        f << i << ',';
        if (!std::isnan(result.trial_scores[i]))
            f << delaybench::format_number(result.trial_scores[i]);
        f << '\n';
    }
    return 0;
}

int cmd_report(const CommonFlags& flags) {
    std::string dir = flags.out;
    if (const char* env_out = std::getenv("DELAYBENCH_OUT"); dir.empty() && env_out && *env_out)
        dir = env_out;
    if (dir.empty()) throw std::invalid_argument("report needs --out pointing at run results");
    delaybench::emit_report(dir);
    std::cout << "wrote " << dir << "/table.csv\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"delaybench: drifting-stream benchmarks under label delay"};
    app.require_subcommand(1);

    CommonFlags run_flags, sweep_flags, tune_flags, report_flags;
    std::size_t jobs = 0;

    CLI::App* run = app.add_subcommand("run", "execute one experiment");
    add_common(run, run_flags);

    CLI::App* sweep = app.add_subcommand("sweep", "cross models, delay factors and seeds");
    add_common(sweep, sweep_flags);
    sweep->add_option("--jobs", jobs, "parallel runs (or DELAYBENCH_JOBS)");

    CLI::App* tune = app.add_subcommand("tune", "random search on the offline reserve");
    add_common(tune, tune_flags);

    CLI::App* report = app.add_subcommand("report", "aggregate run dirs into table.csv");
    add_common(report, report_flags);

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return cmd_run(run_flags);
        if (sweep->parsed()) return cmd_sweep(sweep_flags, jobs);
        if (tune->parsed()) return cmd_tune(tune_flags);
        return cmd_report(report_flags);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
