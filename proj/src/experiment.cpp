#include "delaybench/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <tuple>

#include "delaybench/delay.hpp"
#include "delaybench/ensembles.hpp"
#include "delaybench/generators.hpp"
#include "delaybench/hoeffding_tree.hpp"
#include "delaybench/linear.hpp"
#include "delaybench/rng.hpp"
#include "delaybench/strategies.hpp"
#include "delaybench/stream.hpp"

namespace delaybench {

namespace fs = std::filesystem;

std::string format_number(double value) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    if (ec != std::errc()) throw std::runtime_error("number formatting failed");
    return std::string(buf, end);
}

namespace {

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

double parse_double(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        double v = std::stod(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw std::invalid_argument("config key '" + key + "': bad number '" + value + "'");
    }
}

std::uint64_t parse_uint(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        unsigned long long v = std::stoull(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw std::invalid_argument("config key '" + key + "': bad integer '" + value + "'");
    }
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    throw std::invalid_argument("config key '" + key + "': bad boolean '" + value + "'");
}

std::vector<std::string> split_list(const std::string& value) {
    std::vector<std::string> out;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

const std::vector<std::string> kDelayModes = {"zero", "poisson_factor", "fixed",
                                              "class_conditional"};

// Tries one dotted key against the base experiment schema. Returns
// false when the key belongs to another section (sweep, tune).
bool apply_base_key(ExperimentConfig& c, const std::string& key, const std::string& value) {
    if (key == "dataset.preset") {
        c.dataset = value;
    } else if (key == "dataset.csv") {
        c.dataset = "csv";
        c.csv_path = value;
    } else if (key == "delay.mode") {
        if (std::find(kDelayModes.begin(), kDelayModes.end(), value) == kDelayModes.end())
            throw std::invalid_argument("unknown delay mode '" + value + "'");
        c.delay_mode = value;
    } else if (key == "delay.factor") {
        c.delay_factor = parse_double(key, value);
    } else if (key == "delay.fixed") {
        c.delay_fixed = parse_uint(key, value);
    } else if (key == "delay.positive_factor") {
        c.delay_positive_factor = parse_double(key, value);
    } else if (key == "delay.negative_factor") {
        c.delay_negative_factor = parse_double(key, value);
    } else if (key == "chunk.mean") {
        c.chunk_mean = parse_double(key, value);
    } else if (key == "offline.fraction") {
        c.offline_fraction = parse_double(key, value);
    } else if (key == "model.name") {
        c.model = value;
    } else if (key.rfind("model.", 0) == 0) {
        c.model_params[key.substr(6)] = parse_double(key, value);
    } else if (key == "metric") {
        if (value != "aucroc" && value != "aucpr")
            throw std::invalid_argument("unknown metric '" + value + "'");
        c.metric = value;
    } else if (key == "seed") {
        c.seed = parse_uint(key, value);
    } else if (key == "timing.enabled") {
        c.timing = parse_bool(key, value);
    } else if (key == "out") {
        c.out = value;
    } else {
        return false;
    }
    return true;
}

// Walks the dotted-key lines of one config file; the handler consumes
// section-specific keys and reports whether it recognized one.
template <typename Handler>
void parse_lines(const std::string& text, Handler&& handle) {
    std::stringstream ss(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(ss, line)) {
        ++line_no;
        std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        line = trim(line);
        if (line.empty()) continue;
        std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config line " + std::to_string(line_no) +
                                        ": expected 'key = value', got '" + line + "'");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw std::invalid_argument("config line " + std::to_string(line_no) + ": empty key");
        if (!handle(key, value)) throw std::invalid_argument("unknown config key '" + key + "'");
    }
}

struct Preset {
    const char* name;
    const char* family;  // agrawal | sea | hyperplane | rareevent
    std::uint64_t n;
    double chunk_mean;
    double offline_fraction;
    MetricKind metric;
    char drift;  // 'n' none, 'a' abrupt, 'g' gradual
};

// Change points sit at n/4, n/2 and 3n/4; gradual windows span n/20.
// Desk presets are the same streams scaled down tenfold so a full run
// finishes in seconds.
const Preset kPresets[] = {
    {"agr_a", "agrawal", 1000000, 10000, 0.1, MetricKind::auc_roc, 'a'},
    {"agr_g", "agrawal", 1000000, 10000, 0.1, MetricKind::auc_roc, 'g'},
    {"sea_a", "sea", 1000000, 10000, 0.1, MetricKind::auc_roc, 'a'},
    {"sea_g", "sea", 1000000, 10000, 0.1, MetricKind::auc_roc, 'g'},
    {"hyper_f", "hyperplane", 1000000, 10000, 0.1, MetricKind::auc_roc, 'n'},
    {"rareevent", "rareevent", 220000, 10000, 1.0 / 11.0, MetricKind::auc_pr, 'n'},
    {"agr_a_desk", "agrawal", 100000, 1000, 0.1, MetricKind::auc_roc, 'a'},
    {"agr_g_desk", "agrawal", 100000, 1000, 0.1, MetricKind::auc_roc, 'g'},
    {"sea_a_desk", "sea", 100000, 1000, 0.1, MetricKind::auc_roc, 'a'},
    {"sea_g_desk", "sea", 100000, 1000, 0.1, MetricKind::auc_roc, 'g'},
    {"hyper_f_desk", "hyperplane", 100000, 1000, 0.1, MetricKind::auc_roc, 'n'},
    {"rareevent_desk", "rareevent", 22000, 1000, 1.0 / 11.0, MetricKind::auc_pr, 'n'},
};

const Preset& resolve_preset(const std::string& name) {
    for (const Preset& p : kPresets)
        if (name == p.name) return p;
    throw std::invalid_argument("unknown preset '" + name + "'");
}

DriftSchedule preset_schedule(const Preset& p) {
    if (p.drift == 'n') return DriftSchedule::stationary();
    std::vector<std::uint64_t> points = {p.n / 4, p.n / 2, 3 * p.n / 4};
    if (p.drift == 'a') return DriftSchedule::abrupt(points);
    return DriftSchedule::gradual(points, p.n / 20);
}

std::vector<Instance> generate_instances(const Preset& p, std::uint64_t seed) {
    std::unique_ptr<StreamGenerator> gen;
    std::string family = p.family;
    if (family == "agrawal") {
        AgrawalConfig c;
        c.schedule = preset_schedule(p);
        gen = std::make_unique<AgrawalGenerator>(c, seed);
    } else if (family == "sea") {
        SeaConfig c;
        c.schedule = preset_schedule(p);
        gen = std::make_unique<SeaGenerator>(c, seed);
    } else if (family == "hyperplane") {
        gen = std::make_unique<HyperplaneGenerator>(HyperplaneConfig{}, seed);
    } else {
        RareEventConfig c;
        c.schedule = preset_schedule(p);
        gen = std::make_unique<RareEventGenerator>(c, seed);
    }
    std::vector<Instance> out;
    out.reserve(p.n);
    for (std::uint64_t i = 0; i < p.n; ++i) out.push_back(gen->next());
    return out;
}

double param_or(const std::map<std::string, double>& params, const std::string& name,
                double fallback) {
    auto it = params.find(name);
    return it == params.end() ? fallback : it->second;
}

void check_params(const std::string& model, const std::map<std::string, double>& params,
                  std::initializer_list<const char*> allowed) {
    for (const auto& [key, value] : params) {
        bool ok = false;
        for (const char* a : allowed) ok = ok || key == a;
        if (!ok)
            throw std::invalid_argument("model " + model + ": unknown parameter '" + key + "'");
    }
}

HoeffdingTreeConfig tree_config_from(const std::map<std::string, double>& params, bool adaptive) {
    HoeffdingTreeConfig t;
    t.grace_period = std::size_t(param_or(params, "grace", 200));
    t.max_depth = std::size_t(param_or(params, "depth", 6));
    t.n_bins = std::size_t(param_or(params, "bins", 32));
    t.adaptive = adaptive;
    if (adaptive) {
        t.adwin_delta = param_or(params, "adwin_delta", 0.002);
        t.swap_confidence = param_or(params, "swap_confidence", 0.05);
    }
    return t;
}

std::unique_ptr<IncrementalLearner> build_incremental(const std::string& name,
                                                      const std::map<std::string, double>& params,
                                                      std::size_t n_features, std::uint64_t seed) {
    if (name == "ht" || name == "hat") {
        if (name == "ht")
            check_params(name, params, {"grace", "depth", "bins", "undersample"});
        else
            check_params(name, params,
                         {"grace", "depth", "bins", "adwin_delta", "swap_confidence",
                          "undersample"});
        return std::make_unique<HoeffdingTree>(tree_config_from(params, name == "hat"),
                                               n_features, seed);
    }
    if (name == "lr") {
        check_params(name, params, {"learning_rate", "l2", "positive_cost", "undersample"});
        OnlineLogisticConfig c;
        c.learning_rate = param_or(params, "learning_rate", 0.05);
        c.l2 = param_or(params, "l2", 0.0);
        c.cost_positive = param_or(params, "positive_cost", 1.0);
        return std::make_unique<OnlineLogistic>(c, n_features);
    }
    if (name == "lb_ht" || name == "lb_lr") {
        if (name == "lb_ht")
            check_params(name, params,
                         {"members", "lambda", "adwin_delta", "grace", "depth", "undersample"});
        else
            check_params(name, params,
                         {"members", "lambda", "adwin_delta", "learning_rate", "undersample"});
        LeveragingBaggingConfig c;
        c.n_members = std::size_t(param_or(params, "members", 10));
        c.lambda = param_or(params, "lambda", 6.0);
        c.adwin_delta = param_or(params, "adwin_delta", 0.002);
        LearnerFactory factory;
        if (name == "lb_ht") {
            HoeffdingTreeConfig tree = tree_config_from(params, false);
            factory = [tree, n_features](std::uint64_t s) {
                return std::make_unique<HoeffdingTree>(tree, n_features, s);
            };
        } else {
            OnlineLogisticConfig lr;
            lr.learning_rate = param_or(params, "learning_rate", 0.05);
            factory = [lr, n_features](std::uint64_t) {
                return std::make_unique<OnlineLogistic>(lr, n_features);
            };
        }
        return std::make_unique<LeveragingBagging>(c, std::move(factory), seed);
    }
    if (name == "arf") {
        check_params(name, params,
                     {"members", "lambda", "mask", "grace", "depth", "warning_delta",
                      "drift_delta", "undersample"});
        ArfConfig c;
        c.n_members = std::size_t(param_or(params, "members", 10));
        c.lambda = param_or(params, "lambda", 6.0);
        c.mask_size = std::size_t(param_or(params, "mask", 0));
        c.warning_delta = param_or(params, "warning_delta", 0.01);
        c.drift_delta = param_or(params, "drift_delta", 0.001);
        c.tree = tree_config_from(params, false);
        return std::make_unique<AdaptiveRandomForest>(c, n_features, seed);
    }
    return nullptr;
}

GbdtConfig gbdt_config_from(const std::map<std::string, double>& params) {
    GbdtConfig g;
    g.learning_rate = param_or(params, "learning_rate", 0.1);
    g.max_depth = std::size_t(param_or(params, "depth", 6));
    g.max_trees = std::size_t(param_or(params, "trees", 100));
    g.patience = std::size_t(param_or(params, "patience", 5));
    g.l2 = param_or(params, "l2", 1.0);
    g.min_samples_leaf = std::size_t(param_or(params, "min_leaf", 20));
    return g;
}

LabeledChunk merge_chunks(const LabeledChunk& a, const LabeledChunk& b) {
    LabeledChunk out;
    out.id = a.id;
    out.X = a.X;
    out.y = a.y;
    out.X.insert(out.X.end(), b.X.begin(), b.X.end());
    out.y.insert(out.y.end(), b.y.begin(), b.y.end());
    return out;
}

}  // namespace

ExperimentConfig parse_experiment_config(const std::string& text) {
    ExperimentConfig c;
    parse_lines(text, [&](const std::string& key, const std::string& value) {
        return apply_base_key(c, key, value);
    });
    return c;
}

SweepSpec parse_sweep_config(const std::string& text) {
    SweepSpec spec;
    parse_lines(text, [&](const std::string& key, const std::string& value) {
        if (apply_base_key(spec.base, key, value)) return true;
        if (key == "sweep.models") {
            spec.models = split_list(value);
        } else if (key == "sweep.delay_factors") {
            for (const std::string& item : split_list(value))
                spec.delay_factors.push_back(parse_double(key, item));
        } else if (key == "sweep.seeds") {
            for (const std::string& item : split_list(value))
                spec.seeds.push_back(parse_uint(key, item));
        } else {
            return false;
        }
        return true;
    });
    return spec;
}

std::vector<ExperimentConfig> expand_sweep(const SweepSpec& spec) {
    std::vector<std::string> models = spec.models;
    if (models.empty()) models = {spec.base.model};
    std::vector<std::uint64_t> seeds = spec.seeds;
    if (seeds.empty()) seeds = {spec.base.seed};

    std::vector<ExperimentConfig> out;
    for (const std::string& model : models) {
        if (spec.delay_factors.empty()) {
            for (std::uint64_t seed : seeds) {
                ExperimentConfig c = spec.base;
                c.model = model;
                c.seed = seed;
                out.push_back(std::move(c));
            }
            continue;
        }
        for (double factor : spec.delay_factors) {
            for (std::uint64_t seed : seeds) {
                ExperimentConfig c = spec.base;
                c.model = model;
                c.delay_mode = "poisson_factor";
                c.delay_factor = factor;
                c.seed = seed;
                out.push_back(std::move(c));
            }
        }
    }
    return out;
}

TuneSpec parse_tune_config(const std::string& text) {
    TuneSpec spec;
    parse_lines(text, [&](const std::string& key, const std::string& value) {
        if (apply_base_key(spec.base, key, value)) return true;
        if (key == "tune.trials") {
            spec.trials = std::size_t(parse_uint(key, value));
        } else if (key.rfind("tune.param.", 0) == 0) {
            ParamSpec p;
            p.name = key.substr(11);
            std::vector<std::string> parts;
            std::stringstream ss(value);
            std::string part;
            while (std::getline(ss, part, ':')) parts.push_back(trim(part));
            if (parts.size() < 2)
                throw std::invalid_argument("config key '" + key +
                                            "': expected 'lo:hi[:log][:int]'");
            p.lo = parse_double(key, parts[0]);
            p.hi = parse_double(key, parts[1]);
            for (std::size_t i = 2; i < parts.size(); ++i) {
                if (parts[i] == "log")
                    p.log_scale = true;
                else if (parts[i] == "int")
                    p.integer = true;
                else
                    throw std::invalid_argument("config key '" + key + "': unknown range flag '" +
                                                parts[i] + "'");
            }
            spec.space.push_back(std::move(p));
        } else {
            return false;
        }
        return true;
    });
    return spec;
}

std::vector<std::string> known_presets() {
    std::vector<std::string> out;
    for (const Preset& p : kPresets) out.push_back(p.name);
    return out;
}

std::unique_ptr<StreamModel> build_model(const std::string& name,
                                         const std::map<std::string, double>& params,
                                         std::size_t n_features, std::uint64_t seed) {
    if (auto learner = build_incremental(name, params, n_features, seed)) {
        auto it = params.find("undersample");
        if (it != params.end())
            learner = std::make_unique<UndersampleWrapper>(std::move(learner), it->second, seed);
        return learner;
    }

    StrategyConfig s;
    if (name == "static_gbdt")
        s.kind = StrategyKind::static_model;
    else if (name == "retrain_gbdt" || name == "retrain_cart")
        s.kind = StrategyKind::retrain;
    else if (name == "stack_gbdt")
        s.kind = StrategyKind::stack;
    else if (name == "propagate_gbdt")
        s.kind = StrategyKind::propagate;
    else if (name == "finetune_linear")
        s.kind = StrategyKind::finetune;
    else
        throw std::invalid_argument("unknown model '" + name + "'");

    s.train_every = std::size_t(param_or(params, "train_every", 1));
    s.train_fraction = param_or(params, "train_fraction", 0.7);

    if (name == "finetune_linear") {
        check_params(name, params,
                     {"learning_rate", "epochs", "l2", "eta0", "decay", "passes", "train_every",
                      "train_fraction"});
        s.finetune_eta0 = param_or(params, "eta0", 0.5);
        s.finetune_decay = param_or(params, "decay", 0.1);
        s.finetune_passes = std::size_t(param_or(params, "passes", 20));
        BatchLinearConfig l;
        l.learning_rate = param_or(params, "learning_rate", 0.5);
        l.epochs = std::size_t(param_or(params, "epochs", 200));
        l.l2 = param_or(params, "l2", 0.0);
        return std::make_unique<ChunkStrategy>(s, l, seed);
    }

    if (name == "retrain_cart") {
        check_params(name, params,
                     {"depth", "min_leaf", "train_every", "train_fraction"});
        CartConfig c;
        c.max_depth = std::size_t(param_or(params, "depth", 6));
        c.min_samples_leaf = std::size_t(param_or(params, "min_leaf", 5));
        BatchFitter fitter = [c](const LabeledChunk& train, const LabeledChunk& val,
                                 std::uint64_t) {
            LabeledChunk all = merge_chunks(train, val);
            return std::make_unique<CartTree>(CartTree::fit(all.X, all.y, c));
        };
        return std::make_unique<ChunkStrategy>(s, std::move(fitter), seed);
    }

    std::initializer_list<const char*> gbdt_params = {
        "trees", "depth", "learning_rate", "patience", "l2", "min_leaf", "train_every",
        "train_fraction", "members", "window"};
    check_params(name, params, gbdt_params);
    if (name == "stack_gbdt") s.stack_members = std::size_t(param_or(params, "members", 3));
    if (name == "propagate_gbdt") s.propagate_chunks = std::size_t(param_or(params, "window", 3));
    if (name != "stack_gbdt" && params.count("members"))
        throw std::invalid_argument("model " + name + ": unknown parameter 'members'");
    if (name != "propagate_gbdt" && params.count("window"))
        throw std::invalid_argument("model " + name + ": unknown parameter 'window'");

    GbdtConfig g = gbdt_config_from(params);
    BatchFitter fitter = [g](const LabeledChunk& train, const LabeledChunk& val, std::uint64_t) {
        return std::make_unique<Gbdt>(Gbdt::fit(train.X, train.y, val.X, val.y, g));
    };
    return std::make_unique<ChunkStrategy>(s, std::move(fitter), seed);
}

MaterializedStream materialize_stream(const ExperimentConfig& config) {
    RunSeed seeds{config.seed};
    MaterializedStream out;

    std::vector<Instance> instances;
    std::vector<std::int64_t> file_delays;
    bool has_file_delays = false;
    double chunk_mean = config.chunk_mean;
    double offline_fraction = config.offline_fraction;

    if (config.dataset == "csv") {
        if (config.csv_path.empty())
            throw std::invalid_argument("dataset.csv requires a file path");
        CsvStream replay = csv_replay(config.csv_path);
        instances = std::move(replay.instances);
        file_delays = std::move(replay.delays);
        has_file_delays = replay.has_delays;
        out.n_features = replay.n_features;
        out.dataset_label = fs::path(config.csv_path).stem().string();
        out.metric = config.metric == "aucpr" ? MetricKind::auc_pr : MetricKind::auc_roc;
        if (chunk_mean == 0.0) chunk_mean = 1000.0;
        if (offline_fraction == 0.0) offline_fraction = 0.1;
    } else {
        const Preset& p = resolve_preset(config.dataset);
        if (chunk_mean == 0.0) chunk_mean = p.chunk_mean;
        if (offline_fraction == 0.0) offline_fraction = p.offline_fraction;
        out.dataset_label = p.name;
        out.metric = p.metric;
        if (config.metric == "aucroc") out.metric = MetricKind::auc_roc;
        if (config.metric == "aucpr") out.metric = MetricKind::auc_pr;
        instances = generate_instances(p, seeds.substream_seed("generator"));
        out.n_features = instances.empty() ? 0 : instances.front().features.size();
    }

    if (!(offline_fraction > 0.0 && offline_fraction < 1.0))
        throw std::invalid_argument("offline.fraction must lie in (0,1)");
    if (!(chunk_mean > 0.0)) throw std::invalid_argument("chunk.mean must be positive");
    if (instances.size() < 2) throw std::invalid_argument("dataset too small to split");
    out.chunk_mean = chunk_mean;

    std::size_t offline_n = std::size_t(std::llround(offline_fraction * double(instances.size())));
    offline_n = std::clamp<std::size_t>(offline_n, 1, instances.size() - 1);
    out.offline.id = 0;
    for (std::size_t i = 0; i < offline_n; ++i) {
        out.offline.X.push_back(std::move(instances[i].features));
        out.offline.y.push_back(instances[i].label);
    }
    out.stream.reserve(instances.size() - offline_n);
    for (std::size_t i = offline_n; i < instances.size(); ++i) {
        Instance inst = std::move(instances[i]);
        inst.id = out.stream.size();
        out.stream.push_back(std::move(inst));
    }

    if (has_file_delays) {
        out.delays.assign(file_delays.begin() + std::ptrdiff_t(offline_n), file_delays.end());
        out.delay_factor_column = -1.0;
    } else {
        DelayModel model;
        if (config.delay_mode == "zero") {
            model = DelayModel::zero();
            out.delay_factor_column = 0.0;
        } else if (config.delay_mode == "poisson_factor") {
            model = DelayModel::poisson_factor(config.delay_factor);
            out.delay_factor_column = config.delay_factor;
        } else if (config.delay_mode == "fixed") {
            model = DelayModel::fixed(config.delay_fixed);
            out.delay_factor_column = -1.0;
        } else {
            model = DelayModel::class_conditional(
                DelayModel::poisson_factor(config.delay_positive_factor),
                DelayModel::poisson_factor(config.delay_negative_factor));
            out.delay_factor_column = -1.0;
        }
        Rng delay_rng = seeds.substream("delay");
        out.delays.reserve(out.stream.size());
        for (const Instance& inst : out.stream)
            out.delays.push_back(std::int64_t(model.sample(inst, delay_rng)));
    }
    return out;
}

namespace {

std::string delay_tag(const ExperimentConfig& config, double column) {
    if (config.delay_mode == "fixed") return "f" + std::to_string(config.delay_fixed);
    if (config.delay_mode == "class_conditional") return "cc";
    return "a" + format_number(column < 0.0 ? 0.0 : column);
}

void write_chunks_csv(const std::string& path, const RunResult& result) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + path);
    f << "chunk_id,n,positives,metric_name,metric_value,predict_ms,train_ms,gc_ms\n";
    for (const ChunkReport& r : result.reports) {
        f << r.chunk_id << ',' << r.n << ',' << r.positives << ',' << r.metric << ',';
        if (r.value) f << format_number(*r.value);
        f << ',' << format_number(r.predict_ms) << ',' << format_number(r.train_ms) << ','
          << format_number(r.gc_ms) << '\n';
    }
}

void write_summary_row(std::ofstream& f, const RunOutput& run) {
    f << run.model << ',' << run.dataset << ',' << format_number(run.delay_factor) << ','
      << format_number(run.mean) << ',' << format_number(run.stddev) << ','
      << format_number(run.runtime_s) << '\n';
}

const char* kSummaryHeader = "model,dataset,delay_factor,mean,std,runtime_s\n";

}  // namespace

RunOutput run_experiment(const ExperimentConfig& config) {
    auto t0 = std::chrono::steady_clock::now();

    MaterializedStream data = materialize_stream(config);
    RunSeed seeds{config.seed};

    std::unique_ptr<StreamModel> model =
        build_model(config.model, config.model_params, data.n_features,
                    seeds.substream_seed("learner"));
    model->pretrain(data.offline);

    Rng chunk_rng = seeds.substream("chunking");
    ChunkLedger ledger =
        ChunkLedger::from_poisson(data.stream.size(), data.chunk_mean, chunk_rng);

    std::vector<StreamEvent> events = schedule_events(std::move(data.stream), data.delays);
    RunResult result = run_stream(events, *model, ledger, data.metric, config.timing);

    RunOutput out;
    out.model = config.model;
    out.dataset = data.dataset_label;
    out.delay_factor = data.delay_factor_column;

    double sum = 0.0, sum_sq = 0.0;
    std::size_t defined = 0;
    for (const ChunkReport& r : result.reports) {
        if (!r.value) continue;
        sum += *r.value;
        sum_sq += *r.value * *r.value;
        ++defined;
    }
    if (defined > 0) {
        out.mean = sum / double(defined);
        out.stddev = std::sqrt(std::max(0.0, sum_sq / double(defined) - out.mean * out.mean));
    }

    out.runtime_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    fs::path dir = fs::path(config.out) /
                   (data.dataset_label + "_" + config.model + "_" +
                    delay_tag(config, data.delay_factor_column) + "_s" +
                    std::to_string(config.seed));
    fs::create_directories(dir);
    out.run_dir = dir.string();

    write_chunks_csv((dir / "chunks.csv").string(), result);

    std::ofstream f(dir / "summary.csv", std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + (dir / "summary.csv").string());
    f << kSummaryHeader;
    write_summary_row(f, out);

    out.result = std::move(result);
    return out;
}

SweepOutcome run_sweep(const std::vector<ExperimentConfig>& configs, std::size_t parallelism,
                       const std::string& out_root) {
    SweepOutcome outcome;
    std::vector<RunOutput> slots(configs.size());
    std::vector<std::string> errors(configs.size());
    std::atomic<std::size_t> next{0};

    auto work = [&] {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= configs.size()) return;
            try {
                slots[i] = run_experiment(configs[i]);
            } catch (const std::exception& e) {
                errors[i] = std::string("run ") + std::to_string(i) + ": " + e.what();
            }
        }
    };

    std::size_t workers = std::clamp<std::size_t>(parallelism, 1, std::max<std::size_t>(1, configs.size()));
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
    for (std::thread& t : pool) t.join();

    for (std::size_t i = 0; i < configs.size(); ++i) {
        if (!errors[i].empty())
            outcome.failures.push_back(errors[i]);
        else
            outcome.runs.push_back(std::move(slots[i]));
    }

    fs::create_directories(out_root);
    std::ofstream summary(fs::path(out_root) / "summary.csv", std::ios::binary);
    summary << kSummaryHeader;
    for (const RunOutput& run : outcome.runs) write_summary_row(summary, run);

    // Fig-3 style table: one row per (dataset, model, factor), the
    // metric averaged over seeds.
    std::map<std::tuple<std::string, std::string, double>, std::pair<double, std::size_t>> cells;
    for (const RunOutput& run : outcome.runs) {
        auto& cell = cells[{run.dataset, run.model, run.delay_factor}];
        cell.first += run.mean;
        cell.second += 1;
    }
    std::ofstream impact(fs::path(out_root) / "delay_impact.csv", std::ios::binary);
    impact << "model,dataset,delay_factor,mean\n";
    for (const auto& [key, cell] : cells) {
        impact << std::get<1>(key) << ',' << std::get<0>(key) << ','
               << format_number(std::get<2>(key)) << ','
               << format_number(cell.first / double(cell.second)) << '\n';
    }
    return outcome;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) out.push_back(field);
    if (!line.empty() && line.back() == ',') out.push_back("");
    return out;
}

}  // namespace

void emit_report(const std::string& results_dir) {
    std::vector<fs::path> run_dirs;
    for (const auto& entry : fs::recursive_directory_iterator(results_dir)) {
        if (!entry.is_directory()) continue;
        if (fs::exists(entry.path() / "summary.csv") && fs::exists(entry.path() / "chunks.csv"))
            run_dirs.push_back(entry.path());
    }
    std::sort(run_dirs.begin(), run_dirs.end());
    if (run_dirs.empty())
        throw std::invalid_argument("no run results under '" + results_dir + "'");

    std::vector<RunSummary> pooled;
    auto find_slot = [&](const std::string& model, const std::string& dataset) -> RunSummary& {
        for (RunSummary& r : pooled)
            if (r.model == model && r.dataset == dataset) return r;
        pooled.push_back(RunSummary{model, dataset, {}});
        return pooled.back();
    };

    for (const fs::path& dir : run_dirs) {
        std::ifstream sf(dir / "summary.csv");
        std::string line;
        std::getline(sf, line);  // header
        if (!std::getline(sf, line)) continue;
        std::vector<std::string> fields = split_csv_line(line);
        if (fields.size() < 2) continue;
        RunSummary& slot = find_slot(fields[0], fields[1]);

        std::ifstream cf(dir / "chunks.csv");
        std::getline(cf, line);  // header
        while (std::getline(cf, line)) {
            std::vector<std::string> row = split_csv_line(line);
            if (row.size() < 5) continue;
            if (row[4].empty())
                slot.chunk_values.push_back(std::nullopt);
            else
                slot.chunk_values.push_back(std::stod(row[4]));
        }
    }

    SummaryTable table = aggregate_results(pooled);
    std::ofstream f(fs::path(results_dir) / "table.csv", std::ios::binary);
    f << "model,dataset,mean,std,avg,n_avg,avg_rank\n";
    for (const CellAggregate& cell : table.cells) {
        const ModelAggregate* agg = nullptr;
        for (const ModelAggregate& m : table.models)
            if (m.model == cell.model) agg = &m;
        f << cell.model << ',' << cell.dataset << ',' << format_number(cell.mean) << ','
          << format_number(cell.stddev) << ',' << format_number(agg->avg) << ','
          << format_number(agg->n_avg) << ',' << format_number(agg->avg_rank) << '\n';
    }
}

}  // namespace delaybench
