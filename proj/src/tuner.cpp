#include "delaybench/tuner.hpp"

#include <cmath>
#include <stdexcept>

#include "delaybench/rng.hpp"
#include "delaybench/strategies.hpp"

namespace delaybench {

double TrialConfig::at(const std::string& name) const {
    auto it = values.find(name);
    if (it == values.end()) throw std::invalid_argument("unknown hyperparameter: " + name);
    return it->second;
}

namespace {

TrialConfig draw_trial(const std::vector<ParamSpec>& space, Rng& rng) {
    TrialConfig config;
    for (const ParamSpec& spec : space) {
        if (!(spec.lo <= spec.hi)) throw std::invalid_argument("empty range: " + spec.name);
        double value;
        if (spec.log_scale) {
            if (!(spec.lo > 0.0)) throw std::invalid_argument("log range needs lo > 0");
            value = std::exp(rng.uniform(std::log(spec.lo), std::log(spec.hi)));
        } else {
            value = rng.uniform(spec.lo, spec.hi);
        }
        if (spec.integer) value = std::round(value);
        config.values[spec.name] = value;
    }
    return config;
}

double score_trial(StreamModel& model, const LabeledChunk& offline, MetricKind metric,
                   Rng& split_rng) {
    std::vector<double> scores;
    std::vector<int> labels;
    if (model.uses_training_batches()) {
        ChunkSplit split = stratified_split(offline, 0.7, split_rng);
        model.pretrain(split.train);
        for (std::size_t i = 0; i < split.val.X.size(); ++i) {
            scores.push_back(model.score(split.val.X[i]));
            labels.push_back(split.val.y[i]);
        }
    } else {
        for (std::size_t i = 0; i < offline.X.size(); ++i) {
            scores.push_back(model.score(offline.X[i]));
            labels.push_back(offline.y[i]);
            model.observe_label(offline.X[i], offline.y[i]);
        }
    }
    auto value = compute_metric(metric, scores, labels);
    return value ? *value : std::nan("");
}

}  // namespace

TuneResult tune_random_search(const std::vector<ParamSpec>& space, const LabeledChunk& offline,
                              std::size_t n_trials, const TunedModelBuilder& builder,
                              std::uint64_t seed, MetricKind metric) {
    if (space.empty()) throw std::invalid_argument("empty search space");
    if (n_trials == 0) throw std::invalid_argument("need at least one trial");
    if (!builder) throw std::invalid_argument("tuner needs a model builder");
    if (offline.X.empty()) throw std::invalid_argument("empty offline reserve");

    TuneResult result;
    bool have_best = false;
    for (std::size_t trial = 0; trial < n_trials; ++trial) {
        Rng trial_rng(derive_seed(seed, trial));
        TrialConfig config = draw_trial(space, trial_rng);
        auto model = builder(config, derive_seed(seed, trial));
        double score = score_trial(*model, offline, metric, trial_rng);
        result.trial_scores.push_back(score);
        if (!std::isnan(score) && (!have_best || score > result.best_score)) {
            have_best = true;
            result.best_score = score;
            result.best_trial = trial;
            result.best = config;
        }
        if (!have_best && trial == 0) result.best = config;
    }
    if (!have_best) result.best_score = std::nan("");
    return result;
}

}  // namespace delaybench
