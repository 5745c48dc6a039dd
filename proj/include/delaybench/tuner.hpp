#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "delaybench/metrics.hpp"
#include "delaybench/model.hpp"

namespace delaybench {

// One hyperparameter dimension. Log-scale ranges are sampled in log
// space; integer dimensions are rounded after sampling.
struct ParamSpec {
    std::string name;
    double lo = 0.0;
    double hi = 1.0;
    bool log_scale = false;
    bool integer = false;
};

struct TrialConfig {
    std::map<std::string, double> values;

    double at(const std::string& name) const;
};

using TunedModelBuilder =
    std::function<std::unique_ptr<StreamModel>(const TrialConfig&, std::uint64_t seed)>;

struct TuneResult {
    TrialConfig best;
    double best_score = 0.0;
    std::size_t best_trial = 0;
    std::vector<double> trial_scores;  // NaN marks an undefined metric
};

// Plain random search over the offline reserve. Instance-incremental
// models are scored prequentially; batch models train on a stratified
// 70% cut and are scored on the rest. Trial t's config depends only
// on (seed, t), so extending the trial budget keeps earlier trials
// identical. Ties keep the earliest trial.
TuneResult tune_random_search(const std::vector<ParamSpec>& space, const LabeledChunk& offline,
                              std::size_t n_trials, const TunedModelBuilder& builder,
                              std::uint64_t seed, MetricKind metric = MetricKind::auc_roc);

}  // namespace delaybench
