#include "delaybench/ensembles.hpp"

#include <cmath>
#include <stdexcept>

namespace delaybench {

LeveragingBagging::LeveragingBagging(LeveragingBaggingConfig config, LearnerFactory factory,
                                     std::uint64_t seed)
    : config_(config),
      factory_(std::move(factory)),
      rng_(derive_seed(seed, hash_label("levbag"))),
      base_seed_(seed) {
    if (config_.n_members == 0) throw std::invalid_argument("ensemble needs members");
    if (config_.n_members > 100) throw std::invalid_argument("ensemble cap is 100 members");
    if (!factory_) throw std::invalid_argument("ensemble needs a base learner factory");
    members_.reserve(config_.n_members);
    for (std::size_t i = 0; i < config_.n_members; ++i) {
        members_.push_back(Member{spawn(), Adwin(config_.adwin_delta)});
    }
}

std::unique_ptr<IncrementalLearner> LeveragingBagging::spawn() {
    return factory_(derive_seed(base_seed_, spawned_++));
}

double LeveragingBagging::score(const std::vector<double>& x) {
    double sum = 0.0;
    for (auto& m : members_) sum += m.learner->score(x);
    return sum / double(members_.size());
}

void LeveragingBagging::learn_one(const std::vector<double>& x, int y) {
    bool any_fired = false;
    for (auto& m : members_) {
        int pred = m.learner->score(x) > 0.5 ? 1 : 0;
        // A cut with a falling estimate just means the member improved,
        // only a worse window counts as drift.
        double before = m.adwin.estimate();
        if (m.adwin.update(pred != y ? 1.0 : 0.0)) {
            any_fired |= m.adwin.estimate() > before;
        }
        std::uint64_t k = config_.unit_weight ? 1 : rng_.poisson(config_.lambda);
        if (k > 0) m.learner->learn_weighted(x, y, k);
    }
    if (!any_fired) return;
    // Restart the member whose window reports the worst error.
    std::size_t worst = 0;
    for (std::size_t i = 1; i < members_.size(); ++i) {
        if (members_[i].adwin.estimate() > members_[worst].adwin.estimate()) worst = i;
    }
    members_[worst].learner = spawn();
    members_[worst].adwin = Adwin(config_.adwin_delta);
    ++resets_;
}

AdaptiveRandomForest::AdaptiveRandomForest(ArfConfig config, std::size_t n_features,
                                           std::uint64_t seed)
    : config_(config),
      n_features_(n_features),
      rng_(derive_seed(seed, hash_label("arf"))),
      base_seed_(seed) {
    if (config_.n_members == 0) throw std::invalid_argument("ensemble needs members");
    if (config_.n_members > 100) throw std::invalid_argument("ensemble cap is 100 members");
    if (n_features_ == 0) throw std::invalid_argument("forest needs at least one feature");
    if (config_.mask_size == 0) {
        config_.mask_size =
            std::size_t(std::ceil(std::sqrt(double(n_features_)))) + 1;
        if (config_.mask_size > n_features_) config_.mask_size = n_features_;
    }
    members_.reserve(config_.n_members);
    for (std::size_t i = 0; i < config_.n_members; ++i) {
        members_.push_back(Member{spawn_tree(), Adwin(config_.warning_delta),
                                  Adwin(config_.drift_delta), nullptr});
    }
}

HoeffdingTree AdaptiveRandomForest::spawn_tree() {
    HoeffdingTreeConfig tree = config_.tree;
    tree.mask_size = config_.mask_size == n_features_ ? 0 : config_.mask_size;
    return HoeffdingTree(tree, n_features_, derive_seed(base_seed_, spawned_++));
}

double AdaptiveRandomForest::score(const std::vector<double>& x) {
    double sum = 0.0;
    for (auto& m : members_) sum += m.tree.score(x);
    return sum / double(members_.size());
}

void AdaptiveRandomForest::replace_member(Member& member) {
    if (member.background) {
        member.tree = std::move(*member.background);
        member.background.reset();
    } else {
        member.tree = spawn_tree();
    }
    member.warning = Adwin(config_.warning_delta);
    member.drift = Adwin(config_.drift_delta);
    ++replacements_;
}

void AdaptiveRandomForest::learn_one(const std::vector<double>& x, int y) {
    for (auto& m : members_) {
        double err = (m.tree.score(x) > 0.5 ? 1 : 0) != y ? 1.0 : 0.0;
        std::uint64_t k = rng_.poisson(config_.lambda);
        if (k > 0) {
            m.tree.learn_weighted(x, y, k);
            if (m.background) m.background->learn_weighted(x, y, k);
        }
        if (config_.disable_detectors) continue;

        // A cut only counts when the post-cut error sits higher than
        // before, i.e. the window shrank because things got worse.
        double w_before = m.warning.estimate();
        if (m.warning.update(err) && m.warning.estimate() > w_before && !m.background) {
            m.background = std::make_unique<HoeffdingTree>(spawn_tree());
        }
        double d_before = m.drift.estimate();
        if (m.drift.update(err) && m.drift.estimate() > d_before) {
            replace_member(m);
        }
    }
}

void AdaptiveRandomForest::force_member_drift(std::size_t index) {
    replace_member(members_.at(index));
}

bool AdaptiveRandomForest::has_background(std::size_t index) const {
    return members_.at(index).background != nullptr;
}

UndersampleWrapper::UndersampleWrapper(std::unique_ptr<IncrementalLearner> base,
                                       double keep_negative_prob, std::uint64_t seed)
    : base_(std::move(base)),
      keep_negative_prob_(keep_negative_prob),
      rng_(derive_seed(seed, hash_label("undersample"))) {
    if (!base_) throw std::invalid_argument("wrapper needs a base learner");
    if (!(keep_negative_prob_ > 0.0) || keep_negative_prob_ > 1.0) {
        throw std::invalid_argument("negative keep probability must be in (0,1]");
    }
}

double UndersampleWrapper::score(const std::vector<double>& x) {
    return base_->score(x);
}

void UndersampleWrapper::learn_one(const std::vector<double>& x, int y) {
    learn_weighted(x, y, 1);
}

void UndersampleWrapper::learn_weighted(const std::vector<double>& x, int y,
                                        std::uint64_t weight) {
    if (y == 0 && keep_negative_prob_ < 1.0 && !rng_.bernoulli(keep_negative_prob_)) {
        return;
    }
    base_->learn_weighted(x, y, weight);
}

}  // namespace delaybench
