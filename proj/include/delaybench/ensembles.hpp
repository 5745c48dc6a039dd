#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include "delaybench/adwin.hpp"
#include "delaybench/hoeffding_tree.hpp"
#include "delaybench/model.hpp"
#include "delaybench/rng.hpp"

namespace delaybench {

using LearnerFactory = std::function<std::unique_ptr<IncrementalLearner>(std::uint64_t)>;

struct LeveragingBaggingConfig {
    std::size_t n_members = 10;
    double lambda = 6.0;
    double adwin_delta = 0.002;
    // Test knob: weight every instance 1 instead of Poisson(lambda).
    bool unit_weight = false;
};

// Online bagging with amplified resampling: members train on Poisson
// weighted copies, one ADWIN per member watches its error, and a
// detection resets the worst member. Votes are averaged probabilities.
class LeveragingBagging : public IncrementalLearner {
  public:
    LeveragingBagging(LeveragingBaggingConfig config, LearnerFactory factory,
                      std::uint64_t seed);

    double score(const std::vector<double>& x) override;
    void learn_one(const std::vector<double>& x, int y) override;

    std::size_t member_count() const { return members_.size(); }
    std::size_t reset_count() const { return resets_; }

  private:
    struct Member {
        std::unique_ptr<IncrementalLearner> learner;
        Adwin adwin;
    };

    LeveragingBaggingConfig config_;
    LearnerFactory factory_;
    Rng rng_;
    std::uint64_t base_seed_;
    std::uint64_t spawned_ = 0;
    std::size_t resets_ = 0;
    std::vector<Member> members_;

    std::unique_ptr<IncrementalLearner> spawn();
};

struct ArfConfig {
    std::size_t n_members = 10;
    double lambda = 6.0;
    double warning_delta = 0.01;
    double drift_delta = 0.001;
    // 0 derives ceil(sqrt(p)) + 1; p disables feature subsetting.
    std::size_t mask_size = 0;
    bool disable_detectors = false;
    HoeffdingTreeConfig tree;
};

// Random forest for streams: per-leaf random feature subsets, Poisson
// resampling, and a warning/drift detector pair per member. A warning
// starts a background tree; a drift swaps it in (or restarts fresh).
class AdaptiveRandomForest : public IncrementalLearner {
  public:
    AdaptiveRandomForest(ArfConfig config, std::size_t n_features, std::uint64_t seed);

    double score(const std::vector<double>& x) override;
    void learn_one(const std::vector<double>& x, int y) override;

    // Test hook: run the drift-replacement path on one member.
    void force_member_drift(std::size_t index);

    std::size_t member_count() const { return members_.size(); }
    bool has_background(std::size_t index) const;
    std::size_t replacement_count() const { return replacements_; }

  private:
    struct Member {
        HoeffdingTree tree;
        Adwin warning;
        Adwin drift;
        std::unique_ptr<HoeffdingTree> background;
    };

    ArfConfig config_;
    std::size_t n_features_;
    Rng rng_;
    std::uint64_t base_seed_;
    std::uint64_t spawned_ = 0;
    std::size_t replacements_ = 0;
    std::vector<Member> members_;

    HoeffdingTree spawn_tree();
    void replace_member(Member& member);
};

// Forwards every positive to the base learner but only a fraction of
// negatives, the plain recipe against heavy class imbalance.
class UndersampleWrapper : public IncrementalLearner {
  public:
    UndersampleWrapper(std::unique_ptr<IncrementalLearner> base, double keep_negative_prob,
                       std::uint64_t seed);

    double score(const std::vector<double>& x) override;
    void learn_one(const std::vector<double>& x, int y) override;
    void learn_weighted(const std::vector<double>& x, int y, std::uint64_t weight) override;

  private:
    std::unique_ptr<IncrementalLearner> base_;
    double keep_negative_prob_;
    Rng rng_;
};

}  // namespace delaybench
