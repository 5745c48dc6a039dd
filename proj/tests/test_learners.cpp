#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <memory>
#include <stdexcept>
#include <vector>

#include "delaybench/adwin.hpp"
#include "delaybench/ensembles.hpp"
#include "delaybench/generators.hpp"
#include "delaybench/hoeffding_tree.hpp"
#include "delaybench/linear.hpp"
#include "delaybench/metrics.hpp"
#include "delaybench/rng.hpp"

using namespace delaybench;

namespace {

struct Labeled {
    std::vector<std::vector<double>> X;
    std::vector<int> y;
};

Labeled sea_block(std::size_t n, double theta, double noise, std::uint64_t seed) {
    SeaConfig config;
    config.thetas = {theta};
    config.noise = noise;
    SeaGenerator gen(config, seed);
    Labeled out;
    for (std::size_t i = 0; i < n; ++i) {
        Instance x = gen.next();
        out.X.push_back(x.features);
        out.y.push_back(x.label);
    }
    return out;
}

// Two concepts that share nothing: the label tracks feature 0, then
// feature 1.
Labeled switching_block(std::size_t n_first, std::size_t n_second, std::uint64_t seed) {
    Rng rng(seed);
    Labeled out;
    for (std::size_t i = 0; i < n_first + n_second; ++i) {
        std::vector<double> x(5);
        for (auto& v : x) v = rng.uniform01();
        int y = i < n_first ? (x[0] > 0.5) : (x[1] > 0.5);
        out.X.push_back(std::move(x));
        out.y.push_back(y);
    }
    return out;
}

double auc_of(StreamModel& model, const Labeled& data, std::size_t from, std::size_t to) {
    std::vector<double> scores;
    std::vector<int> labels;
    for (std::size_t i = from; i < to; ++i) {
        scores.push_back(model.score(data.X[i]));
        labels.push_back(data.y[i]);
    }
    auto auc = auc_roc(scores, labels);
    REQUIRE(auc.has_value());
    return *auc;
}

double prequential_accuracy(IncrementalLearner& model, const Labeled& data, std::size_t from,
                            std::size_t to) {
    std::size_t correct = 0;
    for (std::size_t i = from; i < to; ++i) {
        correct += (model.score(data.X[i]) > 0.5 ? 1 : 0) == data.y[i];
        model.learn_one(data.X[i], data.y[i]);
    }
    return double(correct) / double(to - from);
}

struct CountingLearner : IncrementalLearner {
    std::size_t positives = 0;
    std::size_t negatives = 0;
    double score(const std::vector<double>&) override { return 0.5; }
    void learn_one(const std::vector<double>&, int y) override {
        (y == 1 ? positives : negatives) += 1;
    }
};

}  // namespace

TEST_CASE("adwin ignores constant input") {
    Adwin adwin(0.002);
    for (int i = 0; i < 10000; ++i) CHECK_FALSE(adwin.update(0.7));
    CHECK(adwin.width() == 10000);
    CHECK(adwin.estimate() == doctest::Approx(0.7));
}

TEST_CASE("adwin rejects values outside the unit interval") {
    Adwin adwin(0.002);
    CHECK_THROWS_AS(adwin.update(-0.1), std::invalid_argument);
    CHECK_THROWS_AS(adwin.update(1.1), std::invalid_argument);
    CHECK_THROWS_AS(Adwin(0.0), std::invalid_argument);
}

TEST_CASE("adwin detects an abrupt level shift quickly") {
    int detected = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        Rng rng(derive_seed(900, seed));
        Adwin adwin(0.002);
        for (int i = 0; i < 500; ++i) adwin.update(rng.bernoulli(0.1) ? 1.0 : 0.0);
        bool hit = false;
        int hit_at = 0;
        for (int i = 0; i < 500; ++i) {
            if (adwin.update(rng.bernoulli(0.9) ? 1.0 : 0.0) && !hit) {
                hit = true;
                hit_at = i;
            }
        }
        if (hit && hit_at < 300) ++detected;
        // After settling, the window should track the new level.
        CHECK(adwin.estimate() == doctest::Approx(0.9).epsilon(0.12));
    }
    CHECK(detected >= 99);
}

TEST_CASE("adwin stays quiet on a stationary stream") {
    std::size_t total_cuts = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        Rng rng(derive_seed(901, seed));
        Adwin adwin(0.002);
        for (int i = 0; i < 100000; ++i) {
            if (adwin.update(rng.bernoulli(0.5) ? 1.0 : 0.0)) ++total_cuts;
        }
    }
    // On average at most one cut per 10,000 stationary values.
    CHECK(total_cuts <= 20 * 10);
}

TEST_CASE("hoeffding bound evaluates its formula") {
    CHECK(hoeffding_bound(1.0, 1e-7, 200) == doctest::Approx(0.20074).epsilon(1e-4));
    CHECK(hoeffding_bound(1.0, 0.05, 400) ==
          doctest::Approx(2.0 * hoeffding_bound(1.0, 0.05, 1600)).epsilon(1e-12));
    CHECK(hoeffding_bound(1.0, 1.0, 50) == 0.0);
    CHECK_THROWS_AS(hoeffding_bound(0.0, 0.5, 10), std::invalid_argument);
    CHECK_THROWS_AS(hoeffding_bound(1.0, 0.0, 10), std::invalid_argument);
    CHECK_THROWS_AS(hoeffding_bound(1.0, 0.5, 0), std::invalid_argument);
}

TEST_CASE("untrained tree predicts one half") {
    HoeffdingTree tree(HoeffdingTreeConfig{}, 3);
    CHECK(tree.score({1.0, 2.0, 3.0}) == doctest::Approx(0.5));
    CHECK_THROWS_AS(tree.score({1.0}), std::invalid_argument);
    CHECK_THROWS_AS(tree.learn_one({1.0, 2.0, 3.0}, 2), std::invalid_argument);
}

TEST_CASE("tree learns a noisy threshold stream within its depth cap") {
    auto data = sea_block(50000, 8.0, 0.1, 505);
    HoeffdingTree tree(HoeffdingTreeConfig{}, 3);
    for (std::size_t i = 0; i + 5000 < data.X.size(); ++i) tree.learn_one(data.X[i], data.y[i]);
    double auc = auc_of(tree, data, data.X.size() - 5000, data.X.size());
    CHECK(auc >= 0.83);
    CHECK(tree.height() <= 6);
    CHECK(tree.node_count() > 1);
}

TEST_CASE("tree training is deterministic") {
    auto data = sea_block(20000, 8.0, 0.1, 7);
    HoeffdingTree a(HoeffdingTreeConfig{}, 3), b(HoeffdingTreeConfig{}, 3);
    for (std::size_t i = 0; i < data.X.size(); ++i) {
        a.learn_one(data.X[i], data.y[i]);
        b.learn_one(data.X[i], data.y[i]);
    }
    for (std::size_t i = 0; i < 200; ++i) {
        CHECK(a.score(data.X[i]) == b.score(data.X[i]));
    }
}

TEST_CASE("split choice depends on statistics, not feature position") {
    // The informative feature should win the split wherever it sits.
    Rng rng(606);
    HoeffdingTree first(HoeffdingTreeConfig{}, 2), second(HoeffdingTreeConfig{}, 2);
    for (int i = 0; i < 5000; ++i) {
        double informative = rng.uniform01();
        double noise = rng.uniform01();
        int y = informative > 0.5;
        first.learn_one({informative, noise}, y);
        second.learn_one({noise, informative}, y);
    }
    for (double v : {0.1, 0.3, 0.45, 0.55, 0.7, 0.9}) {
        for (double r : {0.2, 0.8}) {
            CHECK(first.score({v, r}) == doctest::Approx(second.score({r, v})).epsilon(1e-12));
        }
    }
}

TEST_CASE("adaptive tree matches the plain tree on a stationary stream") {
    auto data = sea_block(20000, 8.0, 0.1, 909);
    HoeffdingTreeConfig plain;
    HoeffdingTreeConfig adaptive = plain;
    adaptive.adaptive = true;
    HoeffdingTree ht(plain, 3), hat(adaptive, 3);
    for (std::size_t i = 0; i < data.X.size(); ++i) {
        ht.learn_one(data.X[i], data.y[i]);
        hat.learn_one(data.X[i], data.y[i]);
    }
    for (std::size_t i = 0; i < 500; ++i) {
        CHECK(ht.score(data.X[i]) == hat.score(data.X[i]));
    }
}

TEST_CASE("adaptive tree recovers from an abrupt concept switch faster") {
    auto data = switching_block(30000, 30000, 111);
    HoeffdingTreeConfig plain;
    HoeffdingTreeConfig adaptive = plain;
    adaptive.adaptive = true;
    HoeffdingTree ht(plain, 5), hat(adaptive, 5);

    // Train both past the switch, then compare late-stream accuracy.
    prequential_accuracy(ht, data, 0, 50000);
    prequential_accuracy(hat, data, 0, 50000);
    double acc_ht = prequential_accuracy(ht, data, 50000, 60000);
    double acc_hat = prequential_accuracy(hat, data, 50000, 60000);
    CHECK(acc_hat >= acc_ht + 0.02);
    CHECK(acc_hat >= 0.9);
}

TEST_CASE("logistic regression separates a linear concept") {
    Rng rng(33);
    OnlineLogistic lr(OnlineLogisticConfig{}, 2);
    Labeled data;
    for (int i = 0; i < 11000; ++i) {
        std::vector<double> x = {rng.normal(), rng.normal()};
        data.y.push_back(x[0] > 0.0);
        data.X.push_back(std::move(x));
    }
    for (int i = 0; i < 10000; ++i) lr.learn_one(data.X[i], data.y[i]);
    CHECK(auc_of(lr, data, 10000, 11000) >= 0.99);
}

TEST_CASE("logistic regression standardizes scale and shift away") {
    Rng rng(34);
    OnlineLogistic lr(OnlineLogisticConfig{}, 2);
    Labeled data;
    for (int i = 0; i < 11000; ++i) {
        double raw = rng.normal();
        std::vector<double> x = {raw * 5000.0 + 300000.0, rng.normal() * 0.001};
        data.y.push_back(raw > 0.0);
        data.X.push_back(std::move(x));
    }
    for (int i = 0; i < 10000; ++i) lr.learn_one(data.X[i], data.y[i]);
    CHECK(auc_of(lr, data, 10000, 11000) >= 0.99);
}

TEST_CASE("unit positive cost is plain logistic sgd") {
    Rng rng(35);
    OnlineLogisticConfig unit;
    unit.cost_positive = 1.0;
    OnlineLogisticConfig heavy;
    heavy.cost_positive = 5.0;
    OnlineLogistic a(unit, 2), b(unit, 2), c(heavy, 2);
    for (int i = 0; i < 2000; ++i) {
        std::vector<double> x = {rng.normal(), rng.normal()};
        int y = rng.bernoulli(0.3);
        a.learn_one(x, y);
        b.learn_one(x, y);
        c.learn_one(x, y);
    }
    CHECK(a.weights() == b.weights());
    CHECK(a.bias() == b.bias());
    CHECK(a.weights() != c.weights());
}

TEST_CASE("logistic regression rejects non-finite input") {
    OnlineLogistic lr(OnlineLogisticConfig{}, 2);
    CHECK_THROWS_AS(lr.learn_one({std::nan(""), 0.0}, 1), std::invalid_argument);
    CHECK_THROWS_AS(lr.learn_one({1.0, INFINITY}, 0), std::invalid_argument);
}

TEST_CASE("single-member unit-weight bagging is the base learner") {
    LeveragingBaggingConfig config;
    config.n_members = 1;
    config.unit_weight = true;
    std::uint64_t seed = 42;
    auto factory = [](std::uint64_t s) {
        return std::make_unique<HoeffdingTree>(HoeffdingTreeConfig{}, 3, s);
    };
    LeveragingBagging bag(config, factory, seed);
    HoeffdingTree solo(HoeffdingTreeConfig{}, 3, derive_seed(seed, 0));

    auto data = sea_block(10000, 8.0, 0.1, 77);
    for (std::size_t i = 0; i < data.X.size(); ++i) {
        bag.learn_one(data.X[i], data.y[i]);
        solo.learn_one(data.X[i], data.y[i]);
    }
    for (std::size_t i = 0; i < 300; ++i) {
        CHECK(bag.score(data.X[i]) == solo.score(data.X[i]));
    }
    LeveragingBaggingConfig empty;
    empty.n_members = 0;
    CHECK_THROWS_AS(LeveragingBagging(empty, factory, 1), std::invalid_argument);
}

TEST_CASE("bagging resets a member after a concept flip") {
    auto data = switching_block(10000, 5000, 222);
    LeveragingBaggingConfig config;
    config.n_members = 5;
    auto factory = [](std::uint64_t s) {
        return std::make_unique<HoeffdingTree>(HoeffdingTreeConfig{}, 5, s);
    };
    LeveragingBagging bag(config, factory, 9);
    for (std::size_t i = 0; i < data.X.size(); ++i) bag.learn_one(data.X[i], data.y[i]);
    CHECK(bag.reset_count() >= 1);
}

TEST_CASE("bagged trees beat a single tree across drift") {
    auto data = switching_block(15000, 15000, 333);
    auto factory = [](std::uint64_t s) {
        return std::make_unique<HoeffdingTree>(HoeffdingTreeConfig{}, 5, s);
    };
    LeveragingBaggingConfig config;
    config.n_members = 10;
    LeveragingBagging bag(config, factory, 4);
    HoeffdingTree solo(HoeffdingTreeConfig{}, 5);
    double acc_bag = prequential_accuracy(bag, data, 0, data.X.size());
    double acc_solo = prequential_accuracy(solo, data, 0, data.X.size());
    CHECK(acc_bag > acc_solo);
}

TEST_CASE("degenerate forest equals a mirrored poisson-weighted tree") {
    ArfConfig config;
    config.n_members = 1;
    config.mask_size = 5;  // full feature set
    config.disable_detectors = true;
    std::uint64_t seed = 88;
    AdaptiveRandomForest forest(config, 5, seed);

    HoeffdingTree mirror(HoeffdingTreeConfig{}, 5, derive_seed(seed, 0));
    Rng weights(derive_seed(seed, hash_label("arf")));

    auto data = switching_block(8000, 0, 444);
    for (std::size_t i = 0; i < data.X.size(); ++i) {
        forest.learn_one(data.X[i], data.y[i]);
        std::uint64_t k = weights.poisson(config.lambda);
        if (k > 0) mirror.learn_weighted(data.X[i], data.y[i], k);
    }
    for (std::size_t i = 0; i < 300; ++i) {
        CHECK(forest.score(data.X[i]) == mirror.score(data.X[i]));
    }
}

TEST_CASE("forest reacts to drift with backgrounds and replacements") {
    auto data = switching_block(12000, 12000, 555);
    ArfConfig config;
    config.n_members = 5;
    AdaptiveRandomForest forest(config, 5, 3);
    for (std::size_t i = 0; i < data.X.size(); ++i) forest.learn_one(data.X[i], data.y[i]);
    CHECK(forest.replacement_count() >= 1);

    double late = 0.0;
    for (std::size_t i = 20000; i < 24000; ++i) {
        late += (forest.score(data.X[i]) > 0.5 ? 1 : 0) == data.y[i];
    }
    CHECK(late / 4000.0 > 0.8);
}

TEST_CASE("forced drift replaces the member and clears its background") {
    ArfConfig pair_config;
    pair_config.n_members = 2;
    AdaptiveRandomForest forest(pair_config, 4, 10);
    CHECK(forest.replacement_count() == 0);
    forest.force_member_drift(0);
    CHECK(forest.replacement_count() == 1);
    CHECK_FALSE(forest.has_background(0));
    CHECK_THROWS_AS(forest.force_member_drift(5), std::out_of_range);
    ArfConfig empty;
    empty.n_members = 0;
    CHECK_THROWS_AS(AdaptiveRandomForest(empty, 4, 1), std::invalid_argument);
}

TEST_CASE("undersampling keeps every positive and thins negatives") {
    auto counter = std::make_unique<CountingLearner>();
    CountingLearner* stats = counter.get();
    UndersampleWrapper wrap(std::move(counter), 0.25, 5);
    Rng rng(66);
    std::size_t sent_pos = 0, sent_neg = 0;
    for (int i = 0; i < 8000; ++i) {
        int y = rng.bernoulli(0.1);
        (y == 1 ? sent_pos : sent_neg) += 1;
        wrap.learn_one({0.0}, y);
    }
    CHECK(stats->positives == sent_pos);
    double kept = double(stats->negatives) / double(sent_neg);
    CHECK(kept == doctest::Approx(0.25).epsilon(0.1));

    CHECK_THROWS_AS(UndersampleWrapper(std::make_unique<CountingLearner>(), 0.0, 1),
                    std::invalid_argument);
    CHECK_THROWS_AS(UndersampleWrapper(std::make_unique<CountingLearner>(), 1.5, 1),
                    std::invalid_argument);
}

TEST_CASE("unit keep probability is a transparent wrapper") {
    auto data = sea_block(5000, 8.0, 0.1, 12);
    UndersampleWrapper wrapped(std::make_unique<HoeffdingTree>(HoeffdingTreeConfig{}, 3), 1.0,
                               77);
    HoeffdingTree bare(HoeffdingTreeConfig{}, 3);
    for (std::size_t i = 0; i < data.X.size(); ++i) {
        wrapped.learn_one(data.X[i], data.y[i]);
        bare.learn_one(data.X[i], data.y[i]);
    }
    for (std::size_t i = 0; i < 200; ++i) {
        CHECK(wrapped.score(data.X[i]) == bare.score(data.X[i]));
    }
}

TEST_CASE("every learner emits probabilities inside the unit interval") {
    auto data = switching_block(3000, 3000, 999);
    HoeffdingTree ht(HoeffdingTreeConfig{}, 5);
    HoeffdingTreeConfig hat_config;
    hat_config.adaptive = true;
    HoeffdingTree hat(hat_config, 5);
    OnlineLogistic lr(OnlineLogisticConfig{}, 5);
    ArfConfig arf_config;
    arf_config.n_members = 3;
    AdaptiveRandomForest arf(arf_config, 5, 1);
    LeveragingBaggingConfig lb_config;
    lb_config.n_members = 3;
    LeveragingBagging lb(
        lb_config,
        [](std::uint64_t s) {
            return std::make_unique<HoeffdingTree>(HoeffdingTreeConfig{}, 5, s);
        },
        2);

    std::vector<IncrementalLearner*> all = {&ht, &hat, &lr, &arf, &lb};
    for (std::size_t i = 0; i < data.X.size(); ++i) {
        for (auto* m : all) {
            double p = m->score(data.X[i]);
            CHECK(p >= 0.0);
            CHECK(p <= 1.0);
            m->learn_one(data.X[i], data.y[i]);
        }
    }
}
