#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <memory>
#include <stdexcept>
#include <vector>

#include "delaybench/generators.hpp"
#include "delaybench/harness.hpp"
#include "delaybench/hoeffding_tree.hpp"
#include "delaybench/linear.hpp"
#include "delaybench/metrics.hpp"
#include "delaybench/rng.hpp"
#include "delaybench/strategies.hpp"
#include "delaybench/tuner.hpp"

using namespace delaybench;

namespace {

std::vector<Instance> sea_instances(std::size_t n, std::uint64_t seed) {
    SeaConfig config;
    config.thetas = {8.0};
    SeaGenerator gen(config, seed);
    std::vector<Instance> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back(gen.next());
    return out;
}

// Instances whose first feature encodes their id, so a recording
// model can attribute calls without access to the loop internals.
std::vector<Instance> tagged_instances(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<Instance> out;
    for (std::size_t i = 0; i < n; ++i) {
        Instance inst;
        inst.id = i;
        inst.features = {double(i), rng.uniform01()};
        inst.label = rng.bernoulli(0.5);
        out.push_back(std::move(inst));
    }
    return out;
}

struct RecordedCall {
    char kind;  // 's' score, 'l' learn
    std::uint64_t id;
};

struct RecordingModel : IncrementalLearner {
    std::vector<RecordedCall> log;
    double score(const std::vector<double>& x) override {
        log.push_back({'s', std::uint64_t(x[0])});
        return 0.5;
    }
    void learn_one(const std::vector<double>& x, int) override {
        log.push_back({'l', std::uint64_t(x[0])});
    }
};

struct ConstantBatchModel : BatchModel {
    double value;
    explicit ConstantBatchModel(double v) : value(v) {}
    double predict(const std::vector<double>&) const override { return value; }
};

BatchFitter constant_fitter(double value) {
    return [value](const LabeledChunk&, const LabeledChunk&, std::uint64_t) {
        return std::make_unique<ConstantBatchModel>(value);
    };
}

}  // namespace

TEST_CASE("chunk assignment follows the drawn sizes") {
    ChunkLedger ledger({3, 2}, 5);
    CHECK(ledger.chunk_count() == 2);
    CHECK(ledger.chunk_of(0) == 0);
    CHECK(ledger.chunk_of(2) == 0);
    CHECK(ledger.chunk_of(3) == 1);
    CHECK(ledger.chunk_of(4) == 1);
    CHECK_THROWS_AS(ledger.chunk_of(5), std::out_of_range);
}

TEST_CASE("the last chunk truncates to the end of the stream") {
    ChunkLedger ledger({3, 3, 3}, 7);
    CHECK(ledger.chunk_count() == 3);
    CHECK(ledger.sizes() == std::vector<std::uint64_t>{3, 3, 1});
    CHECK_THROWS_AS(ChunkLedger({2, 2}, 5), std::invalid_argument);
    CHECK_THROWS_AS(ChunkLedger({0, 5}, 5), std::invalid_argument);
}

TEST_CASE("poisson chunk sizes are reproducible with the right mean") {
    Rng a(RunSeed{99}.substream_seed("chunking"));
    Rng b(RunSeed{99}.substream_seed("chunking"));
    ChunkLedger first = ChunkLedger::from_poisson(900000, 10000.0, a);
    ChunkLedger second = ChunkLedger::from_poisson(900000, 10000.0, b);
    CHECK(first.sizes() == second.sizes());
    REQUIRE(first.chunk_count() >= 85);

    double mean = 0.0;
    std::size_t full = first.chunk_count() - 1;  // last one is truncated
    for (std::size_t i = 0; i < full; ++i) mean += double(first.sizes()[i]);
    mean /= double(full);
    CHECK(std::abs(mean - 10000.0) < 350.0);
}

TEST_CASE("ledger accounting stays conserved under random delays") {
    auto instances = tagged_instances(2000, 404);
    Rng delay_rng(405);
    std::vector<std::int64_t> delays;
    for (std::size_t i = 0; i < instances.size(); ++i) {
        delays.push_back(std::int64_t(delay_rng.poisson(300.0)));
    }
    auto events = schedule_events(instances, delays);

    ChunkLedger ledger({250, 250, 250, 250, 250, 250, 250, 250}, 2000);
    for (const auto& event : events) {
        if (event.kind == EventKind::feature_arrival) {
            ledger.add_feature(event.instance_id, event.features, 0.5);
        } else {
            auto completed = ledger.add_label(event.instance_id, event.label);
            if (completed) ledger.consume(*completed);
        }
        CHECK(ledger.stored_unlabeled() + ledger.labeled_pending() +
                  ledger.labeled_consumed() ==
              ledger.instances_seen());
        CHECK(ledger.stored_feature_rows() ==
              ledger.stored_unlabeled() + ledger.labeled_pending());
    }
    CHECK(ledger.instances_seen() == 2000);
    CHECK(ledger.labeled_consumed() == 2000);
    CHECK(ledger.stored_feature_rows() == 0);
}

TEST_CASE("ledger fails fast on integrity violations") {
    ChunkLedger ledger({2, 2}, 4);
    ledger.add_feature(0, {1.0}, 0.5);
    CHECK_THROWS_AS(ledger.add_feature(0, {1.0}, 0.5), std::logic_error);
    CHECK_THROWS_AS(ledger.add_label(1, 1), std::logic_error);  // feature never arrived
    ledger.add_label(0, 1);
    CHECK_THROWS_AS(ledger.add_label(0, 0), std::logic_error);  // duplicate
    CHECK_THROWS_AS(ledger.add_label(0, 2), std::invalid_argument);
}

TEST_CASE("zero delay reproduces an interleaved test-then-train run") {
    auto instances = sea_instances(12000, 406);
    Rng chunk_rng(RunSeed{7}.substream_seed("chunking"));
    ChunkLedger ledger = ChunkLedger::from_poisson(instances.size(), 1000.0, chunk_rng);
    std::vector<std::uint64_t> sizes = ledger.sizes();

    std::vector<std::int64_t> delays(instances.size(), 0);
    auto events = schedule_events(instances, delays);
    HoeffdingTree streamed(HoeffdingTreeConfig{}, 3);
    RunResult result = run_stream(events, streamed, ledger, MetricKind::auc_roc);

    // Oracle: plain interleaved chunks with immediate labels.
    HoeffdingTree interleaved(HoeffdingTreeConfig{}, 3);
    std::vector<std::optional<double>> expected;
    std::vector<double> scores;
    std::vector<int> labels;
    std::size_t chunk_index = 0;
    for (const auto& inst : instances) {
        scores.push_back(interleaved.score(inst.features));
        labels.push_back(inst.label);
        interleaved.learn_one(inst.features, inst.label);
        if (scores.size() == sizes[chunk_index]) {
            expected.push_back(auc_roc(scores, labels));
            scores.clear();
            labels.clear();
            ++chunk_index;
        }
    }

    REQUIRE(result.reports.size() == expected.size());
    for (std::size_t i = 0; i < expected.size(); ++i) {
        CHECK(result.reports[i].chunk_id == i);
        CHECK(result.reports[i].completion_index == i);
        REQUIRE(result.reports[i].value.has_value() == expected[i].has_value());
        if (expected[i]) CHECK(*result.reports[i].value == *expected[i]);
    }
}

TEST_CASE("chunks complete out of order but report in id order") {
    auto instances = tagged_instances(6, 407);
    // First chunk's labels lag far behind the second chunk's.
    std::vector<std::int64_t> delays = {20, 20, 20, 0, 0, 0};
    auto events = schedule_events(instances, delays);
    ChunkLedger ledger({3, 3}, 6);
    RecordingModel model;
    RunResult result = run_stream(events, model, ledger, MetricKind::auc_roc);

    REQUIRE(result.reports.size() == 2);
    CHECK(result.reports[0].chunk_id == 0);
    CHECK(result.reports[0].completion_index == 1);
    CHECK(result.reports[1].chunk_id == 1);
    CHECK(result.reports[1].completion_index == 0);
}

TEST_CASE("labels are never observed before their scheduled event") {
    auto instances = tagged_instances(1500, 408);
    Rng delay_rng(409);
    std::vector<std::int64_t> delays;
    for (std::size_t i = 0; i < instances.size(); ++i) {
        delays.push_back(std::int64_t(delay_rng.poisson(200.0)));
    }
    auto events = schedule_events(instances, delays);
    ChunkLedger ledger({500, 500, 500}, 1500);
    RecordingModel model;
    run_stream(events, model, ledger, MetricKind::auc_roc);

    // The recorded call sequence must mirror the event sequence one
    // for one: a score per feature arrival, a learn per label arrival.
    REQUIRE(model.log.size() == events.size());
    for (std::size_t i = 0; i < events.size(); ++i) {
        char expected = events[i].kind == EventKind::feature_arrival ? 's' : 'l';
        CHECK(model.log[i].kind == expected);
        CHECK(model.log[i].id == events[i].instance_id);
    }
}

TEST_CASE("single-instance chunks yield undefined metrics but full reports") {
    auto instances = tagged_instances(4, 410);
    std::vector<std::int64_t> delays(4, 0);
    auto events = schedule_events(instances, delays);
    ChunkLedger ledger({1, 1, 1, 1}, 4);
    RecordingModel model;
    RunResult result = run_stream(events, model, ledger, MetricKind::auc_roc);
    REQUIRE(result.reports.size() == 4);
    for (const auto& report : result.reports) {
        CHECK(report.n == 1);
        CHECK_FALSE(report.value.has_value());
        CHECK(report.metric == std::string("AUCROC"));
    }
}

TEST_CASE("fixed delay keeps the unlabeled store at delay plus one") {
    auto instances = tagged_instances(400, 411);
    std::vector<std::int64_t> delays(400, 25);
    auto events = schedule_events(instances, delays);
    ChunkLedger ledger({100, 100, 100, 100}, 400);
    RecordingModel model;
    RunResult result = run_stream(events, model, ledger, MetricKind::auc_roc);
    CHECK(result.stats.peak_unlabeled == 26);
    CHECK(result.stats.instances == 400);
}

TEST_CASE("propagate retention peaks at its window size and frees the ledger") {
    auto instances = tagged_instances(3000, 412);
    std::vector<std::int64_t> delays(3000, 0);
    auto events = schedule_events(instances, delays);
    ChunkLedger ledger({300, 300, 300, 300, 300, 300, 300, 300, 300, 300}, 3000);

    StrategyConfig config;
    config.kind = StrategyKind::propagate;
    config.propagate_chunks = 3;
    ChunkStrategy strategy(config, constant_fitter(0.4), 3);
    RunResult result = run_stream(events, strategy, ledger, MetricKind::auc_roc);

    CHECK(result.stats.peak_retained_chunks == 3);
    CHECK(strategy.retained_labeled_chunks() == 3);
    CHECK(ledger.stored_feature_rows() == 0);
    CHECK(result.reports.size() == 10);
}

TEST_CASE("aucpr mode names its metric and handles positive-free chunks") {
    auto instances = tagged_instances(40, 413);
    for (std::size_t i = 0; i < 20; ++i) instances[i].label = 0;  // first chunk all negative
    std::vector<std::int64_t> delays(40, 0);
    auto events = schedule_events(instances, delays);
    ChunkLedger ledger({20, 20}, 40);
    RecordingModel model;
    RunResult result = run_stream(events, model, ledger, MetricKind::auc_pr);
    CHECK(result.reports[0].metric == std::string("AUCPR"));
    CHECK_FALSE(result.reports[0].value.has_value());
}

TEST_CASE("random search is reproducible and monotone in its budget") {
    Rng rng(414);
    LabeledChunk offline;
    offline.id = 0;
    for (int i = 0; i < 2000; ++i) {
        double a = rng.normal(), b = rng.normal();
        offline.X.push_back({a, b});
        offline.y.push_back(a > 0.0);
    }
    std::vector<ParamSpec> space = {{"learning_rate", 1e-3, 1.0, true, false}};
    TunedModelBuilder builder = [](const TrialConfig& config, std::uint64_t) {
        OnlineLogisticConfig lr_config;
        lr_config.learning_rate = config.at("learning_rate");
        return std::make_unique<OnlineLogistic>(lr_config, 2);
    };

    TuneResult one = tune_random_search(space, offline, 1, builder, 55);
    TuneResult ten = tune_random_search(space, offline, 10, builder, 55);
    CHECK(ten.best_score >= one.best_score);
    CHECK(ten.trial_scores[0] == one.trial_scores[0]);
    CHECK(ten.best_score > 0.9);

    TuneResult again = tune_random_search(space, offline, 10, builder, 55);
    CHECK(again.best.at("learning_rate") == ten.best.at("learning_rate"));
    CHECK(again.best_trial == ten.best_trial);

    CHECK_THROWS_AS(tune_random_search({}, offline, 5, builder, 1), std::invalid_argument);
    CHECK_THROWS_AS(tune_random_search(space, offline, 0, builder, 1), std::invalid_argument);
}

TEST_CASE("tied trials keep the earliest and integer ranges round") {
    Rng rng(415);
    LabeledChunk offline;
    for (int i = 0; i < 200; ++i) {
        offline.X.push_back({rng.uniform01()});
        offline.y.push_back(rng.bernoulli(0.5));
    }
    std::vector<ParamSpec> space = {{"depth", 1.0, 6.0, false, true}};
    struct Indifferent : IncrementalLearner {
        double score(const std::vector<double>&) override { return 0.5; }
        void learn_one(const std::vector<double>&, int) override {}
    };
    TunedModelBuilder builder = [](const TrialConfig&, std::uint64_t) {
        return std::make_unique<Indifferent>();
    };
    TuneResult result = tune_random_search(space, offline, 8, builder, 77);
    CHECK(result.best_trial == 0);
    for (double score : result.trial_scores) CHECK(score == doctest::Approx(0.5));
    // Integer dimensions come back integral and in range.
    CHECK(result.best.at("depth") == std::round(result.best.at("depth")));
    CHECK(result.best.at("depth") >= 1.0);
    CHECK(result.best.at("depth") <= 6.0);
}

TEST_CASE("batch models tune on a stratified validation cut") {
    Rng rng(417);
    LabeledChunk offline;
    offline.id = 0;
    for (int i = 0; i < 1200; ++i) {
        double a = rng.uniform01();
        offline.X.push_back({a, rng.uniform01()});
        offline.y.push_back(a > 0.6);
    }
    std::vector<ParamSpec> space = {{"trees", 5.0, 30.0, false, true}};
    TunedModelBuilder builder = [](const TrialConfig& config, std::uint64_t seed) {
        StrategyConfig strategy_config;
        strategy_config.kind = StrategyKind::retrain;
        std::size_t trees = std::size_t(config.at("trees"));
        BatchFitter fitter = [trees](const LabeledChunk& train, const LabeledChunk& val,
                                     std::uint64_t) -> std::unique_ptr<BatchModel> {
            GbdtConfig gbdt_config;
            gbdt_config.max_trees = trees;
            return std::make_unique<Gbdt>(
                Gbdt::fit(train.X, train.y, val.X, val.y, gbdt_config));
        };
        return std::make_unique<ChunkStrategy>(strategy_config, fitter, seed);
    };
    TuneResult result = tune_random_search(space, offline, 3, builder, 90);
    CHECK(result.best_score > 0.9);
}
