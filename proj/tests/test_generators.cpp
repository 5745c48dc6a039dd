#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "delaybench/generators.hpp"
#include "delaybench/rng.hpp"

using namespace delaybench;

namespace {

double minority_rate(StreamGenerator& gen, std::size_t n) {
    std::size_t positives = 0;
    for (std::size_t i = 0; i < n; ++i) positives += std::size_t(gen.next().label);
    double p = double(positives) / double(n);
    return std::min(p, 1.0 - p);
}

std::array<double, 9> attrs_of(const Instance& x) {
    std::array<double, 9> a{};
    std::copy(x.features.begin(), x.features.end(), a.begin());
    return a;
}

struct TempCsv {
    std::filesystem::path path;
    explicit TempCsv(const std::string& content) {
        path = std::filesystem::temp_directory_path() /
               ("delaybench_csv_" + std::to_string(std::rand()) + ".csv");
        std::ofstream out(path);
        out << content;
    }
    ~TempCsv() { std::error_code ec; std::filesystem::remove(path, ec); }
};

}  // namespace

TEST_CASE("gradual mix follows the logistic curve") {
    CHECK(gradual_mix(1000, 1000, 400) == doctest::Approx(0.5));
    CHECK(gradual_mix(62500, 50000, 50000) == doctest::Approx(0.7311).epsilon(1e-3));
    CHECK(gradual_mix(0, 500000, 50000) < 1e-9);
    double prev = -1.0;
    for (std::uint64_t t = 0; t <= 2000; t += 50) {
        double p = gradual_mix(t, 1000, 400);
        CHECK(p >= prev);
        prev = p;
    }
}

TEST_CASE("drift schedules resolve segments and gradual odds") {
    auto abrupt = DriftSchedule::abrupt({1000, 2000});
    Rng rng(1);
    CHECK(abrupt.segment(0) == 0);
    CHECK(abrupt.segment(999) == 0);
    CHECK(abrupt.segment(1000) == 1);
    CHECK(abrupt.segment(2000) == 2);
    CHECK(abrupt.concept_at(999, rng) == 0);
    CHECK(abrupt.concept_at(1000, rng) == 1);

    auto gradual = DriftSchedule::gradual({1000}, 400);
    auto frequency_new = [&](std::uint64_t t) {
        std::size_t hits = 0;
        for (int i = 0; i < 20000; ++i) hits += gradual.concept_at(t, rng) == 1;
        return double(hits) / 20000.0;
    };
    CHECK(frequency_new(1000) == doctest::Approx(0.5).epsilon(0.05));
    CHECK(frequency_new(800) == doctest::Approx(gradual_mix(800, 1000, 400)).epsilon(0.1));
    CHECK(frequency_new(0) < 0.001);
    CHECK(frequency_new(10000) > 0.999);

    CHECK_THROWS_AS(DriftSchedule::abrupt({5, 5}), std::invalid_argument);
    CHECK_THROWS_AS(DriftSchedule::gradual({5}, 0), std::invalid_argument);
}

TEST_CASE("agrawal rules evaluate the published branches") {
    std::array<double, 9> a{};
    a[2] = 35;  // age
    CHECK(AgrawalGenerator::group_a(1, a));
    a[2] = 45;
    CHECK_FALSE(AgrawalGenerator::group_a(1, a));
    a[2] = 65;
    CHECK(AgrawalGenerator::group_a(1, a));

    // Function 5 routes on salary then windows the loan.
    a[2] = 30;
    a[0] = 60000;
    a[8] = 150000;
    CHECK(AgrawalGenerator::group_a(5, a));
    a[8] = 350000;
    CHECK_FALSE(AgrawalGenerator::group_a(5, a));
    a[0] = 120000;
    a[8] = 350000;
    CHECK(AgrawalGenerator::group_a(5, a));

    CHECK_THROWS_AS(AgrawalGenerator::group_a(0, a), std::invalid_argument);
    CHECK_THROWS_AS(AgrawalGenerator::group_a(11, a), std::invalid_argument);
}

TEST_CASE("agrawal streams are reproducible and follow the active rule") {
    AgrawalConfig config;
    config.functions = {5, 1};
    config.schedule = DriftSchedule::abrupt({1000});
    AgrawalGenerator a(config, 99), b(config, 99);
    for (int i = 0; i < 100; ++i) {
        Instance xa = a.next(), xb = b.next();
        CHECK(xa.features == xb.features);
        CHECK(xa.label == xb.label);
    }

    AgrawalGenerator g(config, 7);
    for (std::uint64_t t = 0; t < 2000; ++t) {
        Instance x = g.next();
        int rule = t < 1000 ? 5 : 1;
        CHECK(x.label == int(AgrawalGenerator::group_a(rule, attrs_of(x))));
    }
}

TEST_CASE("agrawal attribute ranges match the generator's definitions") {
    AgrawalConfig config;
    config.functions = {1};
    AgrawalGenerator g(config, 3);
    for (int i = 0; i < 5000; ++i) {
        Instance x = g.next();
        REQUIRE(x.features.size() == 9);
        CHECK(x.features[0] >= 20000);  // salary
        CHECK(x.features[0] < 150000);
        if (x.features[0] >= 75000) {
            CHECK(x.features[1] == 0.0);  // commission
        } else {
            CHECK(x.features[1] >= 10000);
        }
        CHECK(x.features[2] >= 20);  // age
        CHECK(x.features[2] <= 80);
        CHECK(x.features[3] <= 4);   // elevel
        CHECK(x.features[4] >= 1);   // car
        CHECK(x.features[4] <= 20);
        CHECK(x.features[5] <= 8);   // zipcode
        double hvalue_base = (9.0 - x.features[5]) * 100000.0;
        CHECK(x.features[6] >= 0.5 * hvalue_base);  // hvalue
        CHECK(x.features[6] < 1.5 * hvalue_base);
        CHECK(x.features[7] >= 1);   // hyears
        CHECK(x.features[7] <= 30);
        CHECK(x.features[8] <= 500000);  // loan
    }
}

TEST_CASE("sea labels follow the threshold rule") {
    CHECK(SeaGenerator::sea_label(3, 4, 8));
    CHECK_FALSE(SeaGenerator::sea_label(5, 5, 9.5));

    SeaConfig config;
    config.thetas = {8.0, 9.0};
    config.noise = 0.0;
    config.schedule = DriftSchedule::abrupt({2000});
    SeaGenerator g(config, 21);
    for (std::uint64_t t = 0; t < 4000; ++t) {
        Instance x = g.next();
        double theta = t < 2000 ? 8.0 : 9.0;
        CHECK(x.label == int(SeaGenerator::sea_label(x.features[0], x.features[1], theta)));
        for (double f : x.features) {
            CHECK(f >= 0.0);
            CHECK(f < 10.0);
        }
    }
}

TEST_CASE("hyperplane rule, tie handling, and stationary weights") {
    HyperplaneConfig config;
    config.n_drift = 0;
    config.magnitude = 0.0;
    config.noise = 0.0;
    HyperplaneGenerator g(config, 5);
    auto w0 = g.weights();
    for (int i = 0; i < 2000; ++i) {
        Instance x = g.next();
        double sum = 0.0, wsum = 0.0;
        for (std::size_t j = 0; j < w0.size(); ++j) {
            sum += w0[j] * x.features[j];
            wsum += w0[j];
        }
        CHECK(x.label == int(sum > 0.5 * wsum));
    }
    CHECK(g.weights() == w0);

    HyperplaneConfig drifting;
    drifting.magnitude = 0.001;
    HyperplaneGenerator d(drifting, 5);
    auto before = d.weights();
    for (int i = 0; i < 1000; ++i) d.next();
    CHECK(d.weights() != before);
}

TEST_CASE("long-run minority rates sit in the documented bands") {
    // The drifting mixtures have known class-1 rates: the loan rule
    // accepts 40%, the age rule 41 of 61 ages, the threshold rule
    // averages 35.5% before 10% label flips, the hyperplane splits
    // its own mass evenly.
    AgrawalConfig agr;
    agr.schedule = DriftSchedule::abrupt({250000, 500000, 750000});
    AgrawalGenerator a(agr, 1234);
    CHECK(minority_rate(a, 1000000) == doctest::Approx(0.4717).epsilon(0.022));

    SeaConfig sea;
    sea.schedule = DriftSchedule::abrupt({250000, 500000, 750000});
    SeaGenerator s(sea, 1234);
    CHECK(minority_rate(s, 1000000) == doctest::Approx(0.3843).epsilon(0.027));

    HyperplaneGenerator h(HyperplaneConfig{}, 1234);
    CHECK(minority_rate(h, 1000000) == doctest::Approx(0.50).epsilon(0.02));
}

TEST_CASE("rare event stream hits its positive rate and reproduces") {
    RareEventConfig config;
    config.positive_rate = 0.001;
    config.schedule = DriftSchedule::abrupt({500000});
    RareEventGenerator g(config, 11);
    std::size_t positives = 0;
    for (int i = 0; i < 1000000; ++i) positives += std::size_t(g.next().label);
    double rate = double(positives) / 1e6;
    CHECK(rate == doctest::Approx(0.001).epsilon(0.2));

    RareEventGenerator r1(config, 42), r2(config, 42);
    for (int i = 0; i < 200; ++i) {
        Instance x1 = r1.next(), x2 = r2.next();
        CHECK(x1.features == x2.features);
        CHECK(x1.label == x2.label);
    }

    RareEventConfig balanced;
    balanced.positive_rate = 0.5;
    RareEventGenerator b(balanced, 11);
    double minority = minority_rate(b, 100000);
    CHECK(minority > 0.49);

    RareEventConfig bad;
    bad.positive_rate = 0.6;
    CHECK_THROWS_AS(RareEventGenerator(bad, 1), std::invalid_argument);
}

TEST_CASE("rare event drift moves the feature geometry, not the rate") {
    RareEventConfig config;
    config.positive_rate = 0.4;
    config.n_features = 6;
    config.schedule = DriftSchedule::abrupt({20000});
    RareEventGenerator g(config, 8);

    // Mean feature vector of positives before and after the change.
    std::vector<double> before(6, 0.0), after(6, 0.0);
    std::size_t nb = 0, na = 0;
    for (int i = 0; i < 40000; ++i) {
        Instance x = g.next();
        if (x.label != 1) continue;
        auto& acc = x.id < 20000 ? before : after;
        (x.id < 20000 ? nb : na) += 1;
        for (int j = 0; j < 6; ++j) acc[j] += x.features[j];
    }
    REQUIRE(nb > 1000);
    REQUIRE(na > 1000);
    double moved = 0.0;
    for (int j = 0; j < 6; ++j) {
        moved += std::abs(before[j] / double(nb) - after[j] / double(na));
    }
    CHECK(moved > 0.5);
}

TEST_CASE("csv replay parses well-formed files") {
    TempCsv file("f0,f1,label\n1.5,2.5,0\n-3.25,0,1\n7,8,0\n");
    CsvStream s = csv_replay(file.path.string());
    CHECK_FALSE(s.has_delays);
    CHECK(s.n_features == 2);
    REQUIRE(s.instances.size() == 3);
    CHECK(s.instances[0].id == 0);
    CHECK(s.instances[2].id == 2);
    CHECK(s.instances[1].features == std::vector<double>{-3.25, 0.0});
    CHECK(s.instances[1].label == 1);
}

TEST_CASE("csv replay passes the delay column through") {
    TempCsv file("f0,label,delay\n1,0,5\n2,1,0\n");
    CsvStream s = csv_replay(file.path.string());
    CHECK(s.has_delays);
    CHECK(s.delays == std::vector<std::int64_t>{5, 0});
}

TEST_CASE("csv replay reports malformed input with its line") {
    TempCsv text("f0,f1,label\n1.5,oops,0\n");
    CHECK_THROWS_WITH_AS(csv_replay(text.path.string()),
                         doctest::Contains("line 2"), std::runtime_error);

    TempCsv label("f0,label\n1,2\n");
    CHECK_THROWS_AS(csv_replay(label.path.string()), std::runtime_error);

    TempCsv header("a,b,label\n1,2,0\n");
    CHECK_THROWS_AS(csv_replay(header.path.string()), std::runtime_error);

    TempCsv delay("f0,label,delay\n1,0,-2\n");
    CHECK_THROWS_AS(csv_replay(delay.path.string()), std::runtime_error);

    TempCsv width("f0,f1,label\n1,2\n");
    CHECK_THROWS_WITH_AS(csv_replay(width.path.string()),
                         doctest::Contains("line 2"), std::runtime_error);

    CHECK_THROWS_AS(csv_replay("/no/such/file.csv"), std::runtime_error);
}
