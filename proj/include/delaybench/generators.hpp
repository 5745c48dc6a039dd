#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "delaybench/rng.hpp"
#include "delaybench/stream.hpp"

namespace delaybench {

// Probability of drawing the post-change concept at time t for a
// change point t0 and transition window w: the logistic curve
// sigma(4 (t - t0) / w), 0.5 at the change point itself.
double gradual_mix(std::uint64_t t, std::uint64_t t0, std::uint64_t w);

enum class DriftKind { abrupt, gradual };

// Positions of concept changes along the stream. Concept k is active
// on segment k; under gradual drift the two concepts around the
// nearest change point are mixed with gradual_mix odds.
struct DriftSchedule {
    std::vector<std::uint64_t> change_points;
    DriftKind kind = DriftKind::abrupt;
    std::uint64_t window = 50000;

    static DriftSchedule stationary();
    static DriftSchedule abrupt(std::vector<std::uint64_t> points);
    static DriftSchedule gradual(std::vector<std::uint64_t> points, std::uint64_t window);

    std::size_t n_concepts() const { return change_points.size() + 1; }
    // Concept index ignoring any gradual mixing.
    std::size_t segment(std::uint64_t t) const;
    // Concept index at t; consumes one draw only in gradual mode.
    std::size_t concept_at(std::uint64_t t, Rng& rng) const;
};

class StreamGenerator {
  public:
    virtual ~StreamGenerator() = default;
    virtual Instance next() = 0;
    virtual std::size_t n_features() const = 0;
};

// The classic loan-approval generator: nine attributes, ten published
// classification rules, class 1 for "group A".
struct AgrawalConfig {
    std::vector<int> functions = {5, 1, 5, 1};
    DriftSchedule schedule;
};

class AgrawalGenerator : public StreamGenerator {
  public:
    AgrawalGenerator(AgrawalConfig config, std::uint64_t seed);
    Instance next() override;
    std::size_t n_features() const override { return 9; }

    // Attribute order: salary, commission, age, elevel, car, zipcode,
    // hvalue, hyears, loan. Throws for function indices outside 1..10.
    static bool group_a(int function, const std::array<double, 9>& a);

  private:
    AgrawalConfig config_;
    Rng rng_;
    std::uint64_t t_ = 0;
};

// Three uniform features on [0,10]; class 1 when x1 + x2 <= theta,
// with label-flip noise applied afterwards.
struct SeaConfig {
    std::vector<double> thetas = {8.0, 9.0, 7.0, 9.5};
    double noise = 0.1;
    DriftSchedule schedule;
};

class SeaGenerator : public StreamGenerator {
  public:
    SeaGenerator(SeaConfig config, std::uint64_t seed);
    Instance next() override;
    std::size_t n_features() const override { return 3; }

    static bool sea_label(double x1, double x2, double theta) { return x1 + x2 <= theta; }

  private:
    SeaConfig config_;
    Rng rng_;
    std::uint64_t t_ = 0;
};

// Rotating-hyperplane stream with incremental drift: a subset of
// weights moves a fixed step per instance and occasionally reverses
// direction. Class 1 strictly above the hyperplane, ties to class 0.
struct HyperplaneConfig {
    std::size_t n_features = 10;
    std::size_t n_drift = 2;
    double magnitude = 0.001;
    double reversal_prob = 0.1;
    double noise = 0.05;
};

class HyperplaneGenerator : public StreamGenerator {
  public:
    HyperplaneGenerator(HyperplaneConfig config, std::uint64_t seed);
    Instance next() override;
    std::size_t n_features() const override { return config_.n_features; }

    const std::vector<double>& weights() const { return weights_; }

  private:
    HyperplaneConfig config_;
    Rng rng_;
    std::vector<double> weights_;
    std::vector<double> directions_;
    std::uint64_t t_ = 0;
};

// Heavily imbalanced stream: rare positives drawn at a fixed rate,
// features from class-conditional Gaussian mixtures whose coordinates
// are permuted at each concept change.
struct RareEventConfig {
    double positive_rate = 0.005;
    std::size_t n_features = 12;
    std::size_t n_components = 2;
    double separation = 2.0;
    DriftSchedule schedule;
};

class RareEventGenerator : public StreamGenerator {
  public:
    RareEventGenerator(RareEventConfig config, std::uint64_t seed);
    Instance next() override;
    std::size_t n_features() const override { return config_.n_features; }

  private:
    RareEventConfig config_;
    Rng rng_;
    // component_means_[class][component] in base coordinate order.
    std::array<std::vector<std::vector<double>>, 2> component_means_;
    // One coordinate permutation per concept.
    std::vector<std::vector<std::size_t>> permutations_;
    std::uint64_t t_ = 0;
};

// A recorded stream loaded from disk. Header `f0,...,f{p-1},label`
// with an optional trailing `delay` column that overrides the delay
// model verbatim.
struct CsvStream {
    std::vector<Instance> instances;
    std::vector<std::int64_t> delays;
    bool has_delays = false;
    std::size_t n_features = 0;
};

CsvStream csv_replay(const std::string& path);

}  // namespace delaybench
