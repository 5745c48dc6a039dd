#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "delaybench/adwin.hpp"
#include "delaybench/model.hpp"
#include "delaybench/rng.hpp"

namespace delaybench {

struct HoeffdingTreeConfig {
    std::size_t grace_period = 200;
    double split_confidence = 1e-7;
    double tie_threshold = 0.05;
    std::size_t max_depth = 6;
    std::size_t n_bins = 32;
    // Per-leaf random feature subset; 0 tracks every feature.
    std::size_t mask_size = 0;
    // Adaptive mode: ADWIN per internal node, alternate subtrees grown
    // on detected drift and swapped in when significantly better.
    bool adaptive = false;
    double adwin_delta = 0.002;
    double swap_confidence = 0.05;
};

// Incremental decision tree with Hoeffding-bound split decisions,
// equal-frequency binned numeric statistics, and adaptive leaves that
// pick majority-class or naive-Bayes prediction by tracked error.
class HoeffdingTree : public IncrementalLearner {
  public:
    HoeffdingTree(HoeffdingTreeConfig config, std::size_t n_features, std::uint64_t seed = 0);
    ~HoeffdingTree() override;
    HoeffdingTree(HoeffdingTree&&) noexcept;
    HoeffdingTree& operator=(HoeffdingTree&&) noexcept;

    double score(const std::vector<double>& x) override;
    void learn_one(const std::vector<double>& x, int y) override;
    void learn_weighted(const std::vector<double>& x, int y, std::uint64_t weight) override;

    // Main-structure shape, for tests and instrumentation.
    std::size_t node_count() const;
    std::size_t height() const;
    std::size_t alternate_count() const;

    struct Node;

  private:
    HoeffdingTreeConfig config_;
    std::size_t n_features_;
    Rng rng_;
    std::unique_ptr<Node> root_;

    std::unique_ptr<Node> make_leaf(std::size_t depth,
                                    const std::array<double, 2>& seed_mass);
    void learn_in(Node& node, const std::vector<double>& x, int y, double weight,
                  int final_error, bool allow_alternates);
    void leaf_update(Node& leaf, const std::vector<double>& x, int y, double weight);
    void try_split(Node& leaf);
    const Node& route(const std::vector<double>& x) const;
    void check_dimension(const std::vector<double>& x) const;
};

// The Hoeffding bound for a statistic of range r at confidence delta
// after n observations.
double hoeffding_bound(double r, double delta, double n);

}  // namespace delaybench
