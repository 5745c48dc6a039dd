#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "delaybench/model.hpp"

namespace delaybench {

// Shared shape for anything a chunk strategy can hold: fitted once,
// scored many times.
class BatchModel {
  public:
    virtual ~BatchModel() = default;
    virtual double predict(const std::vector<double>& x) const = 0;
};

struct CartConfig {
    std::size_t max_depth = 6;
    std::size_t min_samples_leaf = 5;
};

// Plain greedy CART for binary classification. Gini impurity, midpoint
// thresholds, no pruning. A zero-gain split is still taken on an
// impure node, the classic behaviour that lets the tree carve XOR-like
// patterns out in two levels.
class CartTree : public BatchModel {
  public:
    static CartTree fit(const std::vector<std::vector<double>>& X, const std::vector<int>& y,
                        const CartConfig& config);

    double predict(const std::vector<double>& x) const override;

    std::size_t depth() const;
    std::size_t node_count() const { return nodes_.size(); }
    // Feature and threshold at the root, empty for a leaf-only tree.
    std::optional<std::pair<std::size_t, double>> root_split() const;

  private:
    struct Node {
        int feature = -1;  // -1 marks a leaf
        double threshold = 0.0;
        double prob = 0.5;
        int left = -1;
        int right = -1;
    };
    std::vector<Node> nodes_;
    std::size_t n_features_ = 0;

    int build(const std::vector<std::vector<double>>& X, const std::vector<int>& y,
              std::vector<std::size_t>& indices, std::size_t depth, const CartConfig& config);
};

struct GbdtConfig {
    double learning_rate = 0.1;
    std::size_t max_depth = 6;
    std::size_t max_trees = 100;
    std::size_t patience = 5;
    double l2 = 1.0;
    std::size_t min_samples_leaf = 20;
    std::size_t n_bins = 256;
};

// Histogram gradient boosting on logistic loss. Features are quantile
// binned per fit, trees are grown greedily on (gradient, hessian)
// histograms and leaves take the Newton step -G/(H + lambda). Fitting
// watches validation log loss and truncates back to the best round.
class Gbdt : public BatchModel {
  public:
    static Gbdt fit(const std::vector<std::vector<double>>& X_train, const std::vector<int>& y_train,
                    const std::vector<std::vector<double>>& X_val, const std::vector<int>& y_val,
                    const GbdtConfig& config);

    double predict(const std::vector<double>& x) const override;
    double raw_score(const std::vector<double>& x) const;

    std::size_t tree_count() const { return trees_.size(); }
    const std::vector<double>& train_loss_curve() const { return train_loss_curve_; }

  private:
    struct Node {
        int feature = -1;
        double threshold = 0.0;  // raw-value threshold, go left if x <= t
        double value = 0.0;      // leaf weight
        int left = -1;
        int right = -1;
    };
    struct Tree {
        std::vector<Node> nodes;
    };

    GbdtConfig config_;
    std::size_t n_features_ = 0;
    double base_score_ = 0.0;
    std::vector<Tree> trees_;
    std::vector<double> train_loss_curve_;

    double tree_output(const Tree& tree, const std::vector<double>& x) const;
};

struct BatchLinearConfig {
    double learning_rate = 0.5;
    std::size_t epochs = 200;
    double l2 = 0.0;
};

// Full-batch logistic regression with standardization frozen at fit
// time, so later fine-tuning passes see the same coordinate system.
class BatchLinear : public BatchModel {
  public:
    static BatchLinear fit(const std::vector<std::vector<double>>& X, const std::vector<int>& y,
                           const BatchLinearConfig& config);

    double predict(const std::vector<double>& x) const override;

    // One full gradient pass per call at the given rate.
    void finetune(const std::vector<std::vector<double>>& X, const std::vector<int>& y,
                  double rate, std::size_t passes = 1);

    const std::vector<double>& weights() const { return weights_; }

  private:
    BatchLinearConfig config_;
    std::size_t n_features_ = 0;
    std::vector<double> weights_;
    double bias_ = 0.0;
    std::vector<double> mean_;
    std::vector<double> scale_;

    void gradient_pass(const std::vector<std::vector<double>>& X, const std::vector<int>& y,
                       double rate);
    double margin(const std::vector<double>& x) const;
};

// Learning-rate schedule used by the fine-tuning strategy.
double finetune_rate(double eta0, double gamma, std::size_t t);

}  // namespace delaybench
