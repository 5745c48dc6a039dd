#pragma once

#include <cstdint>
#include <vector>

#include "delaybench/model.hpp"

namespace delaybench {

struct OnlineLogisticConfig {
    double learning_rate = 0.05;
    double l2 = 0.0;
    // Gradient scale of positive examples, the usual cost-sensitive
    // knob for heavy imbalance. 1 is plain logistic SGD.
    double cost_positive = 1.0;
};

// Logistic regression trained by SGD on standardized inputs. Feature
// means and variances are tracked online and updated only on learning
// steps, so scoring is side-effect free.
class OnlineLogistic : public IncrementalLearner {
  public:
    OnlineLogistic(OnlineLogisticConfig config, std::size_t n_features);

    double score(const std::vector<double>& x) override;
    void learn_one(const std::vector<double>& x, int y) override;

    const std::vector<double>& weights() const { return weights_; }
    double bias() const { return bias_; }

  private:
    OnlineLogisticConfig config_;
    std::size_t n_features_;
    std::vector<double> weights_;
    double bias_ = 0.0;

    // Running moments for standardization.
    double seen_ = 0.0;
    std::vector<double> mean_;
    std::vector<double> m2_;

    void standardize(const std::vector<double>& x, std::vector<double>& z) const;
    double margin(const std::vector<double>& z) const;
};

}  // namespace delaybench
