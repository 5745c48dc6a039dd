#include "delaybench/linear.hpp"

#include <cmath>
#include <stdexcept>

namespace delaybench {

OnlineLogistic::OnlineLogistic(OnlineLogisticConfig config, std::size_t n_features)
    : config_(config), n_features_(n_features) {
    if (n_features_ == 0) throw std::invalid_argument("model needs at least one feature");
    if (!(config_.learning_rate > 0.0)) {
        throw std::invalid_argument("learning rate must be positive");
    }
    if (!(config_.cost_positive > 0.0)) {
        throw std::invalid_argument("positive-class cost must be positive");
    }
    weights_.assign(n_features_, 0.0);
    mean_.assign(n_features_, 0.0);
    m2_.assign(n_features_, 0.0);
}

void OnlineLogistic::standardize(const std::vector<double>& x, std::vector<double>& z) const {
    z.resize(n_features_);
    for (std::size_t j = 0; j < n_features_; ++j) {
        double var = seen_ > 1.0 ? m2_[j] / seen_ : 1.0;
        double sd = var > 1e-12 ? std::sqrt(var) : 1.0;
        z[j] = (x[j] - mean_[j]) / sd;
    }
}

double OnlineLogistic::margin(const std::vector<double>& z) const {
    double m = bias_;
    for (std::size_t j = 0; j < n_features_; ++j) m += weights_[j] * z[j];
    return m;
}

double OnlineLogistic::score(const std::vector<double>& x) {
    if (x.size() != n_features_) {
        throw std::invalid_argument("instance dimension does not match the model");
    }
    std::vector<double> z;
    standardize(x, z);
    return 1.0 / (1.0 + std::exp(-margin(z)));
}

void OnlineLogistic::learn_one(const std::vector<double>& x, int y) {
    if (x.size() != n_features_) {
        throw std::invalid_argument("instance dimension does not match the model");
    }
    if (y != 0 && y != 1) throw std::invalid_argument("labels must be 0 or 1");
    for (double v : x) {
        if (!std::isfinite(v)) throw std::invalid_argument("non-finite feature value");
    }

    // Fold the observation into the running moments first, then step.
    seen_ += 1.0;
    for (std::size_t j = 0; j < n_features_; ++j) {
        double d = x[j] - mean_[j];
        mean_[j] += d / seen_;
        m2_[j] += d * (x[j] - mean_[j]);
    }

    std::vector<double> z;
    standardize(x, z);
    double p = 1.0 / (1.0 + std::exp(-margin(z)));
    double g = p - double(y);
    if (y == 1) g *= config_.cost_positive;
    double lr = config_.learning_rate;
    for (std::size_t j = 0; j < n_features_; ++j) {
        weights_[j] -= lr * (g * z[j] + config_.l2 * weights_[j]);
    }
    bias_ -= lr * g;
}

}  // namespace delaybench
