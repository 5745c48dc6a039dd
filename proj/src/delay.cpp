#include "delaybench/delay.hpp"

#include <cmath>
#include <stdexcept>

namespace delaybench {

DelayModel DelayModel::zero() {
    return DelayModel{};
}

DelayModel DelayModel::poisson_factor(double alpha) {
    if (!(alpha >= 0.0) || !std::isfinite(alpha)) {
        throw std::invalid_argument("delay factor must be finite and >= 0");
    }
    DelayModel m;
    m.mode_ = Mode::poisson_factor;
    m.alpha_ = alpha;
    return m;
}

DelayModel DelayModel::fixed(std::uint64_t instances) {
    DelayModel m;
    m.mode_ = Mode::fixed;
    m.fixed_ = instances;
    return m;
}

DelayModel DelayModel::class_conditional(DelayModel positive, DelayModel negative) {
    if (positive.mode_ == Mode::class_conditional || negative.mode_ == Mode::class_conditional) {
        throw std::invalid_argument("class-conditional delay branches cannot nest");
    }
    DelayModel m;
    m.mode_ = Mode::class_conditional;
    m.positive_ = std::make_shared<const DelayModel>(std::move(positive));
    m.negative_ = std::make_shared<const DelayModel>(std::move(negative));
    return m;
}

std::uint64_t DelayModel::sample(const Instance& instance, Rng& rng) const {
    switch (mode_) {
        case Mode::zero:
            return 0;
        case Mode::poisson_factor: {
            double mean = alpha_ * kDelayInstancesPerFactor;
            if (mean == 0.0) return 0;
            return rng.poisson(mean);
        }
        case Mode::fixed:
            return fixed_;
        case Mode::class_conditional:
            return (instance.label == 1 ? *positive_ : *negative_).sample(instance, rng);
    }
    throw std::logic_error("unreachable delay mode");
}

}  // namespace delaybench
