#pragma once

#include <cstdint>
#include <memory>

#include "delaybench/rng.hpp"
#include "delaybench/stream.hpp"

namespace delaybench {

// Instances per unit of the stochastic delay factor: a factor of alpha
// means a Poisson delay with mean alpha * 10,000 instances.
inline constexpr double kDelayInstancesPerFactor = 10000.0;

// Per-instance label delay distribution. Class-conditional models
// dispatch on the true label and cannot nest further.
class DelayModel {
  public:
    enum class Mode { zero, poisson_factor, fixed, class_conditional };

    DelayModel() = default;

    static DelayModel zero();
    static DelayModel poisson_factor(double alpha);
    static DelayModel fixed(std::uint64_t instances);
    static DelayModel class_conditional(DelayModel positive, DelayModel negative);

    Mode mode() const { return mode_; }
    double alpha() const { return alpha_; }
    std::uint64_t fixed_delay() const { return fixed_; }
    const DelayModel& positive() const { return *positive_; }
    const DelayModel& negative() const { return *negative_; }

    // Draws the label delay of one instance, in instance ticks.
    std::uint64_t sample(const Instance& instance, Rng& rng) const;

  private:
    Mode mode_ = Mode::zero;
    double alpha_ = 0.0;
    std::uint64_t fixed_ = 0;
    std::shared_ptr<const DelayModel> positive_;
    std::shared_ptr<const DelayModel> negative_;
};

}  // namespace delaybench
