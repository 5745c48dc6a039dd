#pragma once

#include <cstdint>
#include <vector>

namespace delaybench {

// One observation of the stream. The label is carried here for
// bookkeeping but is only revealed to learners by its label event.
struct Instance {
    std::uint64_t id = 0;
    std::vector<double> features;
    int label = 0;
};

enum class EventKind { feature_arrival, label_arrival };

// Feature events carry the feature vector, label events the label.
// Times are in instance-index units: instance i arrives at time i and
// its label at time i + delay.
struct StreamEvent {
    EventKind kind = EventKind::feature_arrival;
    std::uint64_t instance_id = 0;
    std::uint64_t time = 0;
    std::vector<double> features;
    int label = -1;
};

// Interleaves feature and label arrivals into one time-ordered event
// sequence. delays[k] is the label delay of instances[k]. At equal
// times the feature arrival comes first and simultaneous label
// arrivals are ordered by ascending instance id, so a zero-delay label
// lands immediately after its own feature and before the next one.
//
// Instance ids must be consecutive; negative delays are rejected.
std::vector<StreamEvent> schedule_events(std::vector<Instance> instances,
                                         const std::vector<std::int64_t>& delays);

}  // namespace delaybench
