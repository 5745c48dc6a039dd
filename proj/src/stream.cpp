#include "delaybench/stream.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace delaybench {

std::vector<StreamEvent> schedule_events(std::vector<Instance> instances,
                                         const std::vector<std::int64_t>& delays) {
    if (instances.size() != delays.size()) {
        throw std::invalid_argument("schedule_events: instances and delays differ in length");
    }
    const std::size_t n = instances.size();
    for (std::size_t k = 0; k < n; ++k) {
        if (delays[k] < 0) {
            throw std::invalid_argument("schedule_events: negative delay at index " +
                                        std::to_string(k));
        }
        if (k > 0 && instances[k].id != instances[k - 1].id + 1) {
            throw std::invalid_argument("schedule_events: instance ids must be consecutive");
        }
    }

    // Label arrival times, sorted by (time, id). Feature arrivals are
    // already ordered since instance i arrives at time i.
    std::vector<std::pair<std::uint64_t, std::size_t>> label_order(n);
    for (std::size_t k = 0; k < n; ++k) {
        label_order[k] = {instances[k].id + static_cast<std::uint64_t>(delays[k]), k};
    }
    std::sort(label_order.begin(), label_order.end(),
              [&](const auto& a, const auto& b) {
                  if (a.first != b.first) return a.first < b.first;
                  return instances[a.second].id < instances[b.second].id;
              });

    std::vector<StreamEvent> events;
    events.reserve(2 * n);
    std::size_t li = 0;
    for (std::size_t k = 0; k < n; ++k) {
        const std::uint64_t feature_time = instances[k].id;
        // Labels strictly earlier than this feature arrival go first.
        while (li < n && label_order[li].first < feature_time) {
            const auto& inst = instances[label_order[li].second];
            events.push_back({EventKind::label_arrival, inst.id, label_order[li].first,
                              {}, inst.label});
            ++li;
        }
        events.push_back({EventKind::feature_arrival, instances[k].id, feature_time,
                          std::move(instances[k].features), -1});
    }
    while (li < n) {
        const auto& inst = instances[label_order[li].second];
        events.push_back({EventKind::label_arrival, inst.id, label_order[li].first,
                          {}, inst.label});
        ++li;
    }
    return events;
}

}  // namespace delaybench
