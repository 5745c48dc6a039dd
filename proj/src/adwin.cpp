#include "delaybench/adwin.hpp"

#include <cmath>
#include <stdexcept>

namespace delaybench {

namespace {
constexpr std::size_t kMaxBucketsPerLevel = 5;
}

Adwin::Adwin(double delta) : delta_(delta) {
    if (!(delta > 0.0) || !(delta < 1.0)) {
        throw std::invalid_argument("adwin confidence must be in (0,1)");
    }
}

void Adwin::insert(double value) {
    if (levels_.empty()) levels_.emplace_back();
    levels_[0].push_front(Bucket{value});
    sum_ += value;
    ++count_;
    ++seen_;
    compress();
}

void Adwin::compress() {
    for (std::size_t l = 0; l < levels_.size(); ++l) {
        if (levels_[l].size() <= kMaxBucketsPerLevel) break;
        // Merge the two oldest buckets of this level into the next.
        Bucket a = levels_[l].back();
        levels_[l].pop_back();
        Bucket b = levels_[l].back();
        levels_[l].pop_back();
        if (l + 1 == levels_.size()) levels_.emplace_back();
        levels_[l + 1].push_front(Bucket{a.sum + b.sum});
    }
}

void Adwin::drop_oldest_bucket() {
    for (std::size_t l = levels_.size(); l-- > 0;) {
        if (levels_[l].empty()) continue;
        Bucket oldest = levels_[l].back();
        levels_[l].pop_back();
        sum_ -= oldest.sum;
        count_ -= std::uint64_t(1) << l;
        return;
    }
}

bool Adwin::drop_while_cut() {
    bool shrunk = false;
    bool again = true;
    while (again && count_ >= 2) {
        again = false;
        double delta_n = delta_ / double(seen_);
        double log_term = std::log(4.0 / delta_n);

        // Walk boundaries from the oldest bucket towards the newest,
        // keeping the running statistics of the old side.
        double sum0 = 0.0;
        std::uint64_t n0 = 0;
        for (std::size_t l = levels_.size(); l-- > 0 && !again;) {
            const auto& row = levels_[l];
            for (std::size_t i = row.size(); i-- > 0;) {
                sum0 += row[i].sum;
                n0 += std::uint64_t(1) << l;
                std::uint64_t n1 = count_ - n0;
                if (n1 == 0) break;
                double mean0 = sum0 / double(n0);
                double mean1 = (sum_ - sum0) / double(n1);
                double m_harm = 1.0 / (1.0 / double(n0) + 1.0 / double(n1));
                double eps = std::sqrt(log_term / (2.0 * m_harm));
                if (std::fabs(mean0 - mean1) >= eps) {
                    drop_oldest_bucket();
                    shrunk = true;
                    again = true;
                    break;
                }
            }
        }
    }
    return shrunk;
}

bool Adwin::update(double value) {
    if (!(value >= 0.0) || !(value <= 1.0)) {
        throw std::invalid_argument("adwin values must lie in [0,1]");
    }
    insert(value);
    return drop_while_cut();
}

double Adwin::estimate() const {
    return count_ == 0 ? 0.0 : sum_ / double(count_);
}

}  // namespace delaybench
