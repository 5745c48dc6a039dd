#pragma once

#include <cstdint>
#include <deque>
#include <vector>

namespace delaybench {

// Adaptive windowing change detector over values in [0,1]. The window
// is kept as an exponential histogram (at most five buckets per level,
// level l buckets covering 2^l values), every bucket boundary is
// tested as a split on each update, and the old side is dropped while
// the split statistic exceeds its confidence bound.
class Adwin {
  public:
    explicit Adwin(double delta);

    // Appends a value; returns true when the window shrank, i.e. the
    // detector saw a distribution change.
    bool update(double value);

    // Mean of the values currently kept in the window.
    double estimate() const;
    std::uint64_t width() const { return count_; }

  private:
    struct Bucket {
        double sum = 0.0;
    };

    double delta_;
    // levels_[l] holds level-l buckets, newest at the front.
    std::vector<std::deque<Bucket>> levels_;
    double sum_ = 0.0;
    std::uint64_t count_ = 0;
    std::uint64_t seen_ = 0;  // total values ever, drives delta/n

    void insert(double value);
    void compress();
    bool drop_while_cut();
    void drop_oldest_bucket();
};

}  // namespace delaybench
