#pragma once

#include <cstdint>
#include <vector>

namespace delaybench {

// All labeled observations of one completed evaluation chunk, in
// stream order.
struct LabeledChunk {
    std::uint64_t id = 0;
    std::vector<std::vector<double>> X;
    std::vector<int> y;
};

// What the evaluation loop needs from any model: a real-time score per
// feature arrival plus one of two learning paths. Instance-incremental
// learners consume labels one by one; batch strategies ignore those
// and train when completed chunks are handed over.
class StreamModel {
  public:
    virtual ~StreamModel() = default;

    // Probability of class 1, always in [0,1].
    virtual double score(const std::vector<double>& x) = 0;

    virtual void observe_label(const std::vector<double>& x, int y) = 0;

    virtual bool uses_training_batches() const { return false; }

    // Completed evaluation chunk, delivered exactly once per chunk in
    // completion order.
    virtual void on_chunk_completed(LabeledChunk chunk) { (void)chunk; }

    // Labeled chunks the model still holds for future training.
    virtual std::size_t retained_labeled_chunks() const { return 0; }

    // Offline reserve fit before the stream starts.
    virtual void pretrain(const LabeledChunk& offline) {
        for (std::size_t i = 0; i < offline.X.size(); ++i) {
            observe_label(offline.X[i], offline.y[i]);
        }
    }
};

class IncrementalLearner : public StreamModel {
  public:
    void observe_label(const std::vector<double>& x, int y) final { learn_one(x, y); }

    virtual void learn_one(const std::vector<double>& x, int y) = 0;

    // Integer-weighted update; the default repeats the plain update.
    virtual void learn_weighted(const std::vector<double>& x, int y, std::uint64_t weight) {
        for (std::uint64_t k = 0; k < weight; ++k) learn_one(x, y);
    }
};

}  // namespace delaybench
