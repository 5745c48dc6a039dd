#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "delaybench/metrics.hpp"
#include "delaybench/model.hpp"
#include "delaybench/rng.hpp"
#include "delaybench/stream.hpp"

namespace delaybench {

// The three buffers of the evaluation loop: features, first
// predictions, and labels, grouped into consecutive chunks of
// pre-drawn sizes. A chunk completes when the last of its labels
// lands; its data is then taken out and the store freed.
class ChunkLedger {
  public:
    ChunkLedger(std::vector<std::uint64_t> sizes, std::uint64_t n_instances);
    static ChunkLedger from_poisson(std::uint64_t n_instances, double mean, Rng& rng);

    std::size_t chunk_count() const { return chunks_.size(); }
    std::uint64_t chunk_of(std::uint64_t instance_id) const;
    const std::vector<std::uint64_t>& sizes() const { return sizes_; }

    void add_feature(std::uint64_t instance_id, std::vector<double> x, double prediction);
    // Returns the chunk id when this label was its last missing one.
    std::optional<std::uint64_t> add_label(std::uint64_t instance_id, int y);

    const std::vector<double>& feature_row(std::uint64_t instance_id) const;
    const std::vector<double>& predictions(std::uint64_t chunk_id) const;
    const std::vector<int>& labels(std::uint64_t chunk_id) const;

    // Moves the completed chunk's labeled data out and frees the
    // buffers.
    LabeledChunk consume(std::uint64_t chunk_id);

    // Conservation accounting: these three always sum to
    // instances_seen().
    std::size_t stored_unlabeled() const { return features_seen_ - labels_seen_; }
    std::size_t labeled_pending() const { return labels_seen_ - labeled_consumed_; }
    std::size_t labeled_consumed() const { return labeled_consumed_; }
    std::size_t instances_seen() const { return features_seen_; }

    // Feature rows currently held, across all chunks.
    std::size_t stored_feature_rows() const { return stored_rows_; }

  private:
    struct Chunk {
        std::uint64_t start = 0;
        std::uint64_t expected = 0;
        std::uint64_t received = 0;
        bool consumed = false;
        std::vector<std::vector<double>> X;
        std::vector<double> pred;
        std::vector<int> y;
        std::vector<std::uint8_t> has_feature;
        std::vector<std::uint8_t> has_label;
    };

    std::vector<std::uint64_t> sizes_;
    std::vector<std::uint64_t> starts_;  // prefix sums
    std::vector<Chunk> chunks_;
    std::uint64_t n_instances_ = 0;
    std::size_t features_seen_ = 0;
    std::size_t labels_seen_ = 0;
    std::size_t labeled_consumed_ = 0;
    std::size_t stored_rows_ = 0;

    Chunk& chunk_for(std::uint64_t instance_id, std::uint64_t* index);
};

struct ChunkReport {
    std::uint64_t chunk_id = 0;
    std::size_t n = 0;
    std::size_t positives = 0;
    std::string metric;
    std::optional<double> value;
    // Position in completion order; differs from chunk_id when labels
    // land out of order.
    std::size_t completion_index = 0;
    double predict_ms = 0.0;
    double train_ms = 0.0;
    double gc_ms = 0.0;
};

struct RunStats {
    std::uint64_t instances = 0;
    std::size_t peak_unlabeled = 0;
    std::size_t peak_retained_chunks = 0;
};

struct RunResult {
    std::vector<ChunkReport> reports;  // ascending chunk id
    RunStats stats;
};

// The evaluation loop: scores every feature arrival in real time,
// trains incremental learners on each label arrival, and on chunk
// completion computes the chunk metric, hands the labeled chunk to
// the model, and garbage collects the buffers. Timing is off by
// default so runs stay byte-reproducible.
RunResult run_stream(const std::vector<StreamEvent>& events, StreamModel& model,
                     ChunkLedger& ledger, MetricKind metric, bool timing = false);

}  // namespace delaybench
