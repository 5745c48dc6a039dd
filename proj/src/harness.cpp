#include "delaybench/harness.hpp"

#include <algorithm>
#include <chrono>
#include <stdexcept>

namespace delaybench {

ChunkLedger::ChunkLedger(std::vector<std::uint64_t> sizes, std::uint64_t n_instances)
    : sizes_(std::move(sizes)), n_instances_(n_instances) {
    if (n_instances_ == 0) throw std::invalid_argument("ledger needs at least one instance");
    std::uint64_t covered = 0;
    for (std::size_t i = 0; i < sizes_.size(); ++i) {
        if (sizes_[i] == 0) throw std::invalid_argument("chunk sizes must be positive");
        if (covered >= n_instances_) {
            sizes_.resize(i);
            break;
        }
        if (covered + sizes_[i] > n_instances_) {
            sizes_[i] = n_instances_ - covered;  // stream ends mid-chunk
            sizes_.resize(i + 1);
        }
        covered += sizes_[i];
    }
    covered = 0;
    for (std::uint64_t size : sizes_) covered += size;
    if (covered != n_instances_) {
        throw std::invalid_argument("chunk sizes do not cover the stream");
    }
    chunks_.resize(sizes_.size());
    starts_.resize(sizes_.size());
    std::uint64_t start = 0;
    for (std::size_t i = 0; i < sizes_.size(); ++i) {
        starts_[i] = start;
        chunks_[i].start = start;
        chunks_[i].expected = sizes_[i];
        start += sizes_[i];
    }
}

ChunkLedger ChunkLedger::from_poisson(std::uint64_t n_instances, double mean, Rng& rng) {
    std::vector<std::uint64_t> sizes;
    std::uint64_t covered = 0;
    while (covered < n_instances) {
        std::uint64_t size = rng.poisson(mean);
        if (size == 0) size = 1;
        sizes.push_back(size);
        covered += size;
    }
    return ChunkLedger(std::move(sizes), n_instances);
}

std::uint64_t ChunkLedger::chunk_of(std::uint64_t instance_id) const {
    if (instance_id >= n_instances_) throw std::out_of_range("instance id beyond the stream");
    auto it = std::upper_bound(starts_.begin(), starts_.end(), instance_id);
    return std::uint64_t(it - starts_.begin()) - 1;
}

ChunkLedger::Chunk& ChunkLedger::chunk_for(std::uint64_t instance_id, std::uint64_t* index) {
    Chunk& chunk = chunks_[chunk_of(instance_id)];
    if (chunk.X.empty()) {
        chunk.X.resize(chunk.expected);
        chunk.pred.resize(chunk.expected);
        chunk.y.assign(chunk.expected, 0);
        chunk.has_feature.assign(chunk.expected, 0);
        chunk.has_label.assign(chunk.expected, 0);
    }
    *index = instance_id - chunk.start;
    return chunk;
}

void ChunkLedger::add_feature(std::uint64_t instance_id, std::vector<double> x,
                              double prediction) {
    std::uint64_t index = 0;
    Chunk& chunk = chunk_for(instance_id, &index);
    if (chunk.consumed) throw std::logic_error("feature arrival for a consumed chunk");
    if (chunk.has_feature[index]) throw std::logic_error("duplicate feature arrival");
    chunk.has_feature[index] = 1;
    chunk.X[index] = std::move(x);
    chunk.pred[index] = prediction;
    ++features_seen_;
    ++stored_rows_;
}

std::optional<std::uint64_t> ChunkLedger::add_label(std::uint64_t instance_id, int y) {
    if (y != 0 && y != 1) throw std::invalid_argument("labels must be 0 or 1");
    std::uint64_t index = 0;
    Chunk& chunk = chunk_for(instance_id, &index);
    if (chunk.consumed || !chunk.has_feature[index]) {
        throw std::logic_error("label arrival for an unknown instance");
    }
    if (chunk.has_label[index]) throw std::logic_error("duplicate label arrival");
    chunk.has_label[index] = 1;
    chunk.y[index] = y;
    ++chunk.received;
    ++labels_seen_;
    if (chunk.received == chunk.expected) return chunk_of(instance_id);
    return std::nullopt;
}

const std::vector<double>& ChunkLedger::feature_row(std::uint64_t instance_id) const {
    const Chunk& chunk = chunks_[chunk_of(instance_id)];
    std::uint64_t index = instance_id - chunk.start;
    if (chunk.consumed || chunk.X.empty() || !chunk.has_feature[index]) {
        throw std::logic_error("feature row not available");
    }
    return chunk.X[index];
}

const std::vector<double>& ChunkLedger::predictions(std::uint64_t chunk_id) const {
    const Chunk& chunk = chunks_.at(chunk_id);
    if (chunk.consumed) throw std::logic_error("chunk already consumed");
    return chunk.pred;
}

const std::vector<int>& ChunkLedger::labels(std::uint64_t chunk_id) const {
    const Chunk& chunk = chunks_.at(chunk_id);
    if (chunk.consumed) throw std::logic_error("chunk already consumed");
    return chunk.y;
}

LabeledChunk ChunkLedger::consume(std::uint64_t chunk_id) {
    Chunk& chunk = chunks_.at(chunk_id);
    if (chunk.consumed) throw std::logic_error("chunk already consumed");
    if (chunk.received != chunk.expected) throw std::logic_error("chunk is not complete");
    LabeledChunk out;
    out.id = chunk_id;
    out.X = std::move(chunk.X);
    out.y = std::move(chunk.y);
    chunk.X = {};
    chunk.pred = {};
    chunk.y = {};
    chunk.has_feature = {};
    chunk.has_label = {};
    chunk.consumed = true;
    labeled_consumed_ += chunk.expected;
    stored_rows_ -= chunk.expected;
    return out;
}

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
    return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

}  // namespace

RunResult run_stream(const std::vector<StreamEvent>& events, StreamModel& model,
                     ChunkLedger& ledger, MetricKind metric, bool timing) {
    RunResult result;
    std::size_t n_chunks = ledger.chunk_count();
    std::vector<double> predict_ms(n_chunks, 0.0), train_ms(n_chunks, 0.0),
        gc_ms(n_chunks, 0.0);
    bool incremental = !model.uses_training_batches();
    std::size_t completions = 0;

    for (const StreamEvent& event : events) {
        if (event.kind == EventKind::feature_arrival) {
            std::uint64_t chunk_id = ledger.chunk_of(event.instance_id);
            if (timing) {
                auto t0 = Clock::now();
                double p = model.score(event.features);
                predict_ms[chunk_id] += ms_since(t0);
                auto t1 = Clock::now();
                ledger.add_feature(event.instance_id, event.features, p);
                gc_ms[chunk_id] += ms_since(t1);
            } else {
                ledger.add_feature(event.instance_id, event.features,
                                   model.score(event.features));
            }
            result.stats.peak_unlabeled =
                std::max(result.stats.peak_unlabeled, ledger.stored_unlabeled());
            continue;
        }

        std::uint64_t chunk_id = ledger.chunk_of(event.instance_id);
        auto completed = ledger.add_label(event.instance_id, event.label);
        if (incremental) {
            if (timing) {
                auto t0 = Clock::now();
                model.observe_label(ledger.feature_row(event.instance_id), event.label);
                train_ms[chunk_id] += ms_since(t0);
            } else {
                model.observe_label(ledger.feature_row(event.instance_id), event.label);
            }
        }
        if (!completed) continue;

        const auto& preds = ledger.predictions(*completed);
        const auto& ys = ledger.labels(*completed);
        ChunkReport report;
        report.chunk_id = *completed;
        report.n = ys.size();
        for (int y : ys) report.positives += y;
        report.metric = metric_name(metric);
        report.value = compute_metric(metric, preds, ys);
        report.completion_index = completions++;

        auto t0 = Clock::now();
        LabeledChunk chunk = ledger.consume(*completed);
        if (timing) gc_ms[*completed] += ms_since(t0);
        auto t1 = Clock::now();
        model.on_chunk_completed(std::move(chunk));
        if (timing) train_ms[*completed] += ms_since(t1);

        result.stats.peak_retained_chunks =
            std::max(result.stats.peak_retained_chunks, model.retained_labeled_chunks());
        result.reports.push_back(std::move(report));
    }

    std::sort(result.reports.begin(), result.reports.end(),
              [](const ChunkReport& a, const ChunkReport& b) { return a.chunk_id < b.chunk_id; });
    for (ChunkReport& report : result.reports) {
        report.predict_ms = predict_ms[report.chunk_id];
        report.train_ms = train_ms[report.chunk_id];
        report.gc_ms = gc_ms[report.chunk_id];
    }
    result.stats.instances = ledger.instances_seen();
    return result;
}

}  // namespace delaybench
