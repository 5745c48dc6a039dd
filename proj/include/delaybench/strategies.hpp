#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "delaybench/batch_models.hpp"
#include "delaybench/model.hpp"
#include "delaybench/rng.hpp"

namespace delaybench {

enum class StrategyKind { static_model, retrain, stack, propagate, finetune };

struct StrategyConfig {
    StrategyKind kind = StrategyKind::retrain;
    std::size_t stack_members = 3;
    std::size_t propagate_chunks = 3;
    double finetune_eta0 = 0.5;
    double finetune_decay = 0.1;
    std::size_t finetune_passes = 20;
    // Fit on every nth completed chunk; 1 trains on all of them.
    std::size_t train_every = 1;
    double train_fraction = 0.7;
};

// Fits a model on a labeled chunk pair. The validation part may be
// empty for fitters that do not watch one.
using BatchFitter = std::function<std::unique_ptr<BatchModel>(
    const LabeledChunk& train, const LabeledChunk& val, std::uint64_t seed)>;

// Class-stratified 70/30 style split. Each class is shuffled and cut
// separately so a rare class cannot end up entirely on one side.
struct ChunkSplit {
    LabeledChunk train;
    LabeledChunk val;
};
ChunkSplit stratified_split(const LabeledChunk& chunk, double train_fraction, Rng& rng);

// Drives a batch learner through the stream: ignores instance-level
// labels, reacts to completed chunks per the configured update policy.
class ChunkStrategy : public StreamModel {
  public:
    ChunkStrategy(StrategyConfig config, BatchFitter fitter, std::uint64_t seed);
    // Fine-tuning variant, which owns a gradient-trainable linear
    // model instead of refitting through a factory.
    ChunkStrategy(StrategyConfig config, BatchLinearConfig linear, std::uint64_t seed);

    double score(const std::vector<double>& x) override;
    void observe_label(const std::vector<double>&, int) override {}
    bool uses_training_batches() const override { return true; }
    void pretrain(const LabeledChunk& offline) override;
    void on_chunk_completed(LabeledChunk chunk) override;
    std::size_t retained_labeled_chunks() const override { return window_.size(); }

    std::size_t fit_count() const { return fits_; }
    std::size_t member_count() const { return members_.size(); }

  private:
    StrategyConfig config_;
    BatchFitter fitter_;
    BatchLinearConfig linear_config_;
    std::uint64_t seed_;

    std::vector<std::unique_ptr<BatchModel>> members_;
    std::optional<BatchLinear> linear_;
    std::vector<LabeledChunk> window_;  // propagate retention, ascending id
    std::size_t completed_ = 0;
    std::size_t finetunes_ = 0;
    std::size_t fits_ = 0;

    std::unique_ptr<BatchModel> fit_on(const std::vector<const LabeledChunk*>& parts,
                                       std::uint64_t fit_id);
};

}  // namespace delaybench
