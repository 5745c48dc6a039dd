#include "delaybench/strategies.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace delaybench {

ChunkSplit stratified_split(const LabeledChunk& chunk, double train_fraction, Rng& rng) {
    if (!(train_fraction > 0.0) || !(train_fraction < 1.0)) {
        throw std::invalid_argument("train fraction must be in (0,1)");
    }
    std::vector<std::size_t> by_class[2];
    for (std::size_t i = 0; i < chunk.y.size(); ++i) {
        by_class[chunk.y[i] == 1].push_back(i);
    }
    ChunkSplit split;
    split.train.id = chunk.id;
    split.val.id = chunk.id;
    for (auto& indices : by_class) {
        for (std::size_t i = indices.size(); i > 1; --i) {
            std::swap(indices[i - 1], indices[rng.uniform_int(i)]);
        }
        std::size_t take = std::size_t(std::llround(train_fraction * double(indices.size())));
        if (indices.size() >= 1 && take == 0) take = 1;
        if (indices.size() >= 2 && take == indices.size()) take = indices.size() - 1;
        for (std::size_t i = 0; i < indices.size(); ++i) {
            auto& side = i < take ? split.train : split.val;
            side.X.push_back(chunk.X[indices[i]]);
            side.y.push_back(chunk.y[indices[i]]);
        }
    }
    return split;
}

ChunkStrategy::ChunkStrategy(StrategyConfig config, BatchFitter fitter, std::uint64_t seed)
    : config_(config), fitter_(std::move(fitter)), seed_(seed) {
    if (config_.kind == StrategyKind::finetune) {
        throw std::invalid_argument("fine-tuning needs a gradient-trainable model");
    }
    if (!fitter_) throw std::invalid_argument("strategy needs a model fitter");
    if (config_.kind == StrategyKind::stack && config_.stack_members == 0) {
        throw std::invalid_argument("stack needs at least one member slot");
    }
    if (config_.kind == StrategyKind::propagate && config_.propagate_chunks == 0) {
        throw std::invalid_argument("propagate needs at least one chunk");
    }
    if (config_.train_every == 0) throw std::invalid_argument("train interval must be positive");
}

ChunkStrategy::ChunkStrategy(StrategyConfig config, BatchLinearConfig linear, std::uint64_t seed)
    : config_(config), linear_config_(linear), seed_(seed) {
    if (config_.kind != StrategyKind::finetune) {
        throw std::invalid_argument("only fine-tuning takes a linear model directly");
    }
    if (config_.train_every == 0) throw std::invalid_argument("train interval must be positive");
}

double ChunkStrategy::score(const std::vector<double>& x) {
    if (config_.kind == StrategyKind::finetune) {
        return linear_ ? linear_->predict(x) : 0.5;
    }
    if (members_.empty()) return 0.5;
    double sum = 0.0;
    for (const auto& m : members_) sum += m->predict(x);
    return sum / double(members_.size());
}

std::unique_ptr<BatchModel> ChunkStrategy::fit_on(const std::vector<const LabeledChunk*>& parts,
                                                  std::uint64_t fit_id) {
    LabeledChunk merged;
    merged.id = fit_id;
    for (const auto* part : parts) {
        merged.X.insert(merged.X.end(), part->X.begin(), part->X.end());
        merged.y.insert(merged.y.end(), part->y.begin(), part->y.end());
    }
    std::uint64_t fit_seed = derive_seed(seed_, fit_id);
    Rng split_rng(derive_seed(fit_seed, 0));
    ChunkSplit split = stratified_split(merged, config_.train_fraction, split_rng);
    ++fits_;
    return fitter_(split.train, split.val, derive_seed(fit_seed, 1));
}

void ChunkStrategy::pretrain(const LabeledChunk& offline) {
    if (config_.kind == StrategyKind::finetune) {
        linear_ = BatchLinear::fit(offline.X, offline.y, linear_config_);
        return;
    }
    members_.clear();
    members_.push_back(fit_on({&offline}, hash_label("pretrain")));
}

void ChunkStrategy::on_chunk_completed(LabeledChunk chunk) {
    ++completed_;
    bool train_now = completed_ % config_.train_every == 0;

    switch (config_.kind) {
        case StrategyKind::static_model:
            break;
        case StrategyKind::finetune:
            if (!train_now) break;
            if (!linear_) {
                linear_ = BatchLinear::fit(chunk.X, chunk.y, linear_config_);
                break;
            }
            ++finetunes_;
            linear_->finetune(chunk.X, chunk.y,
                              finetune_rate(config_.finetune_eta0, config_.finetune_decay,
                                            finetunes_),
                              config_.finetune_passes);
            break;
        case StrategyKind::retrain:
            if (!train_now) break;
            members_.clear();
            members_.push_back(fit_on({&chunk}, chunk.id));
            break;
        case StrategyKind::stack:
            if (!train_now) break;
            members_.push_back(fit_on({&chunk}, chunk.id));
            while (members_.size() > config_.stack_members) {
                members_.erase(members_.begin());
            }
            break;
        case StrategyKind::propagate: {
            std::uint64_t arrived = chunk.id;
            window_.push_back(std::move(chunk));
            std::sort(window_.begin(), window_.end(),
                      [](const LabeledChunk& a, const LabeledChunk& b) { return a.id < b.id; });
            if (window_.size() > config_.propagate_chunks) {
                window_.erase(window_.begin());
            }
            if (!train_now) break;
            std::vector<const LabeledChunk*> parts;
            for (const auto& c : window_) parts.push_back(&c);
            std::unique_ptr<BatchModel> model = fit_on(parts, arrived);
            members_.clear();
            members_.push_back(std::move(model));
            break;
        }
    }
}

}  // namespace delaybench
