#include "delaybench/batch_models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace delaybench {

namespace {

double clamp_prob(double p) {
    return std::min(1.0 - 1e-6, std::max(1e-6, p));
}

double sigmoid(double z) {
    return 1.0 / (1.0 + std::exp(-z));
}

void check_batch(const std::vector<std::vector<double>>& X, const std::vector<int>& y) {
    if (X.empty()) throw std::invalid_argument("empty training batch");
    if (X.size() != y.size()) throw std::invalid_argument("feature/label size mismatch");
    for (int label : y) {
        if (label != 0 && label != 1) throw std::invalid_argument("labels must be 0 or 1");
    }
    for (const auto& row : X) {
        if (row.size() != X.front().size()) {
            throw std::invalid_argument("ragged feature matrix");
        }
    }
}

double gini(double pos, double total) {
    if (total <= 0.0) return 0.0;
    double p = pos / total;
    return 2.0 * p * (1.0 - p);
}

}  // namespace

CartTree CartTree::fit(const std::vector<std::vector<double>>& X, const std::vector<int>& y,
                       const CartConfig& config) {
    check_batch(X, y);
    CartTree tree;
    tree.n_features_ = X.front().size();
    std::vector<std::size_t> indices(X.size());
    std::iota(indices.begin(), indices.end(), 0);
    tree.build(X, y, indices, 0, config);
    return tree;
}

int CartTree::build(const std::vector<std::vector<double>>& X, const std::vector<int>& y,
                    std::vector<std::size_t>& indices, std::size_t depth,
                    const CartConfig& config) {
    double total = double(indices.size());
    double pos = 0.0;
    for (std::size_t i : indices) pos += y[i];

    int node_id = int(nodes_.size());
    nodes_.push_back(Node{});
    nodes_[node_id].prob = pos / total;

    bool pure = pos == 0.0 || pos == total;
    if (pure || depth >= config.max_depth || indices.size() < 2 * config.min_samples_leaf) {
        return node_id;
    }

    // Best split by Gini; ties go to the lowest feature, then the
    // lowest threshold, so the choice depends only on the statistics.
    double parent_impurity = gini(pos, total);
    double best_score = -1.0;
    std::size_t best_feature = 0;
    double best_threshold = 0.0;
    std::vector<std::pair<double, int>> column(indices.size());

    for (std::size_t f = 0; f < n_features_; ++f) {
        for (std::size_t i = 0; i < indices.size(); ++i) {
            column[i] = {X[indices[i]][f], y[indices[i]]};
        }
        std::sort(column.begin(), column.end());
        double left_n = 0.0, left_pos = 0.0;
        for (std::size_t i = 0; i + 1 < column.size(); ++i) {
            left_n += 1.0;
            left_pos += column[i].second;
            if (column[i].first == column[i + 1].first) continue;
            if (left_n < config.min_samples_leaf) continue;
            if (total - left_n < config.min_samples_leaf) break;
            double impurity = (left_n * gini(left_pos, left_n) +
                               (total - left_n) * gini(pos - left_pos, total - left_n)) /
                              total;
            double gain = parent_impurity - impurity;
            if (gain > best_score + 1e-15) {
                best_score = gain;
                best_feature = f;
                best_threshold = (column[i].first + column[i + 1].first) / 2.0;
            }
        }
    }
    if (best_score < 0.0) return node_id;

    std::vector<std::size_t> left, right;
    for (std::size_t i : indices) {
        (X[i][best_feature] <= best_threshold ? left : right).push_back(i);
    }
    indices.clear();
    indices.shrink_to_fit();

    nodes_[node_id].feature = int(best_feature);
    nodes_[node_id].threshold = best_threshold;
    int left_id = build(X, y, left, depth + 1, config);
    nodes_[node_id].left = left_id;
    int right_id = build(X, y, right, depth + 1, config);
    nodes_[node_id].right = right_id;
    return node_id;
}

double CartTree::predict(const std::vector<double>& x) const {
    if (x.size() != n_features_) throw std::invalid_argument("feature dimension mismatch");
    int node = 0;
    while (nodes_[node].feature >= 0) {
        node = x[nodes_[node].feature] <= nodes_[node].threshold ? nodes_[node].left
                                                                  : nodes_[node].right;
    }
    return nodes_[node].prob;
}

std::size_t CartTree::depth() const {
    if (nodes_.empty()) return 0;
    std::vector<std::pair<int, std::size_t>> stack = {{0, 0}};
    std::size_t deepest = 0;
    while (!stack.empty()) {
        auto [node, d] = stack.back();
        stack.pop_back();
        deepest = std::max(deepest, d);
        if (nodes_[node].feature >= 0) {
            stack.push_back({nodes_[node].left, d + 1});
            stack.push_back({nodes_[node].right, d + 1});
        }
    }
    return deepest;
}

std::optional<std::pair<std::size_t, double>> CartTree::root_split() const {
    if (nodes_.empty() || nodes_[0].feature < 0) return std::nullopt;
    return std::make_pair(std::size_t(nodes_[0].feature), nodes_[0].threshold);
}

namespace {

// Per-fit quantile binning. Edges sit at evenly spaced order
// statistics of the training column; lookups map a raw value to the
// first edge not below it.
struct Binner {
    std::vector<std::vector<double>> edges;  // per feature, ascending

    static Binner build(const std::vector<std::vector<double>>& X, std::size_t n_bins) {
        Binner binner;
        std::size_t p = X.front().size();
        binner.edges.resize(p);
        std::vector<double> column(X.size());
        for (std::size_t f = 0; f < p; ++f) {
            for (std::size_t i = 0; i < X.size(); ++i) column[i] = X[i][f];
            std::sort(column.begin(), column.end());
            auto& e = binner.edges[f];
            for (std::size_t b = 1; b < n_bins; ++b) {
                double q = column[b * column.size() / n_bins];
                if (e.empty() || q > e.back()) e.push_back(q);
            }
        }
        return binner;
    }

    std::size_t bin_of(std::size_t feature, double value) const {
        const auto& e = edges[feature];
        return std::size_t(std::lower_bound(e.begin(), e.end(), value) - e.begin());
    }

    std::size_t bin_count(std::size_t feature) const { return edges[feature].size() + 1; }

    // Raw-value threshold equivalent to "bin <= b", so prediction does
    // not need the binner.
    double threshold_after(std::size_t feature, std::size_t b) const {
        return edges[feature][b];
    }
};

struct SplitChoice {
    double gain = 0.0;
    std::size_t feature = 0;
    std::size_t bin = 0;
    bool found = false;
};

}  // namespace

Gbdt Gbdt::fit(const std::vector<std::vector<double>>& X_train, const std::vector<int>& y_train,
               const std::vector<std::vector<double>>& X_val, const std::vector<int>& y_val,
               const GbdtConfig& config) {
    check_batch(X_train, y_train);
    Gbdt model;
    model.config_ = config;
    model.n_features_ = X_train.front().size();

    double pos = std::accumulate(y_train.begin(), y_train.end(), 0.0);
    double prior = clamp_prob(pos / double(y_train.size()));
    model.base_score_ = std::log(prior / (1.0 - prior));
    if (pos == 0.0 || pos == double(y_train.size())) return model;  // constant model

    Binner binner = Binner::build(X_train, config.n_bins);

    // Pre-binned training matrix, column major.
    std::size_t n = X_train.size();
    std::vector<std::vector<std::uint16_t>> binned(model.n_features_,
                                                   std::vector<std::uint16_t>(n));
    for (std::size_t f = 0; f < model.n_features_; ++f) {
        for (std::size_t i = 0; i < n; ++i) {
            binned[f][i] = std::uint16_t(binner.bin_of(f, X_train[i][f]));
        }
    }

    std::vector<double> raw(n, model.base_score_);
    std::vector<double> raw_val(X_val.size(), model.base_score_);
    std::vector<double> grad(n), hess(n);

    auto logloss = [](const std::vector<double>& raws, const std::vector<int>& ys) {
        double loss = 0.0;
        for (std::size_t i = 0; i < raws.size(); ++i) {
            double p = clamp_prob(sigmoid(raws[i]));
            loss += ys[i] ? -std::log(p) : -std::log(1.0 - p);
        }
        return loss / double(raws.size());
    };

    double best_val = std::numeric_limits<double>::infinity();
    std::size_t best_round = 0;
    std::size_t since_best = 0;
    bool watch_val = !X_val.empty();

    for (std::size_t round = 0; round < config.max_trees; ++round) {
        for (std::size_t i = 0; i < n; ++i) {
            double p = sigmoid(raw[i]);
            grad[i] = p - y_train[i];
            hess[i] = std::max(p * (1.0 - p), 1e-12);
        }

        // Grow one tree, depth first over index partitions.
        Tree tree;
        struct Work {
            std::vector<std::size_t> indices;
            std::size_t depth;
            int node;
        };
        tree.nodes.push_back(Node{});
        std::vector<Work> stack;
        {
            std::vector<std::size_t> all(n);
            std::iota(all.begin(), all.end(), 0);
            stack.push_back({std::move(all), 0, 0});
        }
        while (!stack.empty()) {
            Work work = std::move(stack.back());
            stack.pop_back();
            double g_total = 0.0, h_total = 0.0;
            for (std::size_t i : work.indices) {
                g_total += grad[i];
                h_total += hess[i];
            }
            Node& node = tree.nodes[work.node];
            node.value = -g_total / (h_total + config.l2);

            if (work.depth >= config.max_depth ||
                work.indices.size() < 2 * config.min_samples_leaf) {
                continue;
            }

            double parent_score = g_total * g_total / (h_total + config.l2);
            SplitChoice best;
            for (std::size_t f = 0; f < model.n_features_; ++f) {
                std::size_t bins = binner.bin_count(f);
                if (bins < 2) continue;
                std::vector<double> g_hist(bins, 0.0), h_hist(bins, 0.0);
                std::vector<std::size_t> c_hist(bins, 0);
                for (std::size_t i : work.indices) {
                    std::size_t b = binned[f][i];
                    g_hist[b] += grad[i];
                    h_hist[b] += hess[i];
                    c_hist[b] += 1;
                }
                double g_left = 0.0, h_left = 0.0;
                std::size_t c_left = 0;
                for (std::size_t b = 0; b + 1 < bins; ++b) {
                    g_left += g_hist[b];
                    h_left += h_hist[b];
                    c_left += c_hist[b];
                    if (c_left < config.min_samples_leaf) continue;
                    if (work.indices.size() - c_left < config.min_samples_leaf) break;
                    double g_right = g_total - g_left;
                    double h_right = h_total - h_left;
                    double gain = g_left * g_left / (h_left + config.l2) +
                                  g_right * g_right / (h_right + config.l2) - parent_score;
                    if (gain > best.gain + 1e-12) {
                        best = {gain, f, b, true};
                    }
                }
            }
            if (!best.found) continue;

            int left_id = int(tree.nodes.size());
            tree.nodes.push_back(Node{});
            int right_id = int(tree.nodes.size());
            tree.nodes.push_back(Node{});
            Node& parent = tree.nodes[work.node];
            parent.feature = int(best.feature);
            parent.threshold = binner.threshold_after(best.feature, best.bin);
            parent.left = left_id;
            parent.right = right_id;

            std::vector<std::size_t> left, right;
            for (std::size_t i : work.indices) {
                (binned[best.feature][i] <= best.bin ? left : right).push_back(i);
            }
            stack.push_back({std::move(left), work.depth + 1, left_id});
            stack.push_back({std::move(right), work.depth + 1, right_id});
        }

        for (std::size_t i = 0; i < n; ++i) {
            raw[i] += config.learning_rate * model.tree_output(tree, X_train[i]);
        }
        for (std::size_t i = 0; i < X_val.size(); ++i) {
            raw_val[i] += config.learning_rate * model.tree_output(tree, X_val[i]);
        }
        model.trees_.push_back(std::move(tree));
        model.train_loss_curve_.push_back(logloss(raw, y_train));

        if (watch_val) {
            double val_loss = logloss(raw_val, y_val);
            if (val_loss < best_val - 1e-12) {
                best_val = val_loss;
                best_round = model.trees_.size();
                since_best = 0;
            } else if (++since_best >= config.patience) {
                break;
            }
        }
    }
    if (watch_val && best_round < model.trees_.size()) {
        model.trees_.resize(best_round);
        model.train_loss_curve_.resize(best_round);
    }
    return model;
}

double Gbdt::tree_output(const Tree& tree, const std::vector<double>& x) const {
    int node = 0;
    while (tree.nodes[node].feature >= 0) {
        node = x[tree.nodes[node].feature] <= tree.nodes[node].threshold ? tree.nodes[node].left
                                                                         : tree.nodes[node].right;
    }
    return tree.nodes[node].value;
}

double Gbdt::raw_score(const std::vector<double>& x) const {
    if (x.size() != n_features_) throw std::invalid_argument("feature dimension mismatch");
    double raw = base_score_;
    for (const auto& tree : trees_) raw += config_.learning_rate * tree_output(tree, x);
    return raw;
}

double Gbdt::predict(const std::vector<double>& x) const {
    return sigmoid(raw_score(x));
}

BatchLinear BatchLinear::fit(const std::vector<std::vector<double>>& X, const std::vector<int>& y,
                             const BatchLinearConfig& config) {
    check_batch(X, y);
    BatchLinear model;
    model.config_ = config;
    model.n_features_ = X.front().size();
    model.weights_.assign(model.n_features_, 0.0);
    model.mean_.assign(model.n_features_, 0.0);
    model.scale_.assign(model.n_features_, 1.0);

    double n = double(X.size());
    for (const auto& row : X) {
        for (std::size_t f = 0; f < model.n_features_; ++f) model.mean_[f] += row[f];
    }
    for (auto& m : model.mean_) m /= n;
    std::vector<double> var(model.n_features_, 0.0);
    for (const auto& row : X) {
        for (std::size_t f = 0; f < model.n_features_; ++f) {
            double d = row[f] - model.mean_[f];
            var[f] += d * d;
        }
    }
    for (std::size_t f = 0; f < model.n_features_; ++f) {
        model.scale_[f] = var[f] > 0.0 ? std::sqrt(var[f] / n) : 1.0;
    }

    for (std::size_t e = 0; e < config.epochs; ++e) {
        model.gradient_pass(X, y, config.learning_rate);
    }
    return model;
}

double BatchLinear::margin(const std::vector<double>& x) const {
    double z = bias_;
    for (std::size_t f = 0; f < n_features_; ++f) {
        z += weights_[f] * (x[f] - mean_[f]) / scale_[f];
    }
    return z;
}

void BatchLinear::gradient_pass(const std::vector<std::vector<double>>& X,
                                const std::vector<int>& y, double rate) {
    double n = double(X.size());
    std::vector<double> grad_w(n_features_, 0.0);
    double grad_b = 0.0;
    for (std::size_t i = 0; i < X.size(); ++i) {
        double err = sigmoid(margin(X[i])) - y[i];
        for (std::size_t f = 0; f < n_features_; ++f) {
            grad_w[f] += err * (X[i][f] - mean_[f]) / scale_[f];
        }
        grad_b += err;
    }
    for (std::size_t f = 0; f < n_features_; ++f) {
        weights_[f] -= rate * (grad_w[f] / n + config_.l2 * weights_[f]);
    }
    bias_ -= rate * grad_b / n;
}

double BatchLinear::predict(const std::vector<double>& x) const {
    if (x.size() != n_features_) throw std::invalid_argument("feature dimension mismatch");
    return sigmoid(margin(x));
}

void BatchLinear::finetune(const std::vector<std::vector<double>>& X, const std::vector<int>& y,
                           double rate, std::size_t passes) {
    check_batch(X, y);
    if (X.front().size() != n_features_) {
        throw std::invalid_argument("feature dimension mismatch");
    }
    for (std::size_t p = 0; p < passes; ++p) gradient_pass(X, y, rate);
}

double finetune_rate(double eta0, double gamma, std::size_t t) {
    if (!(eta0 > 0.0) || gamma < 0.0) throw std::invalid_argument("bad fine-tune schedule");
    return eta0 / (1.0 + gamma * double(t));
}

}  // namespace delaybench
