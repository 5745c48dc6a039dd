#include "delaybench/hoeffding_tree.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <tuple>

namespace delaybench {

double hoeffding_bound(double r, double delta, double n) {
    if (!(r > 0.0) || !(delta > 0.0) || delta > 1.0 || !(n >= 1.0)) {
        throw std::invalid_argument("hoeffding bound needs r > 0, delta in (0,1], n >= 1");
    }
    return std::sqrt(r * r * std::log(1.0 / delta) / (2.0 * n));
}

namespace {

double entropy_bits(double a, double b) {
    double total = a + b;
    if (a <= 0.0 || b <= 0.0 || total <= 0.0) return 0.0;
    double pa = a / total, pb = b / total;
    return -pa * std::log2(pa) - pb * std::log2(pb);
}

struct ReservoirEntry {
    double value;
    int label;
    double weight;
};

// Numeric split statistics of one feature at one leaf: raw values
// until the bin edges freeze, class-weighted bin counts afterwards.
struct FeatureStats {
    std::vector<ReservoirEntry> reservoir;
    bool frozen = false;
    std::vector<double> edges;
    std::vector<std::array<double, 2>> bin_mass;

    // Bin b covers (edges[b-1], edges[b]]; values past the last edge
    // fall into the open top bin.
    std::size_t bin_of(double v) const {
        return std::size_t(std::lower_bound(edges.begin(), edges.end(), v) - edges.begin());
    }
};

}  // namespace

struct HoeffdingTree::Node {
    bool is_leaf = true;
    std::size_t depth = 0;

    // Leaf state. class_mass counts only what this leaf observed;
    // seed_mass carries the parent's branch distribution so fresh
    // leaves do not predict blindly.
    std::array<double, 2> class_mass{};
    std::array<double, 2> seed_mass{};
    std::vector<std::size_t> tracked;
    std::vector<FeatureStats> stats;
    std::uint64_t arrivals_since_eval = 0;
    double mc_errors = 0.0;
    double nb_errors = 0.0;

    // Internal state.
    std::size_t split_feature = 0;
    double split_threshold = 0.0;
    std::unique_ptr<Node> left, right;

    // Adaptive machinery, created lazily on internal nodes.
    std::optional<Adwin> adwin;
    std::unique_ptr<Node> alternate;
    std::optional<Adwin> alt_adwin;
};

HoeffdingTree::HoeffdingTree(HoeffdingTreeConfig config, std::size_t n_features,
                             std::uint64_t seed)
    : config_(config), n_features_(n_features), rng_(seed) {
    if (n_features_ == 0) throw std::invalid_argument("tree needs at least one feature");
    if (config_.n_bins < 2) throw std::invalid_argument("tree needs at least two bins");
    if (config_.mask_size > n_features_) {
        throw std::invalid_argument("feature mask larger than the feature count");
    }
    root_ = make_leaf(0, {0.0, 0.0});
}

HoeffdingTree::~HoeffdingTree() = default;
HoeffdingTree::HoeffdingTree(HoeffdingTree&&) noexcept = default;
HoeffdingTree& HoeffdingTree::operator=(HoeffdingTree&&) noexcept = default;

std::unique_ptr<HoeffdingTree::Node> HoeffdingTree::make_leaf(
    std::size_t depth, const std::array<double, 2>& seed_mass) {
    auto node = std::make_unique<Node>();
    node->depth = depth;
    node->seed_mass = seed_mass;
    if (config_.mask_size > 0 && config_.mask_size < n_features_) {
        // Partial Fisher-Yates over the feature indices, then sorted
        // so the lowest-index tie-break stays meaningful.
        std::vector<std::size_t> all(n_features_);
        for (std::size_t j = 0; j < n_features_; ++j) all[j] = j;
        for (std::size_t j = 0; j < config_.mask_size; ++j) {
            std::size_t k = j + std::size_t(rng_.uniform_int(n_features_ - j));
            std::swap(all[j], all[k]);
        }
        node->tracked.assign(all.begin(), all.begin() + std::ptrdiff_t(config_.mask_size));
        std::sort(node->tracked.begin(), node->tracked.end());
    } else {
        node->tracked.resize(n_features_);
        for (std::size_t j = 0; j < n_features_; ++j) node->tracked[j] = j;
    }
    node->stats.resize(node->tracked.size());
    return node;
}

void HoeffdingTree::check_dimension(const std::vector<double>& x) const {
    if (x.size() != n_features_) {
        throw std::invalid_argument("instance dimension does not match the tree");
    }
}

const HoeffdingTree::Node& HoeffdingTree::route(const std::vector<double>& x) const {
    const Node* node = root_.get();
    while (!node->is_leaf) {
        node = x[node->split_feature] <= node->split_threshold ? node->left.get()
                                                               : node->right.get();
    }
    return *node;
}

namespace {

double naive_bayes_p1(const HoeffdingTree::Node& leaf, const std::vector<double>& x);

double leaf_p1(const HoeffdingTree::Node& leaf, const std::vector<double>& x) {
    bool use_nb = leaf.nb_errors < leaf.mc_errors;
    if (use_nb) return naive_bayes_p1(leaf, x);
    double m0 = leaf.class_mass[0] + leaf.seed_mass[0];
    double m1 = leaf.class_mass[1] + leaf.seed_mass[1];
    double total = m0 + m1;
    return total > 0.0 ? m1 / total : 0.5;
}

}  // namespace

double HoeffdingTree::score(const std::vector<double>& x) {
    check_dimension(x);
    return leaf_p1(route(x), x);
}

void HoeffdingTree::learn_one(const std::vector<double>& x, int y) {
    learn_weighted(x, y, 1);
}

void HoeffdingTree::learn_weighted(const std::vector<double>& x, int y, std::uint64_t weight) {
    check_dimension(x);
    if (y != 0 && y != 1) throw std::invalid_argument("labels must be 0 or 1");
    if (weight == 0) return;
    int err = (leaf_p1(route(x), x) > 0.5 ? 1 : 0) != y;
    learn_in(*root_, x, y, double(weight), err, config_.adaptive);
}

void HoeffdingTree::learn_in(Node& node, const std::vector<double>& x, int y, double weight,
                             int final_error, bool allow_alternates) {
    if (node.is_leaf) {
        leaf_update(node, x, y, weight);
        return;
    }

    if (allow_alternates) {
        if (!node.adwin) node.adwin.emplace(config_.adwin_delta);
        if (node.alternate) {
            // Train the alternate on the same instance and feed its
            // own mistake to its detector.
            Node* alt_leaf = node.alternate.get();
            while (!alt_leaf->is_leaf) {
                alt_leaf = x[alt_leaf->split_feature] <= alt_leaf->split_threshold
                               ? alt_leaf->left.get()
                               : alt_leaf->right.get();
            }
            int alt_err = (leaf_p1(*alt_leaf, x) > 0.5 ? 1 : 0) != y;
            node.alt_adwin->update(alt_err);
            learn_in(*node.alternate, x, y, weight, alt_err, false);
        }
        bool fired = node.adwin->update(final_error);
        if (fired && !node.alternate) {
            node.alternate = make_leaf(node.depth, {0.0, 0.0});
            node.alt_adwin.emplace(config_.adwin_delta);
        } else if (node.alternate) {
            double e_main = node.adwin->estimate();
            double e_alt = node.alt_adwin->estimate();
            double n_main = double(node.adwin->width());
            double n_alt = double(node.alt_adwin->width());
            if (n_main > 0.0 && n_alt > 0.0) {
                double bound = std::sqrt(2.0 * e_main * (1.0 - e_main) *
                                         std::log(2.0 / config_.swap_confidence) *
                                         (1.0 / n_main + 1.0 / n_alt));
                if (e_main - e_alt > bound) {
                    // The alternate wins: splice it in and finish this
                    // update inside the new structure.
                    auto alt = std::move(node.alternate);
                    node = std::move(*alt);
                    Node* leaf = &node;
                    while (!leaf->is_leaf) {
                        leaf = x[leaf->split_feature] <= leaf->split_threshold
                                   ? leaf->left.get()
                                   : leaf->right.get();
                    }
                    int new_err = (leaf_p1(*leaf, x) > 0.5 ? 1 : 0) != y;
                    learn_in(node, x, y, weight, new_err, allow_alternates);
                    return;
                }
                if (e_alt - e_main > bound) {
                    node.alternate.reset();
                    node.alt_adwin.reset();
                }
            }
        }
    }

    Node& child = x[node.split_feature] <= node.split_threshold ? *node.left : *node.right;
    learn_in(child, x, y, weight, final_error, allow_alternates);
}

namespace {

double naive_bayes_p1(const HoeffdingTree::Node& leaf, const std::vector<double>& x) {
    double m0 = leaf.class_mass[0] + leaf.seed_mass[0];
    double m1 = leaf.class_mass[1] + leaf.seed_mass[1];
    double total = m0 + m1;
    if (total <= 0.0) return 0.5;
    double s0 = m0 / total, s1 = m1 / total;
    for (std::size_t k = 0; k < leaf.tracked.size(); ++k) {
        const FeatureStats& st = leaf.stats[k];
        if (!st.frozen) continue;
        double n_bins = double(st.edges.size() + 1);
        std::size_t b = st.bin_of(x[leaf.tracked[k]]);
        double t0 = 0.0, t1 = 0.0;
        for (const auto& bm : st.bin_mass) {
            t0 += bm[0];
            t1 += bm[1];
        }
        s0 *= (st.bin_mass[b][0] + 1.0) / (t0 + n_bins);
        s1 *= (st.bin_mass[b][1] + 1.0) / (t1 + n_bins);
    }
    double denom = s0 + s1;
    return denom > 0.0 ? s1 / denom : 0.5;
}

void freeze_stats(FeatureStats& st, std::size_t n_bins) {
    std::vector<double> values;
    values.reserve(st.reservoir.size());
    for (const auto& e : st.reservoir) values.push_back(e.value);
    std::sort(values.begin(), values.end());
    st.edges.clear();
    for (std::size_t i = 1; i < n_bins; ++i) {
        double edge = values[i * values.size() / n_bins];
        if (st.edges.empty() || edge > st.edges.back()) st.edges.push_back(edge);
    }
    st.bin_mass.assign(st.edges.size() + 1, {0.0, 0.0});
    st.frozen = true;
    for (const auto& e : st.reservoir) {
        st.bin_mass[st.bin_of(e.value)][std::size_t(e.label)] += e.weight;
    }
    st.reservoir.clear();
    st.reservoir.shrink_to_fit();
}

}  // namespace

void HoeffdingTree::leaf_update(Node& leaf, const std::vector<double>& x, int y,
                                double weight) {
    // Error accounting of both leaf predictors, before learning.
    {
        double m0 = leaf.class_mass[0] + leaf.seed_mass[0];
        double m1 = leaf.class_mass[1] + leaf.seed_mass[1];
        int mc_class = m1 > m0 ? 1 : 0;
        int nb_class = naive_bayes_p1(leaf, x) > 0.5 ? 1 : 0;
        if (mc_class != y) leaf.mc_errors += weight;
        if (nb_class != y) leaf.nb_errors += weight;
    }

    leaf.class_mass[std::size_t(y)] += weight;
    for (std::size_t k = 0; k < leaf.tracked.size(); ++k) {
        FeatureStats& st = leaf.stats[k];
        double v = x[leaf.tracked[k]];
        if (!st.frozen) {
            st.reservoir.push_back({v, y, weight});
            if (st.reservoir.size() >= config_.grace_period) freeze_stats(st, config_.n_bins);
        } else {
            st.bin_mass[st.bin_of(v)][std::size_t(y)] += weight;
        }
    }

    if (++leaf.arrivals_since_eval >= config_.grace_period) {
        leaf.arrivals_since_eval = 0;
        try_split(leaf);
    }
}

void HoeffdingTree::try_split(Node& leaf) {
    if (leaf.depth >= config_.max_depth) return;
    double m0 = leaf.class_mass[0], m1 = leaf.class_mass[1];
    if (m0 <= 0.0 || m1 <= 0.0) return;
    double total = m0 + m1;
    double h_parent = entropy_bits(m0, m1);

    double g1 = 0.0, g2 = 0.0;
    std::size_t best_feature = 0;
    double best_threshold = 0.0;
    bool have_best = false;

    for (std::size_t k = 0; k < leaf.tracked.size(); ++k) {
        const FeatureStats& st = leaf.stats[k];
        if (!st.frozen || st.edges.empty()) continue;
        double feature_best = -1.0;
        double feature_threshold = 0.0;
        double l0 = 0.0, l1 = 0.0;
        for (std::size_t b = 0; b < st.edges.size(); ++b) {
            l0 += st.bin_mass[b][0];
            l1 += st.bin_mass[b][1];
            double r0 = m0 - l0, r1 = m1 - l1;
            double wl = l0 + l1, wr = r0 + r1;
            if (wl <= 0.0 || wr <= 0.0) continue;
            double gain = h_parent - (wl / total) * entropy_bits(l0, l1) -
                          (wr / total) * entropy_bits(r0, r1);
            if (gain > feature_best) {
                feature_best = gain;
                feature_threshold = st.edges[b];
            }
        }
        if (feature_best < 0.0) continue;
        if (!have_best || feature_best > g1) {
            g2 = have_best ? g1 : 0.0;
            g1 = feature_best;
            best_feature = leaf.tracked[k];
            best_threshold = feature_threshold;
            have_best = true;
        } else if (feature_best > g2) {
            g2 = feature_best;
        }
    }
    if (!have_best || g1 <= 0.0) return;

    double eps = hoeffding_bound(1.0, config_.split_confidence, total);
    if (!(g1 - g2 > eps || eps < config_.tie_threshold)) return;

    // Recover the winning feature's side masses to seed the children.
    std::array<double, 2> seed_left{0.0, 0.0}, seed_right{0.0, 0.0};
    for (std::size_t k = 0; k < leaf.tracked.size(); ++k) {
        if (leaf.tracked[k] != best_feature) continue;
        const FeatureStats& st = leaf.stats[k];
        for (std::size_t b = 0; b < st.bin_mass.size(); ++b) {
            bool goes_left = b < st.edges.size() && st.edges[b] <= best_threshold;
            for (int c = 0; c < 2; ++c) {
                (goes_left ? seed_left : seed_right)[std::size_t(c)] +=
                    st.bin_mass[b][std::size_t(c)];
            }
        }
        break;
    }

    std::size_t depth = leaf.depth;
    leaf.is_leaf = false;
    leaf.split_feature = best_feature;
    leaf.split_threshold = best_threshold;
    leaf.left = make_leaf(depth + 1, seed_left);
    leaf.right = make_leaf(depth + 1, seed_right);
    leaf.stats.clear();
    leaf.stats.shrink_to_fit();
}

namespace {

struct TreeShape {
    std::size_t nodes = 0;
    std::size_t height = 0;
    std::size_t alternates = 0;
};

void walk_main(const HoeffdingTree::Node& node, TreeShape& shape) {
    ++shape.nodes;
    shape.height = std::max(shape.height, node.depth);
    if (node.alternate) ++shape.alternates;
    if (!node.is_leaf) {
        walk_main(*node.left, shape);
        walk_main(*node.right, shape);
    }
}

}  // namespace

std::size_t HoeffdingTree::node_count() const {
    TreeShape shape;
    walk_main(*root_, shape);
    return shape.nodes;
}

std::size_t HoeffdingTree::height() const {
    TreeShape shape;
    walk_main(*root_, shape);
    return shape.height;
}

std::size_t HoeffdingTree::alternate_count() const {
    TreeShape shape;
    walk_main(*root_, shape);
    return shape.alternates;
}

}  // namespace delaybench
