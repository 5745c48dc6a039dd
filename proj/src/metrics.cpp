#include "delaybench/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>

namespace delaybench {

namespace {

void check_inputs(const std::vector<double>& scores, const std::vector<int>& labels) {
    if (scores.size() != labels.size()) {
        throw std::invalid_argument("scores and labels differ in length");
    }
    for (double s : scores) {
        if (!std::isfinite(s)) throw std::invalid_argument("non-finite score");
    }
    for (int y : labels) {
        if (y != 0 && y != 1) throw std::invalid_argument("labels must be 0 or 1");
    }
}

}  // namespace

std::optional<double> auc_roc(const std::vector<double>& scores,
                              const std::vector<int>& labels) {
    check_inputs(scores, labels);
    const std::size_t n = scores.size();
    std::size_t n_pos = 0;
    for (int y : labels) n_pos += std::size_t(y);
    const std::size_t n_neg = n - n_pos;
    if (n_pos == 0 || n_neg == 0) return std::nullopt;

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    // Average ranks over tie groups, then the Mann-Whitney identity.
    double pos_rank_sum = 0.0;
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j < n && scores[order[j]] == scores[order[i]]) ++j;
        double avg_rank = 0.5 * double(i + 1 + j);  // mean of ranks i+1 .. j
        for (std::size_t k = i; k < j; ++k) {
            if (labels[order[k]] == 1) pos_rank_sum += avg_rank;
        }
        i = j;
    }
    double u_pos = pos_rank_sum - 0.5 * double(n_pos) * double(n_pos + 1);
    return u_pos / (double(n_pos) * double(n_neg));
}

std::optional<double> auc_pr(const std::vector<double>& scores,
                             const std::vector<int>& labels) {
    check_inputs(scores, labels);
    const std::size_t n = scores.size();
    std::size_t n_pos = 0;
    for (int y : labels) n_pos += std::size_t(y);
    if (n_pos == 0) return std::nullopt;

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

    double ap = 0.0;
    std::size_t hits = 0;
    for (std::size_t k = 0; k < n; ++k) {
        if (labels[order[k]] == 1) {
            ++hits;
            ap += double(hits) / double(k + 1);
        }
    }
    return ap / double(n_pos);
}

namespace {

struct Cell {
    double mean = 0.0;
    double stddev = 0.0;
    std::size_t defined = 0;
};

Cell cell_moments(const std::vector<std::optional<double>>& values) {
    Cell c;
    double sum = 0.0;
    for (const auto& v : values) {
        if (!v) continue;
        sum += *v;
        ++c.defined;
    }
    if (c.defined == 0) return c;
    c.mean = sum / double(c.defined);
    double acc = 0.0;
    for (const auto& v : values) {
        if (v) acc += (*v - c.mean) * (*v - c.mean);
    }
    c.stddev = std::sqrt(acc / double(c.defined));
    return c;
}

}  // namespace

SummaryTable aggregate_results(const std::vector<RunSummary>& runs) {
    if (runs.empty()) throw std::invalid_argument("no runs to aggregate");

    std::vector<std::string> models, datasets;
    auto index_of = [](std::vector<std::string>& seen, const std::string& name) {
        for (std::size_t i = 0; i < seen.size(); ++i) {
            if (seen[i] == name) return i;
        }
        seen.push_back(name);
        return seen.size() - 1;
    };

    std::map<std::pair<std::size_t, std::size_t>, Cell> grid;
    for (const auto& run : runs) {
        auto key = std::make_pair(index_of(models, run.model), index_of(datasets, run.dataset));
        if (grid.count(key)) {
            throw std::invalid_argument("duplicate (model, dataset) pair: " + run.model +
                                        " on " + run.dataset);
        }
        Cell c = cell_moments(run.chunk_values);
        if (c.defined == 0) {
            throw std::invalid_argument("no defined chunk metric for " + run.model + " on " +
                                        run.dataset);
        }
        grid[key] = c;
    }
    for (std::size_t m = 0; m < models.size(); ++m) {
        for (std::size_t d = 0; d < datasets.size(); ++d) {
            if (!grid.count({m, d})) {
                throw std::invalid_argument("model " + models[m] + " is missing dataset " +
                                            datasets[d]);
            }
        }
    }

    SummaryTable table;
    for (std::size_t m = 0; m < models.size(); ++m) {
        for (std::size_t d = 0; d < datasets.size(); ++d) {
            const Cell& c = grid[{m, d}];
            table.cells.push_back({models[m], datasets[d], c.mean, c.stddev, c.defined});
        }
    }

    // Per-dataset normalization base and average-tie ranks, higher
    // metric being better.
    std::vector<double> best(datasets.size(), 0.0);
    for (std::size_t d = 0; d < datasets.size(); ++d) {
        double b = grid[{std::size_t{0}, d}].mean;
        for (std::size_t m = 1; m < models.size(); ++m) b = std::max(b, grid[{m, d}].mean);
        best[d] = b;
    }
    std::vector<std::vector<double>> rank(models.size(), std::vector<double>(datasets.size()));
    for (std::size_t d = 0; d < datasets.size(); ++d) {
        std::vector<std::size_t> order(models.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return grid[{a, d}].mean > grid[{b, d}].mean;
        });
        std::size_t i = 0;
        while (i < order.size()) {
            std::size_t j = i;
            while (j < order.size() &&
                   grid[{order[j], d}].mean == grid[{order[i], d}].mean) {
                ++j;
            }
            double avg = 0.5 * double(i + 1 + j);
            for (std::size_t k = i; k < j; ++k) rank[order[k]][d] = avg;
            i = j;
        }
    }

    for (std::size_t m = 0; m < models.size(); ++m) {
        ModelAggregate agg;
        agg.model = models[m];
        for (std::size_t d = 0; d < datasets.size(); ++d) {
            double mean = grid[{m, d}].mean;
            agg.avg += mean;
            agg.n_avg += best[d] > 0.0 ? 100.0 * mean / best[d] : 0.0;
            agg.avg_rank += rank[m][d];
        }
        double nd = double(datasets.size());
        agg.avg /= nd;
        agg.n_avg /= nd;
        agg.avg_rank /= nd;
        table.models.push_back(agg);
    }
    return table;
}

}  // namespace delaybench

namespace delaybench {

const char* metric_name(MetricKind kind) {
    return kind == MetricKind::auc_roc ? "AUCROC" : "AUCPR";
}

std::optional<double> compute_metric(MetricKind kind, const std::vector<double>& scores,
                                     const std::vector<int>& labels) {
    return kind == MetricKind::auc_roc ? auc_roc(scores, labels) : auc_pr(scores, labels);
}

}  // namespace delaybench
