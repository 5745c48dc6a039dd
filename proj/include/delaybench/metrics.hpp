#pragma once

#include <optional>
#include <string>
#include <vector>

namespace delaybench {

// Area under the ROC curve by the rank statistic: P(score+ > score-)
// plus half the tie probability. Undefined (nullopt) when the labels
// are single-class, so degenerate chunks can be excluded upstream.
std::optional<double> auc_roc(const std::vector<double>& scores,
                              const std::vector<int>& labels);

// Average precision over the descending-score ranking. Tied scores
// keep their input order (stable sort). Undefined without positives.
std::optional<double> auc_pr(const std::vector<double>& scores,
                             const std::vector<int>& labels);

enum class MetricKind { auc_roc, auc_pr };

const char* metric_name(MetricKind kind);

std::optional<double> compute_metric(MetricKind kind, const std::vector<double>& scores,
                                     const std::vector<int>& labels);

// Chunk metric values of one model on one dataset. Undefined entries
// are degenerate chunks and stay out of every aggregate.
struct RunSummary {
    std::string model;
    std::string dataset;
    std::vector<std::optional<double>> chunk_values;
};

struct CellAggregate {
    std::string model;
    std::string dataset;
    double mean = 0.0;
    double stddev = 0.0;
    std::size_t defined_chunks = 0;
};

struct ModelAggregate {
    std::string model;
    double avg = 0.0;       // mean of per-dataset means
    double n_avg = 0.0;     // mean of 100 * mean / best mean per dataset
    double avg_rank = 0.0;  // mean rank per dataset, ties averaged
};

struct SummaryTable {
    std::vector<CellAggregate> cells;
    std::vector<ModelAggregate> models;
};

// Cross-model aggregation in the usual benchmark-table layout. Models
// and datasets keep first-appearance order; every model must cover the
// same datasets and each cell needs at least one defined chunk.
SummaryTable aggregate_results(const std::vector<RunSummary>& runs);

}  // namespace delaybench
