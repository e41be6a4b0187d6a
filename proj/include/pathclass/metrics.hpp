#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pathclass/corpus.hpp"
#include "pathclass/featurize.hpp"
#include "pathclass/models.hpp"

namespace pathclass {

// Probability that a random positive outranks a random negative, ties counted
// one half. Rejects single-class label sets.
double roc_auc(const std::vector<double>& scores, const std::vector<int>& labels);

struct Confusion {
    int64_t tp = 0, fp = 0, tn = 0, fn = 0;
    double accuracy = 0.0;
    std::optional<double> precision;  // empty when nothing predicted positive
    std::optional<double> recall;     // empty when no positives in labels
};

// Predicted positive iff score >= threshold.
Confusion confusion_at(const std::vector<double>& scores, const std::vector<int>& labels,
                       double threshold);

struct MetricSummary {
    std::vector<std::optional<double>> per_fold;
    double mean = 0.0;
    double stddev = 0.0;  // population std over defined folds
    int n_defined = 0;
};

struct EvalSummary {
    MetricSummary auc, accuracy, precision, recall;
    std::vector<std::string> warnings;
};

// Per fold: fit feature space and model on the other folds, evaluate on the
// fold. Feature fitting never sees test-fold records (checked structurally
// via fold fingerprints). Undefined fold metrics are excluded from the
// aggregates with a warning.
EvalSummary crossval_evaluate(const ModelSpec& spec, const FeatureConfig& features,
                              const Dataset& dataset, const FoldAssignment& folds,
                              double threshold);

struct FprCurve {
    std::vector<double> thresholds;  // strictly increasing
    std::vector<double> fpr;         // non-increasing
    size_t n = 0;
};

// FPR(t) = |{score >= t}| / N over a benign score set.
FprCurve fpr_curve(const std::vector<double>& scores, const std::vector<double>& thresholds);

MetricSummary summarize_folds(const std::vector<std::optional<double>>& per_fold);

}  // namespace pathclass
