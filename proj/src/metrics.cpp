#include "pathclass/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "pathclass/error.hpp"

namespace pathclass {

double roc_auc(const std::vector<double>& scores, const std::vector<int>& labels) {
    if (scores.size() != labels.size())
        throw InvalidInput("roc_auc: scores and labels differ in length");
    if (scores.empty()) throw InvalidInput("roc_auc on empty input");

    size_t n_pos = 0;
    for (int y : labels) {
        if (y != 0 && y != 1) throw InvalidInput("roc_auc: labels must be 0/1");
        n_pos += static_cast<size_t>(y);
    }
    const size_t n_neg = labels.size() - n_pos;
    if (n_pos == 0 || n_neg == 0)
        throw UndefinedMetric("roc_auc undefined for single-class labels");

    // Mann-Whitney form: average ranks over ties, sum positive ranks.
    std::vector<size_t> order(scores.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](size_t a, size_t b) { return scores[a] < scores[b]; });

    double rank_sum_pos = 0.0;
    size_t i = 0;
    while (i < order.size()) {
        size_t j = i;
        while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
        const double avg_rank = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j));
        for (size_t k = i; k < j; ++k) {
            if (labels[order[k]] == 1) rank_sum_pos += avg_rank;
        }
        i = j;
    }
    const double np = static_cast<double>(n_pos), nn = static_cast<double>(n_neg);
    return (rank_sum_pos - np * (np + 1.0) / 2.0) / (np * nn);
}

Confusion confusion_at(const std::vector<double>& scores, const std::vector<int>& labels,
                       double threshold) {
    if (scores.size() != labels.size())
        throw InvalidInput("confusion_at: scores and labels differ in length");
    if (scores.empty()) throw InvalidInput("confusion_at on empty input");

    Confusion c;
    for (size_t i = 0; i < scores.size(); ++i) {
        const bool predicted = scores[i] >= threshold;
        const bool actual = labels[i] == 1;
        if (predicted && actual) ++c.tp;
        else if (predicted && !actual) ++c.fp;
        else if (!predicted && actual) ++c.fn;
        else ++c.tn;
    }
    c.accuracy = static_cast<double>(c.tp + c.tn) / static_cast<double>(scores.size());
    if (c.tp + c.fp > 0) c.precision = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
    if (c.tp + c.fn > 0) c.recall = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
    return c;
}

MetricSummary summarize_folds(const std::vector<std::optional<double>>& per_fold) {
    MetricSummary s;
    s.per_fold = per_fold;
    double sum = 0.0;
    for (const auto& v : per_fold) {
        if (v) {
            sum += *v;
            ++s.n_defined;
        }
    }
    if (s.n_defined == 0) return s;
    s.mean = sum / s.n_defined;
    double ss = 0.0;
    for (const auto& v : per_fold) {
        if (v) ss += (*v - s.mean) * (*v - s.mean);
    }
    s.stddev = std::sqrt(ss / s.n_defined);
    return s;
}

EvalSummary crossval_evaluate(const ModelSpec& spec, const FeatureConfig& features,
                              const Dataset& dataset, const FoldAssignment& folds,
                              double threshold) {
    if (folds.fold_of.size() != dataset.size())
        throw InvalidInput("crossval_evaluate: fold assignment does not match dataset");
    if (folds.k < 2) throw InvalidInput("crossval_evaluate: need k >= 2");

    std::vector<std::optional<double>> auc(folds.k), acc(folds.k), prec(folds.k), rec(folds.k);
    std::vector<std::string> warnings;

    for (int fold = 0; fold < folds.k; ++fold) {
        const Dataset train = subset_dataset(dataset, fold_indices(folds, fold, true));
        const Dataset test = subset_dataset(dataset, fold_indices(folds, fold, false));
        if (train.empty() || test.empty()) {
            warnings.push_back("fold " + std::to_string(fold) + ": empty side, skipped");
            continue;
        }

        const FeatureSpace fs = fit_feature_space(train, features);
        // Leakage guard: the feature space must have been fitted on the train
        // side only, never on anything containing the test fold.
        if (fs.training_fingerprint != dataset_fingerprint(train) ||
            fs.training_fingerprint == dataset_fingerprint(test)) {
            throw Error("crossval leakage guard tripped on fold " + std::to_string(fold));
        }

        std::vector<FeatureInput> train_x, test_x;
        std::vector<int> train_y, test_y;
        train_x.reserve(train.size());
        test_x.reserve(test.size());
        for (const auto& r : train.records) {
            train_x.push_back(fs.transform(r.path));
            train_y.push_back(r.label == Label::positive ? 1 : 0);
        }
        for (const auto& r : test.records) {
            test_x.push_back(fs.transform(r.path));
            test_y.push_back(r.label == Label::positive ? 1 : 0);
        }

        const auto model = fit(spec, fs.kind, train_x, train_y, fs.training_fingerprint,
                               fs.content_fingerprint());

        std::vector<double> scores;
        scores.reserve(test_x.size());
        for (const auto& x : test_x) scores.push_back(model->score(x));

        try {
            auc[fold] = roc_auc(scores, test_y);
        } catch (const UndefinedMetric&) {
            warnings.push_back("fold " + std::to_string(fold) +
                               ": single-class test fold, AUC undefined");
        }
        const Confusion c = confusion_at(scores, test_y, threshold);
        acc[fold] = c.accuracy;
        if (c.precision) {
            prec[fold] = c.precision;
        } else {
            warnings.push_back("fold " + std::to_string(fold) +
                               ": no predicted positives, precision undefined");
        }
        if (c.recall) {
            rec[fold] = c.recall;
        } else {
            warnings.push_back("fold " + std::to_string(fold) +
                               ": no positives present, recall undefined");
        }
    }

    EvalSummary out;
    out.auc = summarize_folds(auc);
    out.accuracy = summarize_folds(acc);
    out.precision = summarize_folds(prec);
    out.recall = summarize_folds(rec);
    out.warnings = std::move(warnings);
    return out;
}

FprCurve fpr_curve(const std::vector<double>& scores, const std::vector<double>& thresholds) {
    if (scores.empty()) throw InvalidInput("fpr_curve on empty score set");
    if (thresholds.empty()) throw InvalidInput("fpr_curve with no thresholds");
    for (size_t i = 1; i < thresholds.size(); ++i) {
        if (!(thresholds[i] > thresholds[i - 1]))
            throw InvalidInput("fpr_curve thresholds must be strictly increasing");
    }

    std::vector<double> sorted(scores);
    std::sort(sorted.begin(), sorted.end());

    FprCurve curve;
    curve.thresholds = thresholds;
    curve.n = scores.size();
    curve.fpr.reserve(thresholds.size());
    for (double t : thresholds) {
        const auto at = std::lower_bound(sorted.begin(), sorted.end(), t);
        curve.fpr.push_back(static_cast<double>(sorted.end() - at) /
                            static_cast<double>(sorted.size()));
    }
    return curve;
}

}  // namespace pathclass
