#include <algorithm>
#include <cmath>

#include "models_internal.hpp"
#include "pathclass/error.hpp"
#include "pathclass/rng.hpp"

namespace pathclass::detail {

using nlohmann::json;

namespace {

double sigmoid(double z) { return z >= 0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z)); }

// log(1 + e^z) without overflow.
double softplus(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

double dot_sparse(const std::vector<double>& w, const SparseVector& x) {
    double z = 0.0;
    for (const auto& [col, v] : x.entries) z += w[static_cast<size_t>(col)] * v;
    return z;
}

class LogRegModel final : public ModelBase {
public:
    LogRegModel(const FitContext& ctx, std::vector<double> weights, double bias)
        : ModelBase(ctx), weights_(std::move(weights)), bias_(bias) {}

    double score_sparse(const SparseVector& x) const override {
        if (x.dims != weights_.size())
            throw InvalidInput("logreg: input dimension mismatch");
        return sigmoid(dot_sparse(weights_, x) + bias_);
    }

protected:
    void params_to_json(json& out) const override {
        out["dims"] = weights_.size();
        out["weights"] = doubles_to_base64(weights_);
        out["bias"] = bias_;
    }

private:
    std::vector<double> weights_;
    double bias_;
};

// Full-dataset objective: mean logistic loss plus (l2/2)||w||^2.
double logreg_objective(const std::vector<double>& w, double b,
                        const std::vector<FeatureInput>& inputs, const std::vector<int>& labels,
                        double l2) {
    double loss = 0.0;
    for (size_t i = 0; i < inputs.size(); ++i) {
        const auto& x = std::get<SparseVector>(inputs[i]);
        const double z = dot_sparse(w, x) + b;
        loss += softplus(z) - static_cast<double>(labels[i]) * z;
    }
    loss /= static_cast<double>(inputs.size());
    double penalty = 0.0;
    for (double v : w) penalty += v * v;
    return loss + 0.5 * l2 * penalty;
}

}  // namespace

std::unique_ptr<TrainedModel> fit_logreg(const FitContext& ctx,
                                         const std::vector<FeatureInput>& inputs,
                                         const std::vector<int>& labels) {
    const auto& hp = ctx.spec.hyperparams;
    const int epochs = static_cast<int>(hp.at("epochs"));
    const size_t batch = static_cast<size_t>(hp.at("batch"));
    const double l2 = hp.at("l2");
    double lr0 = hp.at("lr");

    const size_t n = inputs.size();
    const size_t dims = std::get<SparseVector>(inputs[0]).dims;
    std::vector<double> w(dims, 0.0);
    double b = 0.0;

    Rng rng(derive_seed(ctx.spec.seed, "logreg"));
    std::vector<size_t> order(n);
    for (size_t i = 0; i < n; ++i) order[i] = i;

    double best = logreg_objective(w, b, inputs, labels, l2);
    for (int epoch = 1; epoch <= epochs; ++epoch) {
        const std::vector<double> w_before = w;
        const double b_before = b;
        const double lr = lr0 / std::sqrt(static_cast<double>(epoch));

        rng.shuffle(order);
        for (size_t start = 0; start < n; start += batch) {
            const size_t end = std::min(n, start + batch);
            const double inv = 1.0 / static_cast<double>(end - start);

            // Accumulate mean gradient of the batch, then one update.
            double gb = 0.0;
            std::vector<std::pair<size_t, double>> gw;  // sparse accumulation
            for (size_t k = start; k < end; ++k) {
                const auto& x = std::get<SparseVector>(inputs[order[k]]);
                const double err = sigmoid(dot_sparse(w, x) + b) -
                                   static_cast<double>(labels[order[k]]);
                gb += err * inv;
                for (const auto& [col, v] : x.entries)
                    gw.emplace_back(static_cast<size_t>(col), err * inv * v);
            }
            // L2 term applied densely; weight decay form keeps it O(dims).
            if (l2 > 0.0) {
                const double decay = 1.0 - lr * l2;
                for (double& v : w) v *= decay;
            }
            for (const auto& [col, g] : gw) w[col] -= lr * g;
            b -= lr * gb;
        }

        // The schedule is a heuristic; this safeguard makes the full-set
        // objective non-increasing across epochs by construction.
        const double now = logreg_objective(w, b, inputs, labels, l2);
        if (now > best) {
            w = w_before;
            b = b_before;
            lr0 *= 0.5;
        } else {
            best = now;
        }
    }
    return std::make_unique<LogRegModel>(ctx, std::move(w), b);
}

std::unique_ptr<TrainedModel> load_logreg(const json& params, const FitContext& ctx) {
    auto weights = doubles_from_base64(params.at("weights").get<std::string>());
    if (weights.size() != params.at("dims").get<size_t>())
        throw FormatError("logreg artifact: weight count does not match dims");
    return std::make_unique<LogRegModel>(ctx, std::move(weights),
                                         params.at("bias").get<double>());
}

namespace {

class NaiveBayesModel final : public ModelBase {
public:
    NaiveBayesModel(const FitContext& ctx, double log_prior_neg, double log_prior_pos,
                    std::vector<double> llh_neg, std::vector<double> llh_pos)
        : ModelBase(ctx),
          log_prior_{log_prior_neg, log_prior_pos},
          llh_neg_(std::move(llh_neg)),
          llh_pos_(std::move(llh_pos)) {}

    double score_sparse(const SparseVector& x) const override {
        if (x.dims != llh_neg_.size())
            throw InvalidInput("naive_bayes: input dimension mismatch");
        double s_neg = log_prior_[0], s_pos = log_prior_[1];
        for (const auto& [col, v] : x.entries) {
            s_neg += v * llh_neg_[static_cast<size_t>(col)];
            s_pos += v * llh_pos_[static_cast<size_t>(col)];
        }
        // P(pos|x) = e^{s_pos} / (e^{s_pos} + e^{s_neg}), computed stably.
        return sigmoid(s_pos - s_neg);
    }

protected:
    void params_to_json(json& out) const override {
        out["dims"] = llh_neg_.size();
        out["log_prior_neg"] = log_prior_[0];
        out["log_prior_pos"] = log_prior_[1];
        out["llh_neg"] = doubles_to_base64(llh_neg_);
        out["llh_pos"] = doubles_to_base64(llh_pos_);
    }

private:
    double log_prior_[2];
    std::vector<double> llh_neg_, llh_pos_;
};

}  // namespace

std::unique_ptr<TrainedModel> fit_naive_bayes(const FitContext& ctx,
                                              const std::vector<FeatureInput>& inputs,
                                              const std::vector<int>& labels) {
    const double alpha = ctx.spec.hyperparams.at("alpha");
    const size_t dims = std::get<SparseVector>(inputs[0]).dims;
    if (dims == 0) throw InvalidInput("naive_bayes: zero-dimensional features");

    // Multinomial counts; TF-IDF weights enter as fractional counts.
    std::vector<double> sum_neg(dims, 0.0), sum_pos(dims, 0.0);
    double n_neg = 0.0, n_pos = 0.0;
    for (size_t i = 0; i < inputs.size(); ++i) {
        const auto& x = std::get<SparseVector>(inputs[i]);
        auto& sums = labels[i] == 1 ? sum_pos : sum_neg;
        (labels[i] == 1 ? n_pos : n_neg) += 1.0;
        for (const auto& [col, v] : x.entries) {
            if (v < 0.0) throw InvalidInput("naive_bayes requires nonnegative features");
            sums[static_cast<size_t>(col)] += v;
        }
    }

    double total_neg = 0.0, total_pos = 0.0;
    for (size_t j = 0; j < dims; ++j) {
        total_neg += sum_neg[j];
        total_pos += sum_pos[j];
    }
    const double v = static_cast<double>(dims);
    std::vector<double> llh_neg(dims), llh_pos(dims);
    for (size_t j = 0; j < dims; ++j) {
        llh_neg[j] = std::log((alpha + sum_neg[j]) / (alpha * v + total_neg));
        llh_pos[j] = std::log((alpha + sum_pos[j]) / (alpha * v + total_pos));
    }
    const double n = n_neg + n_pos;
    return std::make_unique<NaiveBayesModel>(ctx, std::log(n_neg / n), std::log(n_pos / n),
                                             std::move(llh_neg), std::move(llh_pos));
}

std::unique_ptr<TrainedModel> load_naive_bayes(const json& params, const FitContext& ctx) {
    auto llh_neg = doubles_from_base64(params.at("llh_neg").get<std::string>());
    auto llh_pos = doubles_from_base64(params.at("llh_pos").get<std::string>());
    const size_t dims = params.at("dims").get<size_t>();
    if (llh_neg.size() != dims || llh_pos.size() != dims)
        throw FormatError("naive_bayes artifact: likelihood table size mismatch");
    return std::make_unique<NaiveBayesModel>(ctx, params.at("log_prior_neg").get<double>(),
                                             params.at("log_prior_pos").get<double>(),
                                             std::move(llh_neg), std::move(llh_pos));
}

}  // namespace pathclass::detail
