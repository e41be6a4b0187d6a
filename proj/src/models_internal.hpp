#pragma once

// Shared plumbing for the model family implementations: parameter blob
// encoding, input validation, and the per-family fit/load entry points
// dispatched from models_common.cpp.

#include <memory>
#include <string>
#include <vector>

#include "json.hpp"
#include "pathclass/models.hpp"

namespace pathclass::detail {

// Doubles serialized as base64 little-endian bytes: JSON-safe and bit-exact.
std::string doubles_to_base64(const std::vector<double>& v);
std::vector<double> doubles_from_base64(const std::string& b64);

// Requires: inputs non-empty, labels matched 0/1, variants match the binding,
// sparse dims consistent, all values finite. Returns dims (sparse) or l (char).
size_t validate_fit_inputs(FeatureKind binding, const std::vector<FeatureInput>& inputs,
                           const std::vector<int>& labels);

// Largest character index over a char batch (for sizing embeddings).
int max_char_index(const std::vector<FeatureInput>& inputs);

struct FitContext {
    ModelSpec spec;  // hyperparams already resolved
    FeatureKind binding;
    uint64_t training_fingerprint = 0;
    uint64_t feature_space_fingerprint = 0;
};

std::unique_ptr<TrainedModel> fit_logreg(const FitContext& ctx,
                                         const std::vector<FeatureInput>& inputs,
                                         const std::vector<int>& labels);
std::unique_ptr<TrainedModel> fit_naive_bayes(const FitContext& ctx,
                                              const std::vector<FeatureInput>& inputs,
                                              const std::vector<int>& labels);
std::unique_ptr<TrainedModel> fit_boosted_trees(const FitContext& ctx,
                                                const std::vector<FeatureInput>& inputs,
                                                const std::vector<int>& labels);
std::unique_ptr<TrainedModel> fit_char_net(const FitContext& ctx,
                                           const std::vector<FeatureInput>& inputs,
                                           const std::vector<int>& labels);

std::unique_ptr<TrainedModel> load_logreg(const nlohmann::json& params, const FitContext& ctx);
std::unique_ptr<TrainedModel> load_naive_bayes(const nlohmann::json& params,
                                               const FitContext& ctx);
std::unique_ptr<TrainedModel> load_boosted_trees(const nlohmann::json& params,
                                                 const FitContext& ctx);
std::unique_ptr<TrainedModel> load_char_net(const nlohmann::json& params, const FitContext& ctx);
std::unique_ptr<TrainedModel> load_prior(const nlohmann::json& params, const FitContext& ctx);

std::unique_ptr<TrainedModel> make_prior_model(const FitContext& ctx, double prior);

// Base for concrete models: stamps the shared TrainedModel fields.
class ModelBase : public TrainedModel {
public:
    explicit ModelBase(const FitContext& ctx) {
        spec_ = ctx.spec;
        binding_ = ctx.binding;
        training_fingerprint_ = ctx.training_fingerprint;
        feature_space_fingerprint_ = ctx.feature_space_fingerprint;
    }
};

}  // namespace pathclass::detail
