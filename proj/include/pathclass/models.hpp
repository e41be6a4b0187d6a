#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "json.hpp"
#include "pathclass/featurize.hpp"

namespace pathclass {

enum class ModelFamily { logreg, naive_bayes, boosted_trees, char_cnn, char_lstm };

std::string model_family_name(ModelFamily family);
ModelFamily model_family_from_name(std::string_view name);

// Family-specific hyperparameters as a key-value set, validated before fit.
// Unknown keys are rejected; missing keys take the defaults below.
//
//   logreg:        epochs=50 lr=0.1 l2=1e-4 batch=256
//   naive_bayes:   alpha=1
//   boosted_trees: rounds=50 max_depth=3
//   char_cnn:      embed_dim=32 conv1_filters=64 conv1_width=5 pool_width=3
//                  conv2_filters=64 conv2_width=3 dense_units=64
//                  epochs=15 batch=64 lr=1e-3 patience=3 val_fraction=0.1
//   char_lstm:     embed_dim=32 hidden=64
//                  epochs=15 batch=64 lr=1e-3 patience=3 val_fraction=0.1
using Hyperparams = std::map<std::string, double>;

struct ModelSpec {
    ModelFamily family = ModelFamily::logreg;
    Hyperparams hyperparams;
    uint64_t seed = 0;
};

// Fills in defaults and rejects unknown or out-of-range values.
Hyperparams resolve_hyperparams(ModelFamily family, const Hyperparams& given);

class TrainedModel {
public:
    virtual ~TrainedModel() = default;

    const ModelSpec& spec() const { return spec_; }
    FeatureKind binding() const { return binding_; }
    uint64_t training_fingerprint() const { return training_fingerprint_; }
    uint64_t feature_space_fingerprint() const { return feature_space_fingerprint_; }

    // Positive-class confidence in [0, 1]. Rejects inputs that do not match
    // the model's feature binding.
    double score(const FeatureInput& input) const;

    nlohmann::json to_json() const;

protected:
    virtual double score_sparse(const SparseVector& x) const;
    virtual double score_sequence(const CharSequence& x) const;
    virtual void params_to_json(nlohmann::json& out) const = 0;

    ModelSpec spec_;
    FeatureKind binding_ = FeatureKind::tfidf_words;
    uint64_t training_fingerprint_ = 0;
    uint64_t feature_space_fingerprint_ = 0;

    friend std::unique_ptr<TrainedModel> load_model(const std::string& bytes);
};

// Fits a model of the requested family. Inputs must be non-empty, match the
// binding, and contain only finite values. Single-class labels produce a
// constant model emitting that class's empirical prior.
std::unique_ptr<TrainedModel> fit(const ModelSpec& spec, FeatureKind binding,
                                  const std::vector<FeatureInput>& inputs,
                                  const std::vector<int>& labels,
                                  uint64_t training_fingerprint = 0,
                                  uint64_t feature_space_fingerprint = 0);

// Versioned artifact; load(save(m)) reproduces scores bit-identically.
std::string save_model(const TrainedModel& model);
std::unique_ptr<TrainedModel> load_model(const std::string& bytes);
void save_model_file(const TrainedModel& model, const std::string& file);
std::unique_ptr<TrainedModel> load_model_file(const std::string& file);

struct GradientCheckReport {
    double max_relative_error = 0.0;
    int n_parameters_sampled = 0;
};

// Compares analytic gradients of a freshly initialized char_cnn/char_lstm
// against central finite differences (step 1e-5) on sampled parameters.
GradientCheckReport gradient_check(const ModelSpec& spec,
                                   const std::vector<CharSequence>& batch,
                                   const std::vector<int>& labels,
                                   int n_samples = 200);

// A feature space plus a model trained on it: scores raw paths. Construction
// rejects mismatched fingerprints.
class PathScorer {
public:
    PathScorer(FeatureSpace features, std::shared_ptr<const TrainedModel> model);

    double score(std::string_view path) const;
    const FeatureSpace& features() const { return features_; }
    const TrainedModel& model() const { return *model_; }

private:
    FeatureSpace features_;
    std::shared_ptr<const TrainedModel> model_;
};

}  // namespace pathclass
