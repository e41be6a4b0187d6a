#include "doctest.h"

#include <cmath>

#include "pathclass/error.hpp"
#include "pathclass/models.hpp"
#include "pathclass/rng.hpp"

using namespace pathclass;

namespace {

SparseVector sv(size_t dims, std::vector<std::pair<int, double>> entries) {
    SparseVector x;
    x.dims = dims;
    x.entries = std::move(entries);
    return x;
}

}  // namespace

TEST_CASE("adaboost matches a two-round hand computation with stumps") {
    // 1D points 1,2,3,4 with labels +,+,-,+ and depth-1 trees.
    //
    // Round 1: the best weighted-Gini split is {<=2 | >=3}; both leaves vote +
    // (the right leaf ties 1/4 vs 1/4 and ties go positive), so record 3 is
    // wrong: eps1 = 1/4, alpha1 = ln(3)/2. Reweighting puts 1/2 on record 3.
    // Round 2: same split, but the right leaf now votes -, so record 4 is
    // wrong: eps2 = 1/6, alpha2 = ln(5)/2.
    // Votes: x<=2 -> both + (score 1); x>=3 -> split vote, score
    // alpha1/(alpha1+alpha2) = ln3/(ln3+ln5).
    std::vector<FeatureInput> inputs = {
        sv(1, {{0, 1.0}}), sv(1, {{0, 2.0}}), sv(1, {{0, 3.0}}), sv(1, {{0, 4.0}})};
    std::vector<int> labels = {1, 1, 0, 1};

    ModelSpec spec;
    spec.family = ModelFamily::boosted_trees;
    spec.hyperparams = {{"rounds", 2}, {"max_depth", 1}};
    const auto model = fit(spec, FeatureKind::tfidf_words, inputs, labels);

    const double split_vote = std::log(3.0) / (std::log(3.0) + std::log(5.0));
    CHECK(model->score(inputs[0]) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(model->score(inputs[1]) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(model->score(inputs[2]) == doctest::Approx(split_vote).epsilon(1e-9));
    CHECK(model->score(inputs[3]) == doctest::Approx(split_vote).epsilon(1e-9));
}

TEST_CASE("adaboost halts on an unlearnable round and falls back to the prior") {
    // identical feature rows with balanced labels: the stump is a majority
    // leaf, eps = 1/2, so boosting stops with an empty ensemble
    std::vector<FeatureInput> inputs;
    std::vector<int> labels;
    for (int i = 0; i < 6; ++i) {
        inputs.push_back(sv(1, {{0, 1.0}}));
        labels.push_back(i % 2);
    }
    ModelSpec spec;
    spec.family = ModelFamily::boosted_trees;
    const auto model = fit(spec, FeatureKind::tfidf_words, inputs, labels);
    CHECK(model->score(inputs[0]) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(model->score(FeatureInput{sv(1, {{0, 99.0}})}) ==
          doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("a perfect first tree yields unanimous extreme votes") {
    std::vector<FeatureInput> inputs;
    std::vector<int> labels;
    for (int i = 0; i < 20; ++i) {
        const bool pos = i % 2 == 0;
        inputs.push_back(sv(2, {{0, pos ? 2.0 : -1.0}}));
        labels.push_back(pos ? 1 : 0);
    }
    ModelSpec spec;
    spec.family = ModelFamily::boosted_trees;
    spec.hyperparams = {{"rounds", 50}, {"max_depth", 2}};
    const auto model = fit(spec, FeatureKind::tfidf_words, inputs, labels);
    for (size_t i = 0; i < inputs.size(); ++i) {
        CHECK(model->score(inputs[i]) == (labels[i] == 1 ? 1.0 : 0.0));
    }
}

TEST_CASE("depth-2 trees learn conjunctions with implicit sparse zeros") {
    // label = x0 and x1 where absent entries mean zero; needs two levels
    std::vector<FeatureInput> inputs;
    std::vector<int> labels;
    for (int rep = 0; rep < 4; ++rep) {
        for (int a = 0; a < 2; ++a) {
            for (int b = 0; b < 2; ++b) {
                std::vector<std::pair<int, double>> entries;
                if (a) entries.emplace_back(0, 1.0);
                if (b) entries.emplace_back(1, 1.0);
                inputs.push_back(sv(2, std::move(entries)));
                labels.push_back(a & b);
            }
        }
    }
    ModelSpec spec;
    spec.family = ModelFamily::boosted_trees;
    spec.hyperparams = {{"rounds", 10}, {"max_depth", 2}};
    const auto model = fit(spec, FeatureKind::tfidf_words, inputs, labels);
    for (size_t i = 0; i < inputs.size(); ++i) {
        CHECK((model->score(inputs[i]) >= 0.5) == (labels[i] == 1));
    }
}

TEST_CASE("adaboost handles negative feature values around the zero block") {
    // negatives cluster at -2, positives at +3, with explicit zeros absent;
    // the split threshold must order {-2} < {0 implicit} < {3} correctly
    std::vector<FeatureInput> inputs;
    std::vector<int> labels;
    for (int i = 0; i < 5; ++i) {
        inputs.push_back(sv(1, {{0, -2.0}}));
        labels.push_back(0);
        inputs.push_back(sv(1, {}));  // implicit zero, negative class
        labels.push_back(0);
        inputs.push_back(sv(1, {{0, 3.0}}));
        labels.push_back(1);
    }
    ModelSpec spec;
    spec.family = ModelFamily::boosted_trees;
    spec.hyperparams = {{"rounds", 3}, {"max_depth", 1}};
    const auto model = fit(spec, FeatureKind::tfidf_words, inputs, labels);
    CHECK(model->score(FeatureInput{sv(1, {{0, -2.0}})}) < 0.5);
    CHECK(model->score(FeatureInput{sv(1, {})}) < 0.5);
    CHECK(model->score(FeatureInput{sv(1, {{0, 3.0}})}) >= 0.5);
    CHECK(model->score(FeatureInput{sv(1, {{0, 2.9}})}) >= 0.5);  // same side as +3 cluster
}

TEST_CASE("boosted model round-trips through its artifact") {
    Rng rng(77);
    std::vector<FeatureInput> inputs;
    std::vector<int> labels;
    for (int i = 0; i < 40; ++i) {
        std::vector<std::pair<int, double>> entries;
        for (int t = 0; t < 3; ++t) {
            if (rng.real() < 0.7) entries.emplace_back(t, rng.real() * 2 - 0.5);
        }
        inputs.push_back(sv(3, std::move(entries)));
        labels.push_back(static_cast<int>(rng.index(2)));
    }
    labels[0] = 0;
    labels[1] = 1;
    ModelSpec spec;
    spec.family = ModelFamily::boosted_trees;
    spec.hyperparams = {{"rounds", 5}};
    const auto model = fit(spec, FeatureKind::tfidf_words, inputs, labels);
    const auto back = load_model(save_model(*model));
    for (const auto& x : inputs) CHECK(model->score(x) == back->score(x));
}
