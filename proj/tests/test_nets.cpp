#include "doctest.h"

#include <cmath>

#include "pathclass/error.hpp"
#include "pathclass/models.hpp"
#include "pathclass/nets.hpp"
#include "pathclass/rng.hpp"

using namespace pathclass;

namespace {

CharSequence seq(int l, std::vector<int32_t> indices) {
    CharSequence s;
    s.l = l;
    s.indices = std::move(indices);
    return s;
}

std::vector<CharSequence> random_batch(Rng& rng, int n, int l, int m) {
    std::vector<CharSequence> out;
    for (int i = 0; i < n; ++i) {
        std::vector<int32_t> idx(static_cast<size_t>(l));
        for (auto& v : idx) v = static_cast<int32_t>(rng.index(static_cast<uint64_t>(m + 1)));
        out.push_back(seq(l, std::move(idx)));
    }
    return out;
}

// Planted char task: positives contain a run of index-1 characters.
void planted_char_data(Rng& rng, int n, int l, int m, std::vector<CharSequence>& xs,
                       std::vector<int>& ys) {
    for (int i = 0; i < n; ++i) {
        std::vector<int32_t> idx(static_cast<size_t>(l));
        for (auto& v : idx)
            v = static_cast<int32_t>(2 + rng.index(static_cast<uint64_t>(m - 1)));
        const bool pos = i % 2 == 0;
        if (pos) {
            const size_t at = rng.index(static_cast<uint64_t>(l - 3));
            idx[at] = idx[at + 1] = idx[at + 2] = 1;
        }
        xs.push_back(seq(l, std::move(idx)));
        ys.push_back(pos ? 1 : 0);
    }
}

}  // namespace

TEST_CASE("cnn and lstm gradients match central finite differences") {
    Rng rng(12);

    ModelSpec cnn;
    cnn.family = ModelFamily::char_cnn;
    cnn.hyperparams = {{"embed_dim", 6}, {"conv1_filters", 5}, {"conv1_width", 3},
                       {"pool_width", 2}, {"conv2_filters", 4}, {"conv2_width", 2},
                       {"dense_units", 5}};
    cnn.seed = 99;
    const auto batch4 = random_batch(rng, 4, 16, 7);
    const GradientCheckReport cr = gradient_check(cnn, batch4, {1, 0, 0, 1}, 200);
    CHECK(cr.n_parameters_sampled >= 200);
    CHECK(cr.max_relative_error < 1e-4);

    ModelSpec lstm;
    lstm.family = ModelFamily::char_lstm;
    lstm.hyperparams = {{"embed_dim", 5}, {"hidden", 8}};
    lstm.seed = 100;
    const auto batch2 = random_batch(rng, 2, 8, 6);
    const GradientCheckReport lr = gradient_check(lstm, batch2, {1, 0}, 200);
    CHECK(lr.n_parameters_sampled >= 200);
    CHECK(lr.max_relative_error < 1e-4);
}

TEST_CASE("gradient_check validates its inputs") {
    ModelSpec spec;
    spec.family = ModelFamily::naive_bayes;
    Rng rng(1);
    const auto batch = random_batch(rng, 2, 8, 4);
    CHECK_THROWS_AS(gradient_check(spec, batch, {0, 1}), InvalidInput);

    ModelSpec cnn;
    cnn.family = ModelFamily::char_cnn;
    CHECK_THROWS_AS(gradient_check(cnn, {}, {}), InvalidInput);
    CHECK_THROWS_AS(gradient_check(cnn, batch, {0}), InvalidInput);
}

TEST_CASE("one small gradient step decreases the batch loss at initialization") {
    Rng rng(21);

    CnnShape cshape;
    cshape.m = 6;
    cshape.l = 16;
    cshape.embed_dim = 6;
    cshape.conv1_filters = 6;
    cshape.conv1_width = 3;
    cshape.pool_width = 2;
    cshape.conv2_filters = 5;
    cshape.conv2_width = 2;
    cshape.dense_units = 6;
    const auto cnn = make_char_cnn(cshape);

    LstmShape lshape;
    lshape.m = 6;
    lshape.l = 10;
    lshape.embed_dim = 5;
    lshape.hidden = 7;
    const auto lstm = make_char_lstm(lshape);

    const auto batch = random_batch(rng, 6, 16, 6);
    const auto lbatch = random_batch(rng, 6, 10, 6);
    const std::vector<int> ys = {1, 0, 1, 1, 0, 0};

    for (const auto* pair : {&cnn, &lstm}) {
        const NetCore& net = **pair;
        const auto& b = pair == &cnn ? batch : lbatch;
        std::vector<double> params;
        net.init_params(params, 4242);
        REQUIRE(params.size() == net.n_params());
        std::vector<double> grad;
        const double before = net.loss_and_grad(params, b, ys, grad);
        REQUIRE(grad.size() == params.size());
        CHECK(std::isfinite(before));
        for (size_t i = 0; i < params.size(); ++i) params[i] -= 1e-3 * grad[i];
        const double after = net.loss(params, b, ys);
        CHECK(after < before);
    }
}

TEST_CASE("char_cnn learns a planted character motif") {
    Rng rng(33);
    std::vector<CharSequence> xs;
    std::vector<int> ys;
    planted_char_data(rng, 300, 24, 8, xs, ys);
    std::vector<CharSequence> holdout_x;
    std::vector<int> holdout_y;
    planted_char_data(rng, 100, 24, 8, holdout_x, holdout_y);

    ModelSpec spec;
    spec.family = ModelFamily::char_cnn;
    spec.hyperparams = {{"embed_dim", 8},   {"conv1_filters", 8}, {"conv1_width", 3},
                        {"pool_width", 2},  {"conv2_filters", 8}, {"conv2_width", 2},
                        {"dense_units", 8}, {"epochs", 12},       {"batch", 32},
                        {"lr", 0.01},       {"patience", 5},      {"val_fraction", 0.15}};
    spec.seed = 5;

    std::vector<FeatureInput> inputs(xs.begin(), xs.end());
    const auto model = fit(spec, FeatureKind::char_sequence, inputs, ys);

    int correct = 0;
    std::vector<double> scores;
    for (size_t i = 0; i < holdout_x.size(); ++i) {
        const double s = model->score(FeatureInput{holdout_x[i]});
        CHECK(s >= 0.0);
        CHECK(s <= 1.0);
        correct += (s >= 0.5) == (holdout_y[i] == 1) ? 1 : 0;
    }
    CHECK(correct >= 90);
}

TEST_CASE("char nets are deterministic and round-trip their artifacts") {
    Rng rng(44);
    std::vector<CharSequence> xs;
    std::vector<int> ys;
    planted_char_data(rng, 80, 16, 6, xs, ys);
    std::vector<FeatureInput> inputs(xs.begin(), xs.end());

    for (ModelFamily family : {ModelFamily::char_cnn, ModelFamily::char_lstm}) {
        ModelSpec spec;
        spec.family = family;
        spec.hyperparams = family == ModelFamily::char_cnn
                               ? Hyperparams{{"embed_dim", 4}, {"conv1_filters", 4},
                                             {"conv1_width", 3}, {"pool_width", 2},
                                             {"conv2_filters", 4}, {"conv2_width", 2},
                                             {"dense_units", 4}, {"epochs", 2}, {"batch", 16}}
                               : Hyperparams{{"embed_dim", 4}, {"hidden", 5}, {"epochs", 2},
                                             {"batch", 16}};
        spec.seed = 321;

        const auto a = fit(spec, FeatureKind::char_sequence, inputs, ys);
        const auto b = fit(spec, FeatureKind::char_sequence, inputs, ys);
        const auto c = load_model(save_model(*a));
        for (const auto& x : inputs) {
            const double sa = a->score(x);
            CHECK(sa == b->score(x));  // same seed, same data -> identical
            CHECK(sa == c->score(x));  // artifact round-trip is bit-exact
        }

        // sequences of the wrong length are rejected
        CHECK_THROWS_AS(a->score(FeatureInput{seq(3, {0, 1, 2})}), InvalidInput);
    }
}

TEST_CASE("net shape validation rejects impossible geometry") {
    CnnShape bad;
    bad.m = 4;
    bad.l = 2;  // shorter than conv1_width
    bad.embed_dim = 4;
    bad.conv1_filters = 4;
    bad.conv1_width = 5;
    bad.pool_width = 3;
    bad.conv2_filters = 4;
    bad.conv2_width = 3;
    bad.dense_units = 4;
    CHECK_THROWS_AS(make_char_cnn(bad), InvalidInput);

    LstmShape lbad;
    lbad.m = 0;  // empty alphabet
    lbad.l = 8;
    CHECK_THROWS_AS(make_char_lstm(lbad), InvalidInput);
}
