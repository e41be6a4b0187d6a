#include <algorithm>
#include <cmath>

#include "models_internal.hpp"
#include "pathclass/error.hpp"
#include "pathclass/nets.hpp"
#include "pathclass/rng.hpp"

namespace pathclass::detail {

using nlohmann::json;

namespace {

double sigmoid(double z) { return z >= 0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z)); }

std::unique_ptr<NetCore> net_from(const ModelSpec& spec, int m, int l) {
    const auto& hp = spec.hyperparams;
    if (spec.family == ModelFamily::char_cnn) {
        CnnShape s;
        s.m = m;
        s.l = l;
        s.embed_dim = static_cast<int>(hp.at("embed_dim"));
        s.conv1_filters = static_cast<int>(hp.at("conv1_filters"));
        s.conv1_width = static_cast<int>(hp.at("conv1_width"));
        s.pool_width = static_cast<int>(hp.at("pool_width"));
        s.conv2_filters = static_cast<int>(hp.at("conv2_filters"));
        s.conv2_width = static_cast<int>(hp.at("conv2_width"));
        s.dense_units = static_cast<int>(hp.at("dense_units"));
        return make_char_cnn(s);
    }
    if (spec.family == ModelFamily::char_lstm) {
        LstmShape s;
        s.m = m;
        s.l = l;
        s.embed_dim = static_cast<int>(hp.at("embed_dim"));
        s.hidden = static_cast<int>(hp.at("hidden"));
        return make_char_lstm(s);
    }
    throw InvalidInput("gradient_check and char nets require char_cnn or char_lstm");
}

class CharNetModel final : public ModelBase {
public:
    CharNetModel(const FitContext& ctx, int m, int l, std::vector<double> params)
        : ModelBase(ctx), m_(m), l_(l), params_(std::move(params)) {
        net_ = net_from(spec_, m_, l_);
        if (params_.size() != net_->n_params())
            throw FormatError("char net parameter vector does not match architecture");
    }

    double score_sequence(const CharSequence& x) const override {
        if (x.l != l_ || x.indices.size() != static_cast<size_t>(l_))
            throw InvalidInput("char net: sequence length mismatch");
        return sigmoid(net_->logits(params_, {x})[0]);
    }

protected:
    void params_to_json(json& out) const override {
        out["m"] = m_;
        out["l"] = l_;
        out["net_params"] = doubles_to_base64(params_);
    }

private:
    int m_, l_;
    std::vector<double> params_;
    std::unique_ptr<NetCore> net_;
};

}  // namespace

std::unique_ptr<TrainedModel> fit_char_net(const FitContext& ctx,
                                           const std::vector<FeatureInput>& inputs,
                                           const std::vector<int>& labels) {
    const auto& hp = ctx.spec.hyperparams;
    const int l = std::get<CharSequence>(inputs[0]).l;
    const int m = max_char_index(inputs);

    const auto net = net_from(ctx.spec, m, l);

    std::vector<CharSequence> xs;
    xs.reserve(inputs.size());
    for (const auto& input : inputs) xs.push_back(std::get<CharSequence>(input));

    NetTrainOptions options;
    options.epochs = static_cast<int>(hp.at("epochs"));
    options.batch = static_cast<int>(hp.at("batch"));
    options.lr = hp.at("lr");
    options.patience = static_cast<int>(hp.at("patience"));
    options.val_fraction = hp.at("val_fraction");
    options.seed = ctx.spec.seed;

    NetTrainResult result = train_net(*net, xs, labels, options);
    if (!std::isfinite(result.final_train_loss))
        throw Error("char net training diverged to a non-finite loss");
    return std::make_unique<CharNetModel>(ctx, m, l, std::move(result.params));
}

std::unique_ptr<TrainedModel> load_char_net(const json& params, const FitContext& ctx) {
    return std::make_unique<CharNetModel>(
        ctx, params.at("m").get<int>(), params.at("l").get<int>(),
        doubles_from_base64(params.at("net_params").get<std::string>()));
}

}  // namespace pathclass::detail

namespace pathclass {

GradientCheckReport gradient_check(const ModelSpec& spec, const std::vector<CharSequence>& batch,
                                   const std::vector<int>& labels, int n_samples) {
    if (batch.empty() || batch.size() != labels.size())
        throw InvalidInput("gradient_check: bad batch");
    if (n_samples < 1) throw InvalidInput("gradient_check: n_samples must be positive");

    ModelSpec resolved = spec;
    resolved.hyperparams = resolve_hyperparams(spec.family, spec.hyperparams);

    int m = 1;
    for (const auto& seq : batch) {
        for (int32_t idx : seq.indices) m = std::max(m, static_cast<int>(idx));
    }
    const auto net = detail::net_from(resolved, m, batch[0].l);

    std::vector<double> params;
    net->init_params(params, derive_seed(spec.seed, "gradcheck_init"));

    std::vector<double> analytic;
    net->loss_and_grad(params, batch, labels, analytic);

    // Sampled parameter coordinates, without replacement.
    std::vector<size_t> coords(net->n_params());
    for (size_t i = 0; i < coords.size(); ++i) coords[i] = i;
    if (coords.size() > static_cast<size_t>(n_samples)) {
        Rng rng(derive_seed(spec.seed, "gradcheck_sample"));
        rng.shuffle(coords);
        coords.resize(static_cast<size_t>(n_samples));
    }

    const double h = 1e-5;
    GradientCheckReport report;
    report.n_parameters_sampled = static_cast<int>(coords.size());
    for (size_t i : coords) {
        const double saved = params[i];
        params[i] = saved + h;
        const double up = net->loss(params, batch, labels);
        params[i] = saved - h;
        const double down = net->loss(params, batch, labels);
        params[i] = saved;
        const double numeric = (up - down) / (2.0 * h);
        const double rel = std::abs(analytic[i] - numeric) /
                           std::max(std::abs(analytic[i]) + std::abs(numeric), 1e-6);
        report.max_relative_error = std::max(report.max_relative_error, rel);
    }
    return report;
}

}  // namespace pathclass
