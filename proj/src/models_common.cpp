#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include "models_internal.hpp"
#include "pathclass/error.hpp"
#include "pathclass/fingerprint.hpp"
#include "pathclass/text.hpp"

namespace pathclass {

using nlohmann::json;

std::string model_family_name(ModelFamily family) {
    switch (family) {
        case ModelFamily::logreg: return "logreg";
        case ModelFamily::naive_bayes: return "naive_bayes";
        case ModelFamily::boosted_trees: return "boosted_trees";
        case ModelFamily::char_cnn: return "char_cnn";
        case ModelFamily::char_lstm: return "char_lstm";
    }
    throw InvalidInput("unknown model family");
}

ModelFamily model_family_from_name(std::string_view name) {
    if (name == "logreg") return ModelFamily::logreg;
    if (name == "naive_bayes") return ModelFamily::naive_bayes;
    if (name == "boosted_trees") return ModelFamily::boosted_trees;
    if (name == "char_cnn") return ModelFamily::char_cnn;
    if (name == "char_lstm") return ModelFamily::char_lstm;
    throw InvalidInput("unknown model family: " + std::string(name));
}

namespace {

struct ParamRule {
    const char* key;
    double def;
    double min, max;
    bool integral;
};

const std::vector<ParamRule>& rules_for(ModelFamily family) {
    static const std::vector<ParamRule> logreg = {
        {"epochs", 50, 1, 1e6, true},
        {"lr", 0.1, 1e-12, 1e6, false},
        {"l2", 1e-4, 0, 1e6, false},
        {"batch", 256, 1, 1e9, true},
    };
    static const std::vector<ParamRule> nb = {
        {"alpha", 1.0, 1e-12, 1e6, false},
    };
    static const std::vector<ParamRule> boost = {
        {"rounds", 50, 1, 1e5, true},
        {"max_depth", 3, 1, 64, true},
    };
    static const std::vector<ParamRule> net_common = {
        {"epochs", 15, 1, 1e5, true},
        {"batch", 64, 1, 1e9, true},
        {"lr", 1e-3, 1e-12, 1e6, false},
        {"patience", 3, 0, 1e5, true},
        {"val_fraction", 0.1, 0, 0.5, false},
    };
    static const std::vector<ParamRule> cnn = [] {
        std::vector<ParamRule> r = {
            {"embed_dim", 32, 1, 4096, true},   {"conv1_filters", 64, 1, 4096, true},
            {"conv1_width", 5, 1, 256, true},   {"pool_width", 3, 1, 256, true},
            {"conv2_filters", 64, 1, 4096, true}, {"conv2_width", 3, 1, 256, true},
            {"dense_units", 64, 1, 4096, true},
        };
        r.insert(r.end(), net_common.begin(), net_common.end());
        return r;
    }();
    static const std::vector<ParamRule> lstm = [] {
        std::vector<ParamRule> r = {
            {"embed_dim", 32, 1, 4096, true},
            {"hidden", 64, 1, 4096, true},
        };
        r.insert(r.end(), net_common.begin(), net_common.end());
        return r;
    }();
    switch (family) {
        case ModelFamily::logreg: return logreg;
        case ModelFamily::naive_bayes: return nb;
        case ModelFamily::boosted_trees: return boost;
        case ModelFamily::char_cnn: return cnn;
        case ModelFamily::char_lstm: return lstm;
    }
    throw InvalidInput("unknown model family");
}

}  // namespace

Hyperparams resolve_hyperparams(ModelFamily family, const Hyperparams& given) {
    const auto& rules = rules_for(family);
    for (const auto& [key, value] : given) {
        const auto it = std::find_if(rules.begin(), rules.end(),
                                     [&](const ParamRule& r) { return key == r.key; });
        if (it == rules.end())
            throw InvalidInput("unknown hyperparameter for " + model_family_name(family) + ": " +
                               key);
        if (!std::isfinite(value) || value < it->min || value > it->max)
            throw InvalidInput("hyperparameter out of range: " + key);
        if (it->integral && value != std::floor(value))
            throw InvalidInput("hyperparameter must be an integer: " + key);
    }
    Hyperparams out;
    for (const auto& r : rules) {
        const auto it = given.find(r.key);
        out[r.key] = it == given.end() ? r.def : it->second;
    }
    return out;
}

double TrainedModel::score(const FeatureInput& input) const {
    if (std::holds_alternative<SparseVector>(input)) {
        if (binding_ == FeatureKind::char_sequence)
            throw InvalidInput("model expects character sequences, got a sparse vector");
        return score_sparse(std::get<SparseVector>(input));
    }
    if (binding_ != FeatureKind::char_sequence)
        throw InvalidInput("model expects sparse vectors, got a character sequence");
    return score_sequence(std::get<CharSequence>(input));
}

double TrainedModel::score_sparse(const SparseVector&) const {
    throw InvalidInput("model cannot score sparse vectors");
}

double TrainedModel::score_sequence(const CharSequence&) const {
    throw InvalidInput("model cannot score character sequences");
}

json TrainedModel::to_json() const {
    json j;
    j["magic"] = "pathclass-model";
    j["format_version"] = 1;
    j["family"] = model_family_name(spec_.family);
    j["hyperparams"] = spec_.hyperparams;
    j["seed"] = spec_.seed;
    j["binding"] = feature_kind_name(binding_);
    j["training_fingerprint"] = fingerprint_hex(training_fingerprint_);
    j["feature_space_fingerprint"] = fingerprint_hex(feature_space_fingerprint_);
    j["params"] = json::object();
    params_to_json(j["params"]);
    return j;
}

namespace detail {

namespace {
constexpr char kB64[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

int b64_value(char c) {
    if (c >= 'A' && c <= 'Z') return c - 'A';
    if (c >= 'a' && c <= 'z') return c - 'a' + 26;
    if (c >= '0' && c <= '9') return c - '0' + 52;
    if (c == '+') return 62;
    if (c == '/') return 63;
    return -1;
}
}  // namespace

std::string doubles_to_base64(const std::vector<double>& v) {
    std::vector<unsigned char> bytes;
    bytes.reserve(v.size() * 8);
    for (double d : v) {
        uint64_t u;
        std::memcpy(&u, &d, 8);
        for (int i = 0; i < 8; ++i) bytes.push_back(static_cast<unsigned char>(u >> (8 * i)));
    }
    std::string out;
    out.reserve((bytes.size() + 2) / 3 * 4);
    for (size_t i = 0; i < bytes.size(); i += 3) {
        uint32_t chunk = static_cast<uint32_t>(bytes[i]) << 16;
        if (i + 1 < bytes.size()) chunk |= static_cast<uint32_t>(bytes[i + 1]) << 8;
        if (i + 2 < bytes.size()) chunk |= bytes[i + 2];
        out += kB64[(chunk >> 18) & 63];
        out += kB64[(chunk >> 12) & 63];
        out += i + 1 < bytes.size() ? kB64[(chunk >> 6) & 63] : '=';
        out += i + 2 < bytes.size() ? kB64[chunk & 63] : '=';
    }
    return out;
}

std::vector<double> doubles_from_base64(const std::string& b64) {
    if (b64.size() % 4 != 0) throw FormatError("base64 blob length not a multiple of 4");
    std::vector<unsigned char> bytes;
    bytes.reserve(b64.size() / 4 * 3);
    for (size_t i = 0; i < b64.size(); i += 4) {
        int vals[4];
        int pad = 0;
        for (int k = 0; k < 4; ++k) {
            const char c = b64[i + k];
            if (c == '=') {
                vals[k] = 0;
                ++pad;
            } else {
                vals[k] = b64_value(c);
                if (vals[k] < 0 || pad > 0) throw FormatError("invalid base64 blob");
            }
        }
        const uint32_t chunk = (static_cast<uint32_t>(vals[0]) << 18) |
                               (static_cast<uint32_t>(vals[1]) << 12) |
                               (static_cast<uint32_t>(vals[2]) << 6) |
                               static_cast<uint32_t>(vals[3]);
        bytes.push_back(static_cast<unsigned char>((chunk >> 16) & 0xff));
        if (pad < 2) bytes.push_back(static_cast<unsigned char>((chunk >> 8) & 0xff));
        if (pad < 1) bytes.push_back(static_cast<unsigned char>(chunk & 0xff));
    }
    if (bytes.size() % 8 != 0) throw FormatError("double blob byte count not a multiple of 8");
    std::vector<double> out(bytes.size() / 8);
    for (size_t i = 0; i < out.size(); ++i) {
        uint64_t u = 0;
        for (int k = 0; k < 8; ++k) u |= static_cast<uint64_t>(bytes[i * 8 + k]) << (8 * k);
        std::memcpy(&out[i], &u, 8);
    }
    return out;
}

size_t validate_fit_inputs(FeatureKind binding, const std::vector<FeatureInput>& inputs,
                           const std::vector<int>& labels) {
    if (inputs.empty()) throw InvalidInput("fit with no inputs");
    if (labels.size() != inputs.size())
        throw InvalidInput("fit: labels and inputs differ in length");
    for (int y : labels) {
        if (y != 0 && y != 1) throw InvalidInput("fit: labels must be 0/1");
    }

    if (binding == FeatureKind::char_sequence) {
        int l = -1;
        for (const auto& input : inputs) {
            const auto* seq = std::get_if<CharSequence>(&input);
            if (!seq) throw InvalidInput("fit: char binding requires character sequences");
            if (seq->indices.size() != static_cast<size_t>(seq->l))
                throw InvalidInput("fit: sequence length does not match l");
            if (l < 0) l = seq->l;
            if (seq->l != l) throw InvalidInput("fit: inconsistent sequence lengths");
            for (int32_t idx : seq->indices) {
                if (idx < 0) throw InvalidInput("fit: negative character index");
            }
        }
        return static_cast<size_t>(l);
    }

    size_t dims = 0;
    bool first = true;
    for (const auto& input : inputs) {
        const auto* sv = std::get_if<SparseVector>(&input);
        if (!sv) throw InvalidInput("fit: tfidf binding requires sparse vectors");
        if (first) {
            dims = sv->dims;
            first = false;
        }
        if (sv->dims != dims) throw InvalidInput("fit: inconsistent feature dimensions");
        int prev = -1;
        for (const auto& [col, w] : sv->entries) {
            if (col <= prev || static_cast<size_t>(col) >= dims)
                throw InvalidInput("fit: sparse indices must be strictly increasing and in range");
            if (!std::isfinite(w)) throw InvalidInput("fit: non-finite feature value");
            prev = col;
        }
    }
    return dims;
}

int max_char_index(const std::vector<FeatureInput>& inputs) {
    int m = 1;
    for (const auto& input : inputs) {
        for (int32_t idx : std::get<CharSequence>(input).indices) m = std::max(m, idx);
    }
    return m;
}

namespace {

class PriorModel final : public ModelBase {
public:
    PriorModel(const FitContext& ctx, double prior) : ModelBase(ctx), prior_(prior) {}

    double score_sparse(const SparseVector&) const override { return prior_; }
    double score_sequence(const CharSequence&) const override { return prior_; }

protected:
    void params_to_json(json& out) const override { out["constant_prior"] = prior_; }

private:
    double prior_;
};

}  // namespace

std::unique_ptr<TrainedModel> make_prior_model(const FitContext& ctx, double prior) {
    return std::make_unique<PriorModel>(ctx, prior);
}

std::unique_ptr<TrainedModel> load_prior(const json& params, const FitContext& ctx) {
    return std::make_unique<PriorModel>(ctx, params.at("constant_prior").get<double>());
}

}  // namespace detail

std::unique_ptr<TrainedModel> fit(const ModelSpec& spec, FeatureKind binding,
                                  const std::vector<FeatureInput>& inputs,
                                  const std::vector<int>& labels, uint64_t training_fingerprint,
                                  uint64_t feature_space_fingerprint) {
    detail::FitContext ctx;
    ctx.spec.family = spec.family;
    ctx.spec.hyperparams = resolve_hyperparams(spec.family, spec.hyperparams);
    ctx.spec.seed = spec.seed;
    ctx.binding = binding;
    ctx.training_fingerprint = training_fingerprint;
    ctx.feature_space_fingerprint = feature_space_fingerprint;

    const bool wants_chars =
        spec.family == ModelFamily::char_cnn || spec.family == ModelFamily::char_lstm;
    if (wants_chars != (binding == FeatureKind::char_sequence))
        throw InvalidInput("model family " + model_family_name(spec.family) +
                           " does not accept " + feature_kind_name(binding) + " features");
    detail::validate_fit_inputs(binding, inputs, labels);

    size_t n_pos = 0;
    for (int y : labels) n_pos += static_cast<size_t>(y);
    if (n_pos == 0 || n_pos == labels.size()) {
        // Single-class data: constant model scoring the empirical prior.
        return detail::make_prior_model(
            ctx, static_cast<double>(n_pos) / static_cast<double>(labels.size()));
    }

    switch (spec.family) {
        case ModelFamily::logreg: return detail::fit_logreg(ctx, inputs, labels);
        case ModelFamily::naive_bayes: return detail::fit_naive_bayes(ctx, inputs, labels);
        case ModelFamily::boosted_trees: return detail::fit_boosted_trees(ctx, inputs, labels);
        case ModelFamily::char_cnn:
        case ModelFamily::char_lstm: return detail::fit_char_net(ctx, inputs, labels);
    }
    throw InvalidInput("unknown model family");
}

std::string save_model(const TrainedModel& model) { return model.to_json().dump(); }

std::unique_ptr<TrainedModel> load_model(const std::string& bytes) {
    json j;
    try {
        j = json::parse(bytes);
    } catch (const json::exception& e) {
        throw FormatError(std::string("model artifact is not JSON: ") + e.what());
    }
    try {
        if (j.at("magic").get<std::string>() != "pathclass-model")
            throw FormatError("not a model artifact");
        if (j.at("format_version").get<int>() != 1)
            throw FormatError("unsupported model format_version");

        detail::FitContext ctx;
        ctx.spec.family = model_family_from_name(j.at("family").get<std::string>());
        ctx.spec.hyperparams = j.at("hyperparams").get<Hyperparams>();
        ctx.spec.seed = j.at("seed").get<uint64_t>();
        ctx.binding = feature_kind_from_name(j.at("binding").get<std::string>());
        ctx.training_fingerprint =
            parse_fingerprint_hex(j.at("training_fingerprint").get<std::string>());
        ctx.feature_space_fingerprint =
            parse_fingerprint_hex(j.at("feature_space_fingerprint").get<std::string>());

        const json& params = j.at("params");
        if (params.contains("constant_prior")) return detail::load_prior(params, ctx);
        switch (ctx.spec.family) {
            case ModelFamily::logreg: return detail::load_logreg(params, ctx);
            case ModelFamily::naive_bayes: return detail::load_naive_bayes(params, ctx);
            case ModelFamily::boosted_trees: return detail::load_boosted_trees(params, ctx);
            case ModelFamily::char_cnn:
            case ModelFamily::char_lstm: return detail::load_char_net(params, ctx);
        }
        throw FormatError("unknown model family in artifact");
    } catch (const json::exception& e) {
        throw FormatError(std::string("malformed model artifact: ") + e.what());
    }
}

void save_model_file(const TrainedModel& model, const std::string& file) {
    std::ofstream out(file);
    if (!out) throw Error("cannot write model file: " + file);
    out << save_model(model) << '\n';
    if (!out) throw Error("short write to model file: " + file);
}

std::unique_ptr<TrainedModel> load_model_file(const std::string& file) {
    std::ifstream in(file);
    if (!in) throw InvalidInput("cannot open model file: " + file);
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return load_model(bytes);
}

PathScorer::PathScorer(FeatureSpace features, std::shared_ptr<const TrainedModel> model)
    : features_(std::move(features)), model_(std::move(model)) {
    if (!model_) throw InvalidInput("PathScorer requires a model");
    if (model_->feature_space_fingerprint() != features_.content_fingerprint())
        throw InvalidInput("model was not trained on this feature space (fingerprint mismatch)");
}

double PathScorer::score(std::string_view path) const {
    return model_->score(features_.transform(path));
}

}  // namespace pathclass
