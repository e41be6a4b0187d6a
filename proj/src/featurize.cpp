#include "pathclass/featurize.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>

#include "pathclass/error.hpp"
#include "pathclass/fingerprint.hpp"
#include "pathclass/text.hpp"

namespace pathclass {

using nlohmann::json;

std::string feature_kind_name(FeatureKind kind) {
    switch (kind) {
        case FeatureKind::tfidf_words: return "tfidf_words";
        case FeatureKind::tfidf_ngrams: return "tfidf_ngrams";
        case FeatureKind::char_sequence: return "char_sequence";
    }
    throw InvalidInput("unknown feature kind");
}

FeatureKind feature_kind_from_name(std::string_view name) {
    if (name == "tfidf_words") return FeatureKind::tfidf_words;
    if (name == "tfidf_ngrams") return FeatureKind::tfidf_ngrams;
    if (name == "char_sequence") return FeatureKind::char_sequence;
    throw InvalidInput("unknown feature kind: " + std::string(name));
}

namespace {

constexpr bool is_separator(char c) {
    return c == '-' || c == '/' || c == '\\' || c == ':' || c == '_' || c == '.';
}

}  // namespace

std::vector<std::string> tokenize_words(std::string_view path) {
    std::vector<std::string> tokens;
    size_t start = 0;
    for (size_t i = 0; i <= path.size(); ++i) {
        if (i == path.size() || is_separator(path[i])) {
            if (i > start) tokens.push_back(ascii_lower(path.substr(start, i - start)));
            start = i + 1;
        }
    }
    return tokens;
}

std::vector<std::string> extract_ngrams(std::string_view path, int n_max) {
    if (n_max < 1) throw InvalidInput("extract_ngrams requires n_max >= 1");
    std::vector<char32_t> cps = decode_utf8(path);
    for (char32_t& c : cps) c = ascii_lower(c);

    std::vector<std::string> out;
    const size_t n = cps.size();
    for (int len = 1; len <= n_max; ++len) {
        if (static_cast<size_t>(len) > n) break;
        for (size_t pos = 0; pos + static_cast<size_t>(len) <= n; ++pos) {
            std::string g;
            for (int k = 0; k < len; ++k) g += encode_utf8(cps[pos + static_cast<size_t>(k)]);
            out.push_back(std::move(g));
        }
    }
    return out;
}

namespace {

std::vector<std::string> terms_of(const std::string& path, VocabKind kind, int n_max) {
    return kind == VocabKind::word ? tokenize_words(path) : extract_ngrams(path, n_max);
}

}  // namespace

Vocabulary build_vocabulary(const Dataset& corpus, VocabKind kind, size_t max_size, int n_max) {
    if (corpus.empty()) throw InvalidInput("build_vocabulary on empty corpus");
    if (max_size < 1) throw InvalidInput("build_vocabulary requires max_size >= 1");

    std::unordered_map<std::string, int64_t> counts;
    for (const auto& rec : corpus.records) {
        for (auto& t : terms_of(rec.path, kind, n_max)) counts[std::move(t)] += 1;
    }

    std::vector<std::pair<std::string, int64_t>> ranked(counts.begin(), counts.end());
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    if (ranked.size() > max_size) ranked.resize(max_size);

    Vocabulary vocab;
    vocab.kind = kind;
    vocab.n_max = n_max;
    vocab.max_size = max_size;
    vocab.terms.reserve(ranked.size());
    for (auto& [term, count] : ranked) {
        vocab.index_of.emplace(term, static_cast<int>(vocab.terms.size()));
        vocab.terms.push_back(std::move(term));
    }
    return vocab;
}

TfidfModel fit_tfidf(const Dataset& corpus, Vocabulary vocab) {
    if (corpus.empty()) throw InvalidInput("fit_tfidf on empty corpus");
    if (vocab.terms.empty()) throw InvalidInput("fit_tfidf with empty vocabulary");

    TfidfModel model;
    model.n_docs = corpus.size();
    model.df.assign(vocab.terms.size(), 0);
    std::vector<char> seen(vocab.terms.size());
    for (const auto& rec : corpus.records) {
        std::fill(seen.begin(), seen.end(), 0);
        for (const auto& t : terms_of(rec.path, vocab.kind, vocab.n_max)) {
            auto it = vocab.index_of.find(t);
            if (it != vocab.index_of.end()) seen[static_cast<size_t>(it->second)] = 1;
        }
        for (size_t j = 0; j < seen.size(); ++j) model.df[j] += seen[j];
    }
    model.idf.resize(vocab.terms.size());
    for (size_t j = 0; j < vocab.terms.size(); ++j) {
        model.idf[j] = std::log((1.0 + static_cast<double>(model.n_docs)) /
                                (1.0 + static_cast<double>(model.df[j]))) + 1.0;
    }
    model.vocab = std::move(vocab);
    return model;
}

SparseVector transform_tfidf(const TfidfModel& model, std::string_view path) {
    std::map<int, double> tf;  // ordered: entries come out index-sorted
    for (const auto& t : terms_of(std::string(path), model.vocab.kind, model.vocab.n_max)) {
        auto it = model.vocab.index_of.find(t);
        if (it != model.vocab.index_of.end()) tf[it->second] += 1.0;
    }

    SparseVector v;
    v.dims = model.vocab.terms.size();
    v.entries.reserve(tf.size());
    double norm_sq = 0.0;
    for (const auto& [col, count] : tf) {
        const double w = count * model.idf[static_cast<size_t>(col)];
        v.entries.emplace_back(col, w);
        norm_sq += w * w;
    }
    if (norm_sq > 0.0) {
        const double inv = 1.0 / std::sqrt(norm_sq);
        for (auto& [col, w] : v.entries) w *= inv;
    }
    return v;
}

Alphabet build_alphabet(const Dataset& corpus, size_t cap) {
    if (corpus.empty()) throw InvalidInput("build_alphabet on empty corpus");
    if (cap < 1) throw InvalidInput("build_alphabet requires cap >= 1");

    std::unordered_map<char32_t, int64_t> counts;
    for (const auto& rec : corpus.records) {
        for (char32_t cp : decode_utf8(rec.path)) counts[cp] += 1;
    }
    std::vector<std::pair<char32_t, int64_t>> ranked(counts.begin(), counts.end());
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    if (ranked.size() > cap) ranked.resize(cap);

    Alphabet alphabet;
    alphabet.chars.reserve(ranked.size());
    for (const auto& [cp, count] : ranked) {
        alphabet.chars.push_back(cp);
        alphabet.index_of.emplace(cp, static_cast<int>(alphabet.chars.size()));  // 1-based
    }
    return alphabet;
}

CharSequence encode_chars(const Alphabet& alphabet, std::string_view path, int l) {
    if (l < 1) throw InvalidInput("encode_chars requires l >= 1");
    const std::vector<char32_t> cps = decode_utf8(path);
    const size_t keep = std::min(cps.size(), static_cast<size_t>(l));

    CharSequence seq;
    seq.l = l;
    seq.indices.assign(static_cast<size_t>(l), 0);
    const size_t dst0 = static_cast<size_t>(l) - keep;
    const size_t src0 = cps.size() - keep;
    for (size_t k = 0; k < keep; ++k) {
        auto it = alphabet.index_of.find(cps[src0 + k]);
        seq.indices[dst0 + k] = it == alphabet.index_of.end() ? 0 : it->second;
    }
    return seq;
}

FeatureInput FeatureSpace::transform(std::string_view path) const {
    if (kind == FeatureKind::char_sequence) return encode_chars(alphabet, path, l);
    return transform_tfidf(tfidf, path);
}

json FeatureSpace::to_json() const {
    json j;
    j["magic"] = "pathclass-features";
    j["format_version"] = 1;
    j["kind"] = feature_kind_name(kind);
    j["training_fingerprint"] = fingerprint_hex(training_fingerprint);
    if (kind == FeatureKind::char_sequence) {
        std::vector<uint32_t> cps(alphabet.chars.begin(), alphabet.chars.end());
        j["alphabet"] = cps;
        j["l"] = l;
    } else {
        j["vocab_kind"] = tfidf.vocab.kind == VocabKind::word ? "word" : "ngram";
        j["n_max"] = tfidf.vocab.n_max;
        j["max_size"] = tfidf.vocab.max_size;
        j["terms"] = tfidf.vocab.terms;
        j["df"] = tfidf.df;
        j["n_docs"] = tfidf.n_docs;
    }
    return j;
}

FeatureSpace FeatureSpace::from_json(const json& j) {
    try {
        if (j.at("magic").get<std::string>() != "pathclass-features")
            throw FormatError("not a feature-space artifact");
        if (j.at("format_version").get<int>() != 1)
            throw FormatError("unsupported feature-space format_version");

        FeatureSpace fs;
        fs.kind = feature_kind_from_name(j.at("kind").get<std::string>());
        fs.training_fingerprint = parse_fingerprint_hex(j.at("training_fingerprint").get<std::string>());
        if (fs.kind == FeatureKind::char_sequence) {
            for (uint32_t cp : j.at("alphabet").get<std::vector<uint32_t>>()) {
                fs.alphabet.chars.push_back(static_cast<char32_t>(cp));
                fs.alphabet.index_of.emplace(static_cast<char32_t>(cp),
                                             static_cast<int>(fs.alphabet.chars.size()));
            }
            fs.l = j.at("l").get<int>();
        } else {
            Vocabulary vocab;
            vocab.kind = j.at("vocab_kind").get<std::string>() == "word" ? VocabKind::word
                                                                         : VocabKind::ngram;
            vocab.n_max = j.at("n_max").get<int>();
            vocab.max_size = j.at("max_size").get<size_t>();
            vocab.terms = j.at("terms").get<std::vector<std::string>>();
            for (size_t i = 0; i < vocab.terms.size(); ++i)
                vocab.index_of.emplace(vocab.terms[i], static_cast<int>(i));
            fs.tfidf.vocab = std::move(vocab);
            fs.tfidf.df = j.at("df").get<std::vector<int64_t>>();
            fs.tfidf.n_docs = j.at("n_docs").get<size_t>();
            if (fs.tfidf.df.size() != fs.tfidf.vocab.terms.size())
                throw FormatError("df table size does not match vocabulary");
            // idf is a pure function of (n_docs, df); recomputing reproduces the
            // fitted values bit for bit.
            fs.tfidf.idf.resize(fs.tfidf.df.size());
            for (size_t i = 0; i < fs.tfidf.df.size(); ++i) {
                fs.tfidf.idf[i] = std::log((1.0 + static_cast<double>(fs.tfidf.n_docs)) /
                                           (1.0 + static_cast<double>(fs.tfidf.df[i]))) + 1.0;
            }
        }
        return fs;
    } catch (const json::exception& e) {
        throw FormatError(std::string("malformed feature-space artifact: ") + e.what());
    }
}

uint64_t FeatureSpace::content_fingerprint() const {
    uint64_t h = fnv1a64(feature_kind_name(kind));
    h = fnv1a64(training_fingerprint, h);
    if (kind == FeatureKind::char_sequence) {
        for (char32_t cp : alphabet.chars) h = fnv1a64(static_cast<uint64_t>(cp), h);
        h = fnv1a64(static_cast<uint64_t>(l), h);
    } else {
        for (const auto& t : tfidf.vocab.terms) h = fnv1a64(t, h);
        for (int64_t d : tfidf.df) h = fnv1a64(static_cast<uint64_t>(d), h);
        h = fnv1a64(static_cast<uint64_t>(tfidf.n_docs), h);
        h = fnv1a64(static_cast<uint64_t>(tfidf.vocab.n_max), h);
    }
    return h;
}

void FeatureSpace::save_file(const std::string& file) const {
    std::ofstream out(file);
    if (!out) throw Error("cannot write feature-space file: " + file);
    out << to_json().dump(2) << '\n';
    if (!out) throw Error("short write to feature-space file: " + file);
}

FeatureSpace FeatureSpace::load_file(const std::string& file) {
    std::ifstream in(file);
    if (!in) throw InvalidInput("cannot open feature-space file: " + file);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw FormatError(std::string("feature-space file is not JSON: ") + e.what());
    }
    return from_json(j);
}

FeatureSpace fit_feature_space(const Dataset& train, const FeatureConfig& config) {
    if (train.empty()) throw InvalidInput("fit_feature_space on empty corpus");

    FeatureSpace fs;
    fs.kind = config.kind;
    fs.training_fingerprint = dataset_fingerprint(train);
    switch (config.kind) {
        case FeatureKind::tfidf_words:
            fs.tfidf = fit_tfidf(train, build_vocabulary(train, VocabKind::word, config.max_size));
            break;
        case FeatureKind::tfidf_ngrams:
            fs.tfidf = fit_tfidf(
                train, build_vocabulary(train, VocabKind::ngram, config.max_size, config.n_max));
            break;
        case FeatureKind::char_sequence:
            fs.alphabet = build_alphabet(train, config.alphabet_cap);
            fs.l = config.l;
            break;
    }
    return fs;
}

}  // namespace pathclass
