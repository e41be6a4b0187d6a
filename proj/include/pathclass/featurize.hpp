#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

#include "json.hpp"
#include "pathclass/corpus.hpp"

namespace pathclass {

enum class FeatureKind { tfidf_words, tfidf_ngrams, char_sequence };

std::string feature_kind_name(FeatureKind kind);
FeatureKind feature_kind_from_name(std::string_view name);

// Splits on '-', '/', '\', ':', '_', '.'; drops empty segments; lowercases.
std::vector<std::string> tokenize_words(std::string_view path);

// All contiguous code-point substrings of lengths 1..n_max of the lowercased
// path, with multiplicity.
std::vector<std::string> extract_ngrams(std::string_view path, int n_max);

enum class VocabKind { word, ngram };

struct Vocabulary {
    VocabKind kind = VocabKind::word;
    int n_max = 3;  // ngram kind only
    size_t max_size = 0;
    std::vector<std::string> terms;  // column order: count desc, term asc
    std::unordered_map<std::string, int> index_of;
};

// The max_size most frequent terms over the corpus, ties broken by
// lexicographically ascending term.
Vocabulary build_vocabulary(const Dataset& corpus, VocabKind kind, size_t max_size, int n_max = 3);

struct TfidfModel {
    Vocabulary vocab;
    size_t n_docs = 0;
    std::vector<int64_t> df;  // per term, documents containing it
    std::vector<double> idf;  // ln((1+n)/(1+df)) + 1
};

TfidfModel fit_tfidf(const Dataset& corpus, Vocabulary vocab);

struct SparseVector {
    size_t dims = 0;
    std::vector<std::pair<int, double>> entries;  // strictly increasing indices
};

// tf * idf over vocabulary terms, L2-normalized unless all-zero.
SparseVector transform_tfidf(const TfidfModel& model, std::string_view path);

struct Alphabet {
    std::vector<char32_t> chars;  // index i holds the character encoded as i+1
    std::unordered_map<char32_t, int> index_of;  // 1-based; 0 is pad/unknown

    int m() const { return static_cast<int>(chars.size()); }
};

// Distinct code points of the corpus ordered by descending frequency (ties by
// code point), truncated to cap.
Alphabet build_alphabet(const Dataset& corpus, size_t cap);

struct CharSequence {
    int l = 0;
    std::vector<int32_t> indices;  // length l, values in [0, m]
};

// Keeps the last l code points, maps unknowns to 0, left-pads with 0.
CharSequence encode_chars(const Alphabet& alphabet, std::string_view path, int l);

using FeatureInput = std::variant<SparseVector, CharSequence>;

struct FeatureConfig {
    FeatureKind kind = FeatureKind::tfidf_words;
    size_t max_size = 5000;    // 5,000 words / 50,000 ngrams by default
    int n_max = 3;             // ngram kind
    size_t alphabet_cap = 802; // char kind
    int l = 300;               // char kind
};

// A fitted feature space: everything needed to turn a path into a model input,
// stamped with the fingerprint of the corpus it was fitted on.
struct FeatureSpace {
    FeatureKind kind = FeatureKind::tfidf_words;
    TfidfModel tfidf;   // tfidf kinds
    Alphabet alphabet;  // char kind
    int l = 300;
    uint64_t training_fingerprint = 0;

    FeatureInput transform(std::string_view path) const;

    // Identity hash over the serialized contents; binds models to the exact
    // feature space they were trained with.
    uint64_t content_fingerprint() const;

    nlohmann::json to_json() const;
    static FeatureSpace from_json(const nlohmann::json& j);

    void save_file(const std::string& file) const;
    static FeatureSpace load_file(const std::string& file);
};

FeatureSpace fit_feature_space(const Dataset& train, const FeatureConfig& config);

}  // namespace pathclass
