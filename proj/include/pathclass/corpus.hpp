#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace pathclass {

enum class Label : int { negative = 0, positive = 1 };

struct PathRecord {
    std::string path;
    int raw_label = 0;
    Label label = Label::negative;
    std::string system_id;
};

struct Dataset {
    std::vector<PathRecord> records;
    std::string provenance;

    size_t size() const { return records.size(); }
    bool empty() const { return records.empty(); }
};

// Raw labels 1..3 collapse to the positive class, 0 is the negative class.
// Anything else is rejected.
Label map_label(int raw_label);

// Prefix of the path strictly before the first '/' or '\'; the whole path
// when no separator exists. Rejects empty paths.
std::string extract_system_id(const std::string& path);

struct FoldAssignment {
    int k = 0;
    std::vector<int> fold_of;  // record index -> fold in [0, k)
};

// Deals whole storage systems into k folds round-robin after a seeded shuffle,
// so records sharing a system_id always land in the same fold.
FoldAssignment grouped_kfold(const Dataset& dataset, int k, uint64_t seed);

// Record indices of one fold (or of its complement, the training side).
std::vector<size_t> fold_indices(const FoldAssignment& folds, int fold, bool complement = false);

Dataset subset_dataset(const Dataset& dataset, const std::vector<size_t>& rows,
                       const std::string& provenance = "");

struct SynthConfig {
    size_t n_records = 0;
    size_t n_systems = 0;
    double positive_fraction = 0.3;
    std::vector<std::string> positive_vocab;  // words planted only in positives
    std::vector<std::string> neutral_vocab;   // words usable by either class
    int min_depth = 1, max_depth = 3;         // directory levels under the system id
    int min_name_tokens = 1, max_name_tokens = 3;
    uint64_t seed = 0;
};

// Builds a labeled corpus with a planted lexicon: every positive path contains
// at least one positive-vocab word, negatives contain none. Deterministic for
// a fixed config.
Dataset generate_synthetic(const SynthConfig& config);

// One JSON object per line: {"path":..., "raw_label":..., "system_id":...}
// (system_id optional; derived from the path when absent).
Dataset load_dataset(std::istream& in, const std::string& provenance);
Dataset load_dataset_file(const std::string& file);
void save_dataset(const Dataset& dataset, std::ostream& out);
void save_dataset_file(const Dataset& dataset, const std::string& file);

// Order-sensitive content hash over (path, raw_label, system_id) triples.
uint64_t dataset_fingerprint(const Dataset& dataset);

}  // namespace pathclass
