#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pathclass/corpus.hpp"
#include "pathclass/models.hpp"

namespace pathclass {

// Words ranked by how much more likely they are to appear in positive paths,
// via a 2x2-table odds ratio with +0.5 smoothing on every cell.
struct Lexicon {
    struct Entry {
        std::string word;
        double odds_ratio = 0.0;
    };
    std::vector<Entry> entries;  // odds_ratio desc, ties word asc
    double threshold = 2.0;
    uint64_t source_fingerprint = 0;  // training corpus it was built from

    bool contains(std::string_view word) const;
};

// OR(w) = ((a+.5)(d+.5)) / ((b+.5)(c+.5)) over document-level presence counts.
// Requires both classes in the corpus; keeps entries with OR > threshold.
Lexicon build_lexicon(const Dataset& train, double threshold = 2.0);

void save_lexicon_file(const Lexicon& lexicon, const std::string& file);
Lexicon load_lexicon_file(const std::string& file);

enum class AttackKind { random_substitution, lexicon_substitution };

std::string attack_kind_name(AttackKind kind);
AttackKind attack_kind_from_name(std::string_view name);

struct AttackSpec {
    AttackKind kind = AttackKind::random_substitution;
    double epsilon = 0.1;  // fraction of length (random) or word budget (lexicon)
    std::vector<char32_t> replacement_alphabet;  // empty -> [a-zA-Z0-9]
    uint64_t seed = 0;
};

std::vector<char32_t> default_replacement_alphabet();

struct Edit {
    size_t position = 0;  // code-point index
    char32_t old_char = 0;
    char32_t new_char = 0;
};

struct AdversarialPair {
    std::string original;
    std::string perturbed;
    std::vector<Edit> edits;
};

// Substitutes min(len, ceil(epsilon*len)) characters at distinct positions;
// each replacement differs from the original character. Attacks take no model
// input: the threat model is hard-label black-box.
AdversarialPair attack_random(std::string_view path, double epsilon,
                              const std::vector<char32_t>& alphabet, uint64_t seed);

// Substitutes one character inside each of the top-budget lexicon words found
// among the path's tokens (by descending odds ratio), at the word's first
// occurrence in the path.
AdversarialPair attack_lexicon(std::string_view path, const Lexicon& lexicon, int budget,
                               const std::vector<char32_t>& alphabet, uint64_t seed);

struct RobustnessReport {
    AttackKind kind = AttackKind::random_substitution;
    double budget = 0.0;
    double clean_recall = 0.0;
    double adversarial_recall = 0.0;
    double confidence_decrease_mean = 0.0;
    double confidence_decrease_std = 0.0;  // population std
    size_t n_samples = 0;
    size_t total_edits = 0;
};

// Perturbs each positive once per the attack spec and compares recall and
// confidence at a fixed threshold. `lexicon` is required for lexicon_substitution.
RobustnessReport evaluate_robustness(const PathScorer& scorer, const Dataset& positives,
                                     const AttackSpec& spec, const Lexicon* lexicon,
                                     double threshold);

}  // namespace pathclass
