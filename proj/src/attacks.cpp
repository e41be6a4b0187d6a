#include "pathclass/attacks.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <unordered_map>
#include <unordered_set>

#include "json.hpp"
#include "pathclass/error.hpp"
#include "pathclass/featurize.hpp"
#include "pathclass/fingerprint.hpp"
#include "pathclass/rng.hpp"
#include "pathclass/text.hpp"

namespace pathclass {

using nlohmann::json;

bool Lexicon::contains(std::string_view word) const {
    return std::any_of(entries.begin(), entries.end(),
                       [&](const Entry& e) { return e.word == word; });
}

Lexicon build_lexicon(const Dataset& train, double threshold) {
    if (train.empty()) throw InvalidInput("build_lexicon on empty corpus");

    double n_pos = 0.0, n_neg = 0.0;
    // Document-level presence counts per word and class.
    std::unordered_map<std::string, std::pair<int64_t, int64_t>> presence;  // (pos, neg)
    std::unordered_set<std::string> seen;
    for (const auto& rec : train.records) {
        const bool positive = rec.label == Label::positive;
        (positive ? n_pos : n_neg) += 1.0;
        seen.clear();
        for (auto& tok : tokenize_words(rec.path)) {
            if (seen.insert(tok).second) {
                auto& [p, n] = presence[std::move(tok)];
                (positive ? p : n) += 1;
            }
        }
    }
    if (n_pos == 0.0 || n_neg == 0.0)
        throw InvalidInput("build_lexicon requires both classes");

    Lexicon lexicon;
    lexicon.threshold = threshold;
    lexicon.source_fingerprint = dataset_fingerprint(train);
    for (const auto& [word, counts] : presence) {
        const double a = static_cast<double>(counts.first);
        const double c = static_cast<double>(counts.second);
        const double b = n_pos - a;
        const double d = n_neg - c;
        const double odds = ((a + 0.5) * (d + 0.5)) / ((b + 0.5) * (c + 0.5));
        if (odds > threshold) lexicon.entries.push_back({word, odds});
    }
    std::sort(lexicon.entries.begin(), lexicon.entries.end(),
              [](const Lexicon::Entry& x, const Lexicon::Entry& y) {
                  if (x.odds_ratio != y.odds_ratio) return x.odds_ratio > y.odds_ratio;
                  return x.word < y.word;
              });
    return lexicon;
}

void save_lexicon_file(const Lexicon& lexicon, const std::string& file) {
    json j;
    j["magic"] = "pathclass-lexicon";
    j["format_version"] = 1;
    j["threshold"] = lexicon.threshold;
    j["source_fingerprint"] = fingerprint_hex(lexicon.source_fingerprint);
    json entries = json::array();
    for (const auto& e : lexicon.entries) entries.push_back({e.word, e.odds_ratio});
    j["entries"] = std::move(entries);

    std::ofstream out(file);
    if (!out) throw Error("cannot write lexicon file: " + file);
    out << j.dump(2) << '\n';
    if (!out) throw Error("short write to lexicon file: " + file);
}

Lexicon load_lexicon_file(const std::string& file) {
    std::ifstream in(file);
    if (!in) throw InvalidInput("cannot open lexicon file: " + file);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw FormatError(std::string("lexicon file is not JSON: ") + e.what());
    }
    try {
        if (j.at("magic").get<std::string>() != "pathclass-lexicon")
            throw FormatError("not a lexicon artifact");
        if (j.at("format_version").get<int>() != 1)
            throw FormatError("unsupported lexicon format_version");
        Lexicon lexicon;
        lexicon.threshold = j.at("threshold").get<double>();
        lexicon.source_fingerprint =
            parse_fingerprint_hex(j.at("source_fingerprint").get<std::string>());
        for (const auto& e : j.at("entries")) {
            lexicon.entries.push_back({e.at(0).get<std::string>(), e.at(1).get<double>()});
        }
        return lexicon;
    } catch (const json::exception& e) {
        throw FormatError(std::string("malformed lexicon artifact: ") + e.what());
    }
}

std::string attack_kind_name(AttackKind kind) {
    switch (kind) {
        case AttackKind::random_substitution: return "random_substitution";
        case AttackKind::lexicon_substitution: return "lexicon_substitution";
    }
    throw InvalidInput("unknown attack kind");
}

AttackKind attack_kind_from_name(std::string_view name) {
    if (name == "random_substitution") return AttackKind::random_substitution;
    if (name == "lexicon_substitution") return AttackKind::lexicon_substitution;
    throw InvalidInput("unknown attack kind: " + std::string(name));
}

std::vector<char32_t> default_replacement_alphabet() {
    std::vector<char32_t> out;
    for (char32_t c = U'a'; c <= U'z'; ++c) out.push_back(c);
    for (char32_t c = U'A'; c <= U'Z'; ++c) out.push_back(c);
    for (char32_t c = U'0'; c <= U'9'; ++c) out.push_back(c);
    return out;
}

namespace {

char32_t draw_replacement(char32_t original, const std::vector<char32_t>& alphabet, Rng& rng) {
    std::vector<char32_t> candidates;
    candidates.reserve(alphabet.size());
    for (char32_t c : alphabet) {
        if (c != original) candidates.push_back(c);
    }
    if (candidates.empty())
        throw InvalidInput("replacement alphabet offers no alternative character");
    return candidates[rng.index(candidates.size())];
}

AdversarialPair finish_pair(std::string_view path, std::vector<char32_t> cps,
                            std::vector<Edit> edits) {
    std::sort(edits.begin(), edits.end(),
              [](const Edit& a, const Edit& b) { return a.position < b.position; });
    AdversarialPair pair;
    pair.original = std::string(path);
    pair.perturbed = encode_utf8(cps);
    pair.edits = std::move(edits);
    return pair;
}

}  // namespace

AdversarialPair attack_random(std::string_view path, double epsilon,
                              const std::vector<char32_t>& alphabet, uint64_t seed) {
    if (!(epsilon > 0.0 && epsilon <= 1.0))
        throw InvalidInput("attack_random requires 0 < epsilon <= 1");
    if (path.empty()) throw InvalidInput("attack_random on empty path");
    if (alphabet.empty()) throw InvalidInput("attack_random with empty replacement alphabet");

    std::vector<char32_t> cps = decode_utf8(path);
    const size_t len = cps.size();
    const size_t budget =
        std::min(len, static_cast<size_t>(std::ceil(epsilon * static_cast<double>(len))));

    Rng rng(seed);
    std::vector<size_t> positions(len);
    for (size_t i = 0; i < len; ++i) positions[i] = i;
    rng.shuffle(positions);
    positions.resize(budget);

    std::vector<Edit> edits;
    edits.reserve(budget);
    for (size_t pos : positions) {
        const char32_t old_char = cps[pos];
        const char32_t new_char = draw_replacement(old_char, alphabet, rng);
        cps[pos] = new_char;
        edits.push_back({pos, old_char, new_char});
    }
    return finish_pair(path, std::move(cps), std::move(edits));
}

AdversarialPair attack_lexicon(std::string_view path, const Lexicon& lexicon, int budget,
                               const std::vector<char32_t>& alphabet, uint64_t seed) {
    if (budget < 1) throw InvalidInput("attack_lexicon requires budget >= 1");
    if (alphabet.empty()) throw InvalidInput("attack_lexicon with empty replacement alphabet");

    std::vector<char32_t> cps = decode_utf8(path);

    // Lexicon words present among the path's tokens, in descending-OR order
    // (entries are already sorted), capped at the budget.
    std::unordered_set<std::string> tokens;
    for (auto& t : tokenize_words(path)) tokens.insert(std::move(t));
    std::vector<const Lexicon::Entry*> selected;
    for (const auto& e : lexicon.entries) {
        if (tokens.count(e.word)) {
            selected.push_back(&e);
            if (selected.size() == static_cast<size_t>(budget)) break;
        }
    }

    std::vector<char32_t> lowered = cps;
    for (char32_t& c : lowered) c = ascii_lower(c);

    Rng rng(seed);
    std::vector<Edit> edits;
    std::unordered_set<size_t> edited;
    for (const auto* entry : selected) {
        const std::vector<char32_t> word = decode_utf8(entry->word);
        const auto it = std::search(lowered.begin(), lowered.end(), word.begin(), word.end());
        if (it == lowered.end()) continue;  // unreachable: the token is a path substring
        const size_t start = static_cast<size_t>(it - lowered.begin());

        // One uniformly random position inside the occurrence; earlier words
        // may have edited an overlapping occurrence, so draw among untouched
        // positions (degenerate fully-edited overlaps yield no edit).
        std::vector<size_t> candidates;
        for (size_t k = 0; k < word.size(); ++k) {
            if (!edited.count(start + k)) candidates.push_back(start + k);
        }
        if (candidates.empty()) continue;
        const size_t pos = candidates[rng.index(candidates.size())];
        const char32_t old_char = cps[pos];
        const char32_t new_char = draw_replacement(old_char, alphabet, rng);
        cps[pos] = new_char;
        edited.insert(pos);
        edits.push_back({pos, old_char, new_char});
    }
    return finish_pair(path, std::move(cps), std::move(edits));
}

RobustnessReport evaluate_robustness(const PathScorer& scorer, const Dataset& positives,
                                     const AttackSpec& spec, const Lexicon* lexicon,
                                     double threshold) {
    if (positives.empty()) throw InvalidInput("evaluate_robustness on empty positives");
    for (const auto& rec : positives.records) {
        if (rec.label != Label::positive)
            throw InvalidInput("evaluate_robustness: dataset contains non-positive records");
    }
    const std::vector<char32_t> alphabet =
        spec.replacement_alphabet.empty() ? default_replacement_alphabet()
                                          : spec.replacement_alphabet;
    int word_budget = 0;
    if (spec.kind == AttackKind::lexicon_substitution) {
        if (!lexicon) throw InvalidInput("lexicon_substitution requires a lexicon");
        if (spec.epsilon < 1.0 || spec.epsilon != std::floor(spec.epsilon))
            throw InvalidInput("lexicon_substitution budget must be an integer >= 1");
        word_budget = static_cast<int>(spec.epsilon);
    } else if (!(spec.epsilon > 0.0 && spec.epsilon <= 1.0)) {
        throw InvalidInput("random_substitution requires 0 < epsilon <= 1");
    }

    RobustnessReport report;
    report.kind = spec.kind;
    report.budget = spec.epsilon;
    report.n_samples = positives.size();

    size_t clean_hits = 0, adv_hits = 0;
    std::vector<double> deltas;
    deltas.reserve(positives.size());
    for (size_t i = 0; i < positives.records.size(); ++i) {
        const auto& rec = positives.records[i];
        const uint64_t record_seed = derive_seed(spec.seed + i, "attack_record");
        const AdversarialPair pair =
            spec.kind == AttackKind::random_substitution
                ? attack_random(rec.path, spec.epsilon, alphabet, record_seed)
                : attack_lexicon(rec.path, *lexicon, word_budget, alphabet, record_seed);

        const double clean = scorer.score(pair.original);
        const double adv = scorer.score(pair.perturbed);
        if (clean >= threshold) ++clean_hits;
        if (adv >= threshold) ++adv_hits;
        deltas.push_back(clean - adv);
        report.total_edits += pair.edits.size();
    }
    const double n = static_cast<double>(positives.size());
    report.clean_recall = static_cast<double>(clean_hits) / n;
    report.adversarial_recall = static_cast<double>(adv_hits) / n;
    double mean = 0.0;
    for (double d : deltas) mean += d;
    mean /= n;
    double ss = 0.0;
    for (double d : deltas) ss += (d - mean) * (d - mean);
    report.confidence_decrease_mean = mean;
    report.confidence_decrease_std = std::sqrt(ss / n);
    return report;
}

}  // namespace pathclass
