#include "pathclass/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "json.hpp"
#include "pathclass/error.hpp"
#include "pathclass/fingerprint.hpp"
#include "pathclass/rng.hpp"

namespace pathclass {

using nlohmann::json;

Label map_label(int raw_label) {
    switch (raw_label) {
        case 0:
            return Label::negative;
        case 1:
        case 2:
        case 3:
            return Label::positive;
        default:
            throw InvalidInput("raw_label out of range {0,1,2,3}: " + std::to_string(raw_label));
    }
}

std::string extract_system_id(const std::string& path) {
    if (path.empty()) throw InvalidInput("empty path has no system id");
    const size_t pos = path.find_first_of("/\\");
    return pos == std::string::npos ? path : path.substr(0, pos);
}

FoldAssignment grouped_kfold(const Dataset& dataset, int k, uint64_t seed) {
    if (k < 2) throw InvalidInput("grouped_kfold requires k >= 2");
    if (dataset.empty()) throw InvalidInput("grouped_kfold on empty dataset");

    // Distinct systems in first-appearance order, then a seeded shuffle.
    std::vector<std::string> systems;
    std::unordered_map<std::string, int> fold_of_system;
    for (const auto& rec : dataset.records) {
        if (fold_of_system.emplace(rec.system_id, -1).second) systems.push_back(rec.system_id);
    }
    if (systems.size() < static_cast<size_t>(k)) {
        throw InfeasibleSplit("only " + std::to_string(systems.size()) + " distinct systems for k=" +
                              std::to_string(k));
    }

    Rng rng(seed);
    rng.shuffle(systems);
    for (size_t i = 0; i < systems.size(); ++i) {
        fold_of_system[systems[i]] = static_cast<int>(i % static_cast<size_t>(k));
    }

    FoldAssignment out;
    out.k = k;
    out.fold_of.reserve(dataset.size());
    for (const auto& rec : dataset.records) out.fold_of.push_back(fold_of_system[rec.system_id]);
    return out;
}

std::vector<size_t> fold_indices(const FoldAssignment& folds, int fold, bool complement) {
    std::vector<size_t> out;
    for (size_t i = 0; i < folds.fold_of.size(); ++i) {
        if ((folds.fold_of[i] == fold) != complement) out.push_back(i);
    }
    return out;
}

Dataset subset_dataset(const Dataset& dataset, const std::vector<size_t>& rows,
                       const std::string& provenance) {
    Dataset out;
    out.provenance = provenance.empty() ? dataset.provenance : provenance;
    out.records.reserve(rows.size());
    for (size_t i : rows) out.records.push_back(dataset.records.at(i));
    return out;
}

namespace {

void validate_synth_config(const SynthConfig& c) {
    if (c.n_records == 0) throw InvalidInput("synthetic config: n_records must be positive");
    if (c.n_systems == 0 || c.n_systems > c.n_records)
        throw InvalidInput("synthetic config: need 0 < n_systems <= n_records");
    if (!(c.positive_fraction > 0.0 && c.positive_fraction < 1.0))
        throw InvalidInput("synthetic config: positive_fraction must be in (0,1)");
    if (c.positive_vocab.empty() || c.neutral_vocab.empty())
        throw InvalidInput("synthetic config: vocab lists must be non-empty");
    if (c.min_depth < 0 || c.max_depth < c.min_depth)
        throw InvalidInput("synthetic config: bad path_depth range");
    if (c.min_name_tokens < 1 || c.max_name_tokens < c.min_name_tokens)
        throw InvalidInput("synthetic config: bad name_token range");
    std::unordered_set<std::string> pos(c.positive_vocab.begin(), c.positive_vocab.end());
    for (const auto& w : c.neutral_vocab) {
        if (pos.count(w))
            throw InvalidInput("synthetic config: vocab lists overlap on \"" + w + "\"");
    }
    for (const auto& list : {c.positive_vocab, c.neutral_vocab}) {
        for (const auto& w : list) {
            if (w.empty()) throw InvalidInput("synthetic config: empty vocab word");
        }
    }
}

const char* const kSynthExtensions[] = {"jpg", "png", "mp4", "avi", "pdf", "doc", "mov", "gif"};

}  // namespace

Dataset generate_synthetic(const SynthConfig& config) {
    validate_synth_config(config);
    Rng rng(derive_seed(config.seed, "synth"));

    // Exact positive count, shuffled over record slots.
    const size_t n_pos = static_cast<size_t>(config.positive_fraction *
                                             static_cast<double>(config.n_records) + 0.5);
    std::vector<char> is_positive(config.n_records, 0);
    std::fill(is_positive.begin(), is_positive.begin() + static_cast<long>(n_pos), 1);
    rng.shuffle(is_positive);

    auto pick = [&rng](const std::vector<std::string>& words) -> const std::string& {
        return words[rng.index(words.size())];
    };
    auto int_in = [&rng](int lo, int hi) {
        return lo + static_cast<int>(rng.index(static_cast<uint64_t>(hi - lo + 1)));
    };

    Dataset out;
    out.provenance = "synthetic";
    out.records.reserve(config.n_records);
    for (size_t i = 0; i < config.n_records; ++i) {
        const bool positive = is_positive[i] != 0;
        const size_t system = rng.index(config.n_systems);

        const int depth = int_in(config.min_depth, config.max_depth);
        const int name_tokens = int_in(config.min_name_tokens, config.max_name_tokens);

        // Token slots: one per directory level plus the file-name tokens.
        // Positives get 1..min(3, slots) of them replaced by planted words.
        std::vector<std::string> tokens;
        for (int d = 0; d < depth + name_tokens; ++d) tokens.push_back(pick(config.neutral_vocab));
        if (positive) {
            const int slots = static_cast<int>(tokens.size());
            const int planted = int_in(1, std::min(3, slots));
            std::vector<int> order(slots);
            for (int j = 0; j < slots; ++j) order[j] = j;
            rng.shuffle(order);
            for (int j = 0; j < planted; ++j) tokens[order[j]] = pick(config.positive_vocab);
        }

        std::string path = "sys" + std::to_string(system);
        for (int d = 0; d < depth; ++d) path += "/" + tokens[d];
        path += "/";
        for (int t = 0; t < name_tokens; ++t) {
            if (t > 0) path += "_";
            path += tokens[depth + t];
        }
        path += ".";
        path += kSynthExtensions[rng.index(std::size(kSynthExtensions))];

        PathRecord rec;
        rec.path = std::move(path);
        rec.raw_label = positive ? 1 : 0;
        rec.label = positive ? Label::positive : Label::negative;
        rec.system_id = "sys" + std::to_string(system);
        out.records.push_back(std::move(rec));
    }
    return out;
}

Dataset load_dataset(std::istream& in, const std::string& provenance) {
    Dataset out;
    out.provenance = provenance;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw InvalidInput("row " + std::to_string(line_no) + ": bad JSON: " + e.what());
        }
        try {
            PathRecord rec;
            rec.path = j.at("path").get<std::string>();
            if (rec.path.empty()) throw InvalidInput("empty path");
            rec.raw_label = j.at("raw_label").get<int>();
            rec.label = map_label(rec.raw_label);
            if (j.contains("system_id")) {
                rec.system_id = j["system_id"].get<std::string>();
                if (rec.system_id.empty()) throw InvalidInput("empty system_id");
            } else {
                rec.system_id = extract_system_id(rec.path);
            }
            out.records.push_back(std::move(rec));
        } catch (const json::exception& e) {
            throw InvalidInput("row " + std::to_string(line_no) + ": " + e.what());
        } catch (const InvalidInput& e) {
            throw InvalidInput("row " + std::to_string(line_no) + ": " + e.what());
        }
    }
    if (out.records.empty()) throw InvalidInput("dataset stream contains no records");
    return out;
}

Dataset load_dataset_file(const std::string& file) {
    std::ifstream in(file);
    if (!in) throw InvalidInput("cannot open dataset file: " + file);
    return load_dataset(in, file);
}

void save_dataset(const Dataset& dataset, std::ostream& out) {
    for (const auto& rec : dataset.records) {
        json j;
        j["path"] = rec.path;
        j["raw_label"] = rec.raw_label;
        j["system_id"] = rec.system_id;
        out << j.dump() << '\n';
    }
}

void save_dataset_file(const Dataset& dataset, const std::string& file) {
    std::ofstream out(file);
    if (!out) throw Error("cannot write dataset file: " + file);
    save_dataset(dataset, out);
    if (!out) throw Error("short write to dataset file: " + file);
}

uint64_t dataset_fingerprint(const Dataset& dataset) {
    uint64_t h = kFnvBasis;
    for (const auto& rec : dataset.records) {
        h = fnv1a64(rec.path, h);
        h = fnv1a64(static_cast<uint64_t>(rec.raw_label), h);
        h = fnv1a64(rec.system_id, h);
    }
    h = fnv1a64(static_cast<uint64_t>(dataset.size()), h);
    return h;
}

}  // namespace pathclass
