#include "pathclass/cli.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>

#include "json.hpp"
#include "pathclass/attacks.hpp"
#include "pathclass/corpus.hpp"
#include "pathclass/crawlmine.hpp"
#include "pathclass/error.hpp"
#include "pathclass/featurize.hpp"
#include "pathclass/fingerprint.hpp"
#include "pathclass/metrics.hpp"
#include "pathclass/models.hpp"
#include "pathclass/rng.hpp"
#include "pathclass/text.hpp"

namespace pathclass::cli {

using nlohmann::json;

namespace {

json load_config(const std::string& file) {
    if (file.empty()) return json::object();
    std::ifstream in(file);
    if (!in) throw InvalidInput("cannot open config file: " + file);
    try {
        json j;
        in >> j;
        if (!j.is_object()) throw InvalidInput("config root must be a JSON object");
        return j;
    } catch (const json::exception& e) {
        throw InvalidInput("config is not valid JSON: " + std::string(e.what()));
    }
}

uint64_t resolve_seed(const json& config, const std::optional<uint64_t>& flag) {
    if (flag) return *flag;
    if (config.contains("seed")) {
        try {
            return config.at("seed").get<uint64_t>();
        } catch (const json::exception&) {
            throw InvalidInput("config seed must be a nonnegative integer");
        }
    }
    return 0;
}

// Run identity: a content hash of everything that determines the numbers.
std::string run_id(const std::string& command, const json& config, uint64_t seed) {
    uint64_t h = fnv1a64(command);
    h = fnv1a64(config.dump(), h);
    h = fnv1a64(seed, h);
    return fingerprint_hex(h);
}

json base_report(const std::string& command, const json& config, uint64_t seed) {
    json report;
    report["schema_version"] = 1;
    report["command"] = command;
    report["run_id"] = run_id(command, config, seed);
    report["seed"] = seed;
    report["config"] = config;
    report["warnings"] = json::array();
    return report;
}

void write_json_file(const json& j, const std::string& file) {
    std::ofstream out(file);
    if (!out) throw Error("cannot write file: " + file);
    out << j.dump(2) << '\n';
    if (!out) throw Error("short write: " + file);
}

class Timer {
public:
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

FeatureConfig parse_feature_config(const json& j) {
    FeatureConfig fc;
    if (!j.is_object()) throw InvalidInput("features config must be an object");
    try {
        fc.kind = feature_kind_from_name(j.value("kind", std::string("tfidf_words")));
        // vocabulary defaults differ by kind: 5,000 words vs 50,000 n-grams
        fc.max_size = j.value("max_size",
                              fc.kind == FeatureKind::tfidf_ngrams ? size_t{50000} : size_t{5000});
        fc.n_max = j.value("n_max", 3);
        fc.alphabet_cap = j.value("alphabet_cap", size_t{802});
        fc.l = j.value("l", 300);
    } catch (const json::exception& e) {
        throw InvalidInput("bad features config: " + std::string(e.what()));
    }
    if (fc.max_size < 1 || fc.n_max < 1 || fc.alphabet_cap < 1 || fc.l < 1)
        throw InvalidInput("features config values must be positive");
    return fc;
}

json feature_config_echo(const FeatureConfig& fc) {
    json j;
    j["kind"] = feature_kind_name(fc.kind);
    j["max_size"] = fc.max_size;
    j["n_max"] = fc.n_max;
    j["alphabet_cap"] = fc.alphabet_cap;
    j["l"] = fc.l;
    return j;
}

ModelSpec parse_model_spec(const json& j, uint64_t run_seed) {
    if (!j.is_object()) throw InvalidInput("model config must be an object");
    ModelSpec spec;
    try {
        spec.family = model_family_from_name(j.value("family", std::string("logreg")));
        if (j.contains("hyperparams")) {
            spec.hyperparams = j.at("hyperparams").get<Hyperparams>();
        }
        spec.seed = j.value("seed", derive_seed(run_seed, "model"));
    } catch (const json::exception& e) {
        throw InvalidInput("bad model config: " + std::string(e.what()));
    }
    spec.hyperparams = resolve_hyperparams(spec.family, spec.hyperparams);
    return spec;
}

json summary_to_json(const MetricSummary& s) {
    json j;
    j["mean"] = s.mean;
    j["stddev"] = s.stddev;
    j["n_defined"] = s.n_defined;
    json folds = json::array();
    for (const auto& v : s.per_fold) {
        if (v) {
            folds.push_back(*v);
        } else {
            folds.push_back(nullptr);
        }
    }
    j["per_fold"] = std::move(folds);
    return j;
}

json robustness_to_json(const RobustnessReport& r) {
    json j;
    j["kind"] = attack_kind_name(r.kind);
    j["budget"] = r.budget;
    j["clean_recall"] = r.clean_recall;
    j["adversarial_recall"] = r.adversarial_recall;
    j["confidence_decrease_mean"] = r.confidence_decrease_mean;
    j["confidence_decrease_std"] = r.confidence_decrease_std;
    j["n_samples"] = r.n_samples;
    j["total_edits"] = r.total_edits;
    return j;
}

std::vector<double> parse_thresholds(const json& config) {
    std::vector<double> thresholds;
    if (config.contains("thresholds")) {
        try {
            thresholds = config.at("thresholds").get<std::vector<double>>();
        } catch (const json::exception& e) {
            throw InvalidInput("bad thresholds list: " + std::string(e.what()));
        }
        if (thresholds.empty()) throw InvalidInput("thresholds list is empty");
        for (size_t i = 0; i < thresholds.size(); ++i) {
            if (thresholds[i] < 0.0 || thresholds[i] > 1.0)
                throw InvalidInput("thresholds must lie in [0,1]");
            if (i > 0 && !(thresholds[i] > thresholds[i - 1]))
                throw InvalidInput("thresholds must be strictly increasing");
        }
        return thresholds;
    }
    // Default grid: 0.05 steps, with 0.85 and 0.95 always present.
    for (int i = 5; i <= 95; i += 5) thresholds.push_back(static_cast<double>(i) / 100.0);
    return thresholds;
}

std::vector<char32_t> parse_replacement_alphabet(const json& config) {
    if (!config.contains("replacement_alphabet")) return {};
    const auto s = config.at("replacement_alphabet").get<std::string>();
    std::vector<char32_t> cps = decode_utf8(s);
    if (cps.empty()) throw InvalidInput("replacement_alphabet must not be empty");
    return cps;
}

int guard(const std::function<int()>& body) {
    try {
        return body();
    } catch (const InvalidInput& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
}

}  // namespace

int run_synth(const SynthArgs& args) {
    return guard([&] {
        const json config = load_config(args.config_file);
        const uint64_t seed = resolve_seed(config, args.seed);

        SynthConfig sc;
        sc.seed = seed;
        try {
            sc.n_records = config.at("n_records").get<size_t>();
            sc.n_systems = config.at("n_systems").get<size_t>();
            sc.positive_fraction = config.value("positive_fraction", 0.3);
            sc.positive_vocab = config.value(
                "positive_vocab",
                std::vector<std::string>{"zeph", "quill", "vortex", "umbra", "krypt", "flux"});
            sc.neutral_vocab = config.value(
                "neutral_vocab",
                std::vector<std::string>{"photo",  "img",   "video", "doc",    "report", "family",
                                         "trip",   "work",  "misc",  "archive", "backup", "data",
                                         "notes",  "music", "draft", "final",  "scan",   "page",
                                         "sample", "old"});
            sc.min_depth = config.value("min_depth", 1);
            sc.max_depth = config.value("max_depth", 3);
            sc.min_name_tokens = config.value("min_name_tokens", 1);
            sc.max_name_tokens = config.value("max_name_tokens", 3);
        } catch (const json::exception& e) {
            throw InvalidInput("bad synth config: " + std::string(e.what()));
        }

        const Timer timer;
        const Dataset dataset = generate_synthetic(sc);
        save_dataset_file(dataset, args.out);

        json manifest = base_report("synth", config, seed);
        manifest["dataset"] = args.out;
        manifest["n_records"] = dataset.size();
        size_t n_pos = 0;
        for (const auto& r : dataset.records) n_pos += r.label == Label::positive ? 1 : 0;
        manifest["n_positive"] = n_pos;
        manifest["dataset_fingerprint"] = fingerprint_hex(dataset_fingerprint(dataset));
        manifest["timing"] = {{"seconds", timer.seconds()}};
        write_json_file(manifest, args.out + ".manifest.json");
        std::cout << "wrote " << dataset.size() << " records to " << args.out << '\n';
        return kExitOk;
    });
}

int run_train(const TrainArgs& args) {
    return guard([&] {
        const json config = load_config(args.config_file);
        const uint64_t seed = resolve_seed(config, args.seed);
        const FeatureConfig fc = parse_feature_config(
            config.contains("features") ? config.at("features") : json::object());
        const ModelSpec spec = parse_model_spec(
            config.contains("model") ? config.at("model") : json::object(), seed);
        const double lexicon_threshold = config.value("lexicon_threshold", 2.0);

        const Timer timer;
        const Dataset train = load_dataset_file(args.dataset);

        const FeatureSpace fs = fit_feature_space(train, fc);
        std::vector<FeatureInput> inputs;
        std::vector<int> labels;
        inputs.reserve(train.size());
        for (const auto& r : train.records) {
            inputs.push_back(fs.transform(r.path));
            labels.push_back(r.label == Label::positive ? 1 : 0);
        }
        const auto model = fit(spec, fs.kind, inputs, labels, fs.training_fingerprint,
                               fs.content_fingerprint());
        const Lexicon lexicon = build_lexicon(train, lexicon_threshold);

        std::filesystem::create_directories(args.outdir);
        const std::string fdir = args.outdir + "/";
        fs.save_file(fdir + "features.json");
        save_model_file(*model, fdir + "model.json");
        save_lexicon_file(lexicon, fdir + "lexicon.json");

        json report = base_report("train", config, seed);
        report["dataset"] = args.dataset;
        report["n_records"] = train.size();
        report["training_fingerprint"] = fingerprint_hex(fs.training_fingerprint);
        report["feature_space_fingerprint"] = fingerprint_hex(fs.content_fingerprint());
        report["lexicon_size"] = lexicon.entries.size();
        report["artifacts"] = {{"features", fdir + "features.json"},
                               {"model", fdir + "model.json"},
                               {"lexicon", fdir + "lexicon.json"}};
        report["timing"] = {{"seconds", timer.seconds()}};
        write_json_file(report, fdir + "report.json");
        std::cout << "trained " << model_family_name(spec.family) << " on " << train.size()
                  << " records; artifacts in " << args.outdir << '\n';
        return kExitOk;
    });
}

int run_crossval(const CrossvalArgs& args) {
    return guard([&] {
        const json config = load_config(args.config_file);
        const uint64_t seed = resolve_seed(config, args.seed);
        const int k = config.value("k", 10);
        const double threshold = config.value("threshold", 0.5);
        if (k < 2) throw InvalidInput("k must be at least 2");
        if (threshold < 0.0 || threshold > 1.0) throw InvalidInput("threshold must lie in [0,1]");

        // One (features, model) pair, or an explicit grid of pairs.
        std::vector<std::pair<FeatureConfig, ModelSpec>> grid;
        if (config.contains("grid")) {
            for (const auto& cell : config.at("grid")) {
                grid.emplace_back(parse_feature_config(cell.at("features")),
                                  parse_model_spec(cell.at("model"), seed));
            }
        } else {
            grid.emplace_back(
                parse_feature_config(config.contains("features") ? config.at("features")
                                                                 : json::object()),
                parse_model_spec(config.contains("model") ? config.at("model") : json::object(),
                                 seed));
        }
        if (grid.empty()) throw InvalidInput("crossval grid is empty");

        const Timer timer;
        const Dataset dataset = load_dataset_file(args.dataset);
        const FoldAssignment folds = grouped_kfold(dataset, k, derive_seed(seed, "kfold"));

        json report = base_report("crossval", config, seed);
        report["dataset"] = args.dataset;
        report["dataset_fingerprint"] = fingerprint_hex(dataset_fingerprint(dataset));
        report["k"] = k;
        report["threshold"] = threshold;
        json results = json::array();
        for (const auto& [fc, spec] : grid) {
            const EvalSummary summary = crossval_evaluate(spec, fc, dataset, folds, threshold);
            json cell;
            cell["features"] = feature_config_echo(fc);
            cell["model"] = model_family_name(spec.family);
            cell["hyperparams"] = spec.hyperparams;
            cell["auc"] = summary_to_json(summary.auc);
            cell["accuracy"] = summary_to_json(summary.accuracy);
            cell["precision"] = summary_to_json(summary.precision);
            cell["recall"] = summary_to_json(summary.recall);
            results.push_back(std::move(cell));
            for (const auto& w : summary.warnings) report["warnings"].push_back(w);
        }
        report["results"] = std::move(results);
        report["timing"] = {{"seconds", timer.seconds()}};
        write_json_file(report, args.report);
        std::cout << "crossval report written to " << args.report << '\n';
        return kExitOk;
    });
}

int run_attack(const AttackArgs& args) {
    return guard([&] {
        const json config = load_config(args.config_file);
        const uint64_t seed = resolve_seed(config, args.seed);
        const double threshold = config.value("threshold", 0.5);
        const double lexicon_threshold = config.value("lexicon_threshold", 2.0);
        std::vector<double> epsilons =
            config.value("random_epsilons", std::vector<double>{0.10, 0.15, 0.20});
        std::vector<int> budgets = config.value("word_budgets", std::vector<int>{1, 2, 3, 4});
        const std::vector<char32_t> alphabet = parse_replacement_alphabet(config);
        for (double e : epsilons) {
            if (!(e > 0.0 && e <= 1.0)) throw InvalidInput("random epsilons must be in (0,1]");
        }
        for (int b : budgets) {
            if (b < 1) throw InvalidInput("word budgets must be >= 1");
        }

        const Timer timer;
        FeatureSpace fs = FeatureSpace::load_file(args.features);
        std::shared_ptr<const TrainedModel> model = load_model_file(args.model);
        const PathScorer scorer(std::move(fs), model);

        const Dataset train = load_dataset_file(args.train_dataset);
        const Dataset positives = load_dataset_file(args.positives);
        const Lexicon lexicon = build_lexicon(train, lexicon_threshold);

        // The lexicon is adversary knowledge distilled from training data; it
        // must never be built from the records under attack.
        if (lexicon.source_fingerprint == dataset_fingerprint(positives))
            throw InvalidInput("attack lexicon was built from the evaluation records");

        json report = base_report("attack", config, seed);
        report["model"] = args.model;
        report["features"] = args.features;
        report["threshold"] = threshold;
        report["n_positives"] = positives.size();
        report["lexicon"] = {{"size", lexicon.entries.size()},
                             {"threshold", lexicon.threshold},
                             {"source_fingerprint", fingerprint_hex(lexicon.source_fingerprint)},
                             {"positives_fingerprint",
                              fingerprint_hex(dataset_fingerprint(positives))}};

        json random_reports = json::array();
        for (size_t i = 0; i < epsilons.size(); ++i) {
            AttackSpec spec;
            spec.kind = AttackKind::random_substitution;
            spec.epsilon = epsilons[i];
            spec.replacement_alphabet = alphabet;
            spec.seed = derive_seed(seed, "attack_random_" + std::to_string(i));
            random_reports.push_back(
                robustness_to_json(evaluate_robustness(scorer, positives, spec, nullptr, threshold)));
        }
        report["random_substitution"] = std::move(random_reports);

        json lexicon_reports = json::array();
        for (size_t i = 0; i < budgets.size(); ++i) {
            AttackSpec spec;
            spec.kind = AttackKind::lexicon_substitution;
            spec.epsilon = static_cast<double>(budgets[i]);
            spec.replacement_alphabet = alphabet;
            spec.seed = derive_seed(seed, "attack_lexicon_" + std::to_string(i));
            lexicon_reports.push_back(robustness_to_json(
                evaluate_robustness(scorer, positives, spec, &lexicon, threshold)));
        }
        report["lexicon_substitution"] = std::move(lexicon_reports);

        report["timing"] = {{"seconds", timer.seconds()}};
        write_json_file(report, args.report);
        std::cout << "attack report written to " << args.report << '\n';
        return kExitOk;
    });
}

int run_fpr(const FprArgs& args) {
    return guard([&] {
        const json config = load_config(args.config_file);
        const std::vector<double> thresholds = parse_thresholds(config);
        if (args.benign.empty()) throw InvalidInput("fpr requires at least one benign corpus");

        const Timer timer;
        FeatureSpace fs = FeatureSpace::load_file(args.features);
        std::shared_ptr<const TrainedModel> model = load_model_file(args.model);
        const PathScorer scorer(std::move(fs), model);

        json report = base_report("fpr", config, 0);
        report["model"] = args.model;
        report["features"] = args.features;
        json curves = json::array();
        for (const auto& corpus_file : args.benign) {
            const Dataset benign = load_dataset_file(corpus_file);
            std::vector<std::string> paths;
            paths.reserve(benign.size());
            for (const auto& r : benign.records) paths.push_back(r.path);
            const FprCurve curve = evaluate_fpr(scorer, paths, thresholds);
            json jc;
            jc["corpus"] = corpus_file;
            jc["n"] = curve.n;
            jc["thresholds"] = curve.thresholds;
            jc["fpr"] = curve.fpr;
            curves.push_back(std::move(jc));
        }
        report["curves"] = std::move(curves);
        report["timing"] = {{"seconds", timer.seconds()}};
        write_json_file(report, args.report);
        std::cout << "fpr report written to " << args.report << '\n';
        return kExitOk;
    });
}

int run_mine(const MineArgs& args) {
    return guard([&] {
        if (args.inputs.empty()) throw InvalidInput("mine requires at least one WARC input");
        const Timer timer;

        Dataset corpus;
        corpus.provenance = "mined";
        json per_file = json::array();
        size_t total_records = 0, total_responses = 0, total_skipped = 0;
        size_t windows_kept = 0, linux_kept = 0;
        for (const auto& input : args.inputs) {
            std::ifstream in(input, std::ios::binary);
            if (!in) throw InvalidInput("cannot open WARC input: " + input);
            const std::string source =
                std::filesystem::path(input).filename().string();

            MinedPaths mined;
            WarcReader reader(in);
            while (auto record = reader.next()) {
                merge_mined(mined, extract_paths(record->payload, args.strict_case));
                if (args.max_records > 0 && reader.responses_seen() >= args.max_records) break;
            }
            const MinedPaths kept = filter_paths(mined);
            windows_kept += kept.windows.size();
            linux_kept += kept.linux_paths.size();
            for (const auto& p : kept.windows) {
                corpus.records.push_back({p, 0, Label::negative, source});
            }
            for (const auto& p : kept.linux_paths) {
                corpus.records.push_back({p, 0, Label::negative, source});
            }

            json jf;
            jf["input"] = input;
            jf["records_seen"] = reader.records_seen();
            jf["responses_seen"] = reader.responses_seen();
            jf["skipped"] = reader.skipped();
            jf["windows_kept"] = kept.windows.size();
            jf["linux_kept"] = kept.linux_paths.size();
            per_file.push_back(std::move(jf));
            total_records += reader.records_seen();
            total_responses += reader.responses_seen();
            total_skipped += reader.skipped();
        }
        if (corpus.empty()) throw Error("no paths mined from the given inputs");
        save_dataset_file(corpus, args.out);

        json stats;
        stats["schema_version"] = 1;
        stats["command"] = "mine";
        stats["strict_case"] = args.strict_case;
        stats["inputs"] = std::move(per_file);
        stats["records_seen"] = total_records;
        stats["responses_seen"] = total_responses;
        stats["skipped"] = total_skipped;
        stats["windows_kept"] = windows_kept;
        stats["linux_kept"] = linux_kept;
        stats["paths_written"] = corpus.size();
        stats["timing"] = {{"seconds", timer.seconds()}};
        write_json_file(stats, args.stats_out.empty() ? args.out + ".stats.json" : args.stats_out);
        std::cout << "mined " << corpus.size() << " paths to " << args.out << '\n';
        return kExitOk;
    });
}

}  // namespace pathclass::cli
