#include "doctest.h"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>

#include "json.hpp"
#include "pathclass/cli.hpp"
#include "pathclass/corpus.hpp"
#include "pathclass/featurize.hpp"
#include "pathclass/fingerprint.hpp"
#include "pathclass/models.hpp"

using namespace pathclass;
using nlohmann::json;

namespace {

struct TempDir {
    std::filesystem::path dir;

    explicit TempDir(const std::string& name) : dir(std::filesystem::path("tmp_cli") / name) {
        std::filesystem::remove_all(dir);
        std::filesystem::create_directories(dir);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(dir, ec);
    }
    std::string path(const std::string& leaf) const { return (dir / leaf).string(); }
};

void write_text(const std::string& file, const std::string& content) {
    std::ofstream out(file, std::ios::binary);
    REQUIRE(out.good());
    out << content;
}

std::string slurp(const std::string& file) {
    std::ifstream in(file, std::ios::binary);
    REQUIRE(in.good());
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

json slurp_json(const std::string& file) { return json::parse(slurp(file)); }

json without_timing(json j) {
    j.erase("timing");
    return j;
}

// Generates a synthetic dataset through the CLI entry point and returns its path.
std::string make_synth(const TempDir& tmp, const std::string& name, size_t n_records,
                       size_t n_systems, uint64_t seed) {
    const std::string config = tmp.path(name + "_synth.json");
    write_text(config, json{{"n_records", n_records}, {"n_systems", n_systems}}.dump());
    const std::string out = tmp.path(name + ".jsonl");
    REQUIRE(cli::run_synth({config, out, seed}) == cli::kExitOk);
    return out;
}

// Trains NB on tfidf_words through the CLI and returns the artifact directory.
std::string make_artifacts(const TempDir& tmp, const std::string& dataset) {
    const std::string config = tmp.path("train.json");
    write_text(config, json{{"features", {{"kind", "tfidf_words"}}},
                            {"model", {{"family", "naive_bayes"}}}}
                           .dump());
    const std::string outdir = tmp.path("artifacts");
    REQUIRE(cli::run_train({config, dataset, outdir, 3}) == cli::kExitOk);
    return outdir;
}

std::string warc_record(const std::string& type, const std::string& uri,
                        const std::string& payload) {
    std::string out = "WARC/1.0\r\n";
    out += "WARC-Type: " + type + "\r\n";
    out += "WARC-Target-URI: " + uri + "\r\n";
    out += "Content-Length: " + std::to_string(payload.size()) + "\r\n";
    out += "\r\n" + payload + "\r\n\r\n";
    return out;
}

}  // namespace

TEST_CASE("synth writes a deterministic dataset with a manifest") {
    TempDir tmp("synth");
    const std::string config = tmp.path("config.json");
    write_text(config, json{{"n_records", 300}, {"n_systems", 20}}.dump());

    REQUIRE(cli::run_synth({config, tmp.path("a.jsonl"), 5}) == cli::kExitOk);
    REQUIRE(cli::run_synth({config, tmp.path("b.jsonl"), 5}) == cli::kExitOk);
    CHECK(slurp(tmp.path("a.jsonl")) == slurp(tmp.path("b.jsonl")));

    const json ma = slurp_json(tmp.path("a.jsonl.manifest.json"));
    CHECK(ma.at("schema_version") == 1);
    CHECK(ma.at("command") == "synth");
    CHECK(ma.at("seed") == 5);
    CHECK(ma.at("n_records") == 300);
    CHECK(ma.at("n_positive") == 90);
    CHECK(ma.at("run_id").get<std::string>().size() == 16);
    const json mb = slurp_json(tmp.path("b.jsonl.manifest.json"));
    CHECK(ma.at("dataset_fingerprint") == mb.at("dataset_fingerprint"));
    CHECK(ma.at("run_id") == mb.at("run_id"));

    const Dataset ds = load_dataset_file(tmp.path("a.jsonl"));
    CHECK(ds.size() == 300);

    // a different seed must change the records
    REQUIRE(cli::run_synth({config, tmp.path("c.jsonl"), 6}) == cli::kExitOk);
    CHECK(slurp(tmp.path("a.jsonl")) != slurp(tmp.path("c.jsonl")));
}

TEST_CASE("synth rejects bad configs with the validation exit code") {
    TempDir tmp("synth_bad");
    const std::string out = tmp.path("out.jsonl");

    write_text(tmp.path("missing_key.json"), R"({"n_systems": 5})");
    CHECK(cli::run_synth({tmp.path("missing_key.json"), out, 1}) == cli::kExitValidation);

    write_text(tmp.path("bad_fraction.json"),
               R"({"n_records": 100, "n_systems": 5, "positive_fraction": 1.5})");
    CHECK(cli::run_synth({tmp.path("bad_fraction.json"), out, 1}) == cli::kExitValidation);

    write_text(tmp.path("not_json.json"), "{nope");
    CHECK(cli::run_synth({tmp.path("not_json.json"), out, 1}) == cli::kExitValidation);

    write_text(tmp.path("not_object.json"), "[1, 2]");
    CHECK(cli::run_synth({tmp.path("not_object.json"), out, 1}) == cli::kExitValidation);

    CHECK(cli::run_synth({tmp.path("no_such_file.json"), out, 1}) == cli::kExitValidation);
}

TEST_CASE("crossval reports are deterministic for a fixed config and seed") {
    TempDir tmp("crossval");
    const std::string dataset = make_synth(tmp, "data", 400, 20, 7);

    const std::string config = tmp.path("cv.json");
    write_text(config, json{{"k", 4},
                            {"seed", 9},  // seed taken from the config, not the flag
                            {"features", {{"kind", "tfidf_words"}}},
                            {"model", {{"family", "naive_bayes"}}}}
                           .dump());

    REQUIRE(cli::run_crossval({config, dataset, tmp.path("r1.json"), std::nullopt}) ==
            cli::kExitOk);
    REQUIRE(cli::run_crossval({config, dataset, tmp.path("r2.json"), std::nullopt}) ==
            cli::kExitOk);
    const json r1 = slurp_json(tmp.path("r1.json"));
    const json r2 = slurp_json(tmp.path("r2.json"));
    CHECK(without_timing(r1) == without_timing(r2));

    CHECK(r1.at("schema_version") == 1);
    CHECK(r1.at("command") == "crossval");
    CHECK(r1.at("seed") == 9);
    CHECK(r1.at("k") == 4);
    REQUIRE(r1.at("results").size() == 1);
    const json& cell = r1.at("results").at(0);
    CHECK(cell.at("model") == "naive_bayes");
    CHECK(cell.at("auc").at("n_defined") == 4);
    CHECK(cell.at("auc").at("mean").get<double>() > 0.9);
    CHECK(cell.at("auc").at("per_fold").size() == 4);

    // the flag overrides the config seed and changes the fold split
    REQUIRE(cli::run_crossval({config, dataset, tmp.path("r3.json"), 10}) == cli::kExitOk);
    CHECK(slurp_json(tmp.path("r3.json")).at("seed") == 10);
}

TEST_CASE("crossval grid runs one result cell per pair") {
    TempDir tmp("grid");
    const std::string dataset = make_synth(tmp, "data", 300, 15, 8);
    const std::string config = tmp.path("cv.json");
    write_text(config,
               json{{"k", 3},
                    {"grid",
                     json::array({{{"features", {{"kind", "tfidf_words"}}},
                                   {"model", {{"family", "naive_bayes"}}}},
                                  {{"features", {{"kind", "tfidf_ngrams"}, {"max_size", 2000}}},
                                   {"model", {{"family", "logreg"},
                                              {"hyperparams", {{"epochs", 8}}}}}}})}}
                   .dump());
    REQUIRE(cli::run_crossval({config, dataset, tmp.path("r.json"), 1}) == cli::kExitOk);
    const json r = slurp_json(tmp.path("r.json"));
    REQUIRE(r.at("results").size() == 2);
    CHECK(r.at("results").at(0).at("model") == "naive_bayes");
    CHECK(r.at("results").at(1).at("model") == "logreg");
    CHECK(r.at("results").at(1).at("features").at("kind") == "tfidf_ngrams");
}

TEST_CASE("crossval validation failures exit with the validation code") {
    TempDir tmp("crossval_bad");
    const std::string dataset = make_synth(tmp, "data", 100, 10, 2);
    const std::string report = tmp.path("r.json");

    write_text(tmp.path("too_many_folds.json"),
               json{{"k", 50}, {"model", {{"family", "naive_bayes"}}}}.dump());
    CHECK(cli::run_crossval({tmp.path("too_many_folds.json"), dataset, report, 1}) ==
          cli::kExitValidation);

    write_text(tmp.path("k1.json"), json{{"k", 1}}.dump());
    CHECK(cli::run_crossval({tmp.path("k1.json"), dataset, report, 1}) == cli::kExitValidation);

    write_text(tmp.path("bad_threshold.json"), json{{"k", 2}, {"threshold", 1.5}}.dump());
    CHECK(cli::run_crossval({tmp.path("bad_threshold.json"), dataset, report, 1}) ==
          cli::kExitValidation);

    write_text(tmp.path("ok.json"), json{{"k", 2},
                                         {"features", {{"kind", "tfidf_words"}}},
                                         {"model", {{"family", "naive_bayes"}}}}
                                        .dump());
    CHECK(cli::run_crossval({tmp.path("ok.json"), tmp.path("missing.jsonl"), report, 1}) ==
          cli::kExitValidation);

    write_text(tmp.path("bad_family.json"),
               json{{"k", 2}, {"model", {{"family", "perceptron"}}}}.dump());
    CHECK(cli::run_crossval({tmp.path("bad_family.json"), dataset, report, 1}) ==
          cli::kExitValidation);
}

TEST_CASE("train writes artifacts that load back into a working scorer") {
    TempDir tmp("train");
    const std::string dataset = make_synth(tmp, "data", 300, 15, 4);
    const std::string outdir = make_artifacts(tmp, dataset);

    for (const char* leaf : {"features.json", "model.json", "lexicon.json", "report.json"}) {
        CHECK(std::filesystem::exists(std::filesystem::path(outdir) / leaf));
    }

    const FeatureSpace fs = FeatureSpace::load_file(outdir + "/features.json");
    std::shared_ptr<const TrainedModel> model = load_model_file(outdir + "/model.json");
    const PathScorer scorer(fs, model);
    const double s = scorer.score("sys042/zeph_photo.jpg");
    CHECK(s >= 0.0);
    CHECK(s <= 1.0);

    const json report = slurp_json(outdir + "/report.json");
    CHECK(report.at("command") == "train");
    CHECK(report.at("n_records") == 300);
    CHECK(report.at("lexicon_size").get<size_t>() > 0);
    CHECK(report.at("feature_space_fingerprint") == fingerprint_hex(fs.content_fingerprint()));

    // retraining into the same directory is reproducible apart from timing
    const std::string config = tmp.path("train.json");
    const std::string outdir2 = tmp.path("artifacts2");
    REQUIRE(cli::run_train({config, dataset, outdir2, 3}) == cli::kExitOk);
    CHECK(slurp(outdir + "/features.json") == slurp(outdir2 + "/features.json"));
    CHECK(slurp(outdir + "/model.json") == slurp(outdir2 + "/model.json"));
    CHECK(slurp(outdir + "/lexicon.json") == slurp(outdir2 + "/lexicon.json"));
}

TEST_CASE("attack reports honor budgets and refuse a tainted lexicon source") {
    TempDir tmp("attack");
    const std::string train_data = make_synth(tmp, "train", 600, 25, 21);
    const std::string eval_data = make_synth(tmp, "eval", 200, 15, 22);
    const std::string outdir = make_artifacts(tmp, train_data);

    // carve the positive records out of the held-out corpus
    const Dataset eval = load_dataset_file(eval_data);
    Dataset pos;
    for (const auto& r : eval.records) {
        if (r.label == Label::positive) pos.records.push_back(r);
    }
    const std::string positives = tmp.path("positives.jsonl");
    save_dataset_file(pos, positives);

    const std::string config = tmp.path("attack.json");
    write_text(config, json{{"random_epsilons", {0.15}}, {"word_budgets", {1, 2}}}.dump());

    const cli::AttackArgs args{config,
                               outdir + "/model.json",
                               outdir + "/features.json",
                               train_data,
                               positives,
                               tmp.path("report.json"),
                               33};
    REQUIRE(cli::run_attack(args) == cli::kExitOk);
    const json report = slurp_json(tmp.path("report.json"));
    CHECK(report.at("command") == "attack");
    CHECK(report.at("n_positives") == pos.size());
    CHECK(report.at("lexicon").at("size").get<size_t>() > 0);

    REQUIRE(report.at("random_substitution").size() == 1);
    const json& rnd = report.at("random_substitution").at(0);
    CHECK(rnd.at("kind") == "random_substitution");
    CHECK(rnd.at("n_samples") == pos.size());
    CHECK(rnd.at("adversarial_recall").get<double>() <=
          rnd.at("clean_recall").get<double>() + 1e-12);

    REQUIRE(report.at("lexicon_substitution").size() == 2);
    const json& lex1 = report.at("lexicon_substitution").at(0);
    const json& lex2 = report.at("lexicon_substitution").at(1);
    CHECK(lex1.at("budget") == 1.0);
    CHECK(lex2.at("budget") == 2.0);
    CHECK(lex1.at("total_edits").get<size_t>() > 0);
    CHECK(lex2.at("total_edits").get<size_t>() >= lex1.at("total_edits").get<size_t>());

    cli::AttackArgs again = args;
    again.report = tmp.path("report2.json");
    REQUIRE(cli::run_attack(again) == cli::kExitOk);
    CHECK(without_timing(report) == without_timing(slurp_json(again.report)));

    // building the lexicon from the records under attack is a hard error
    cli::AttackArgs tainted = args;
    tainted.train_dataset = positives;
    CHECK(cli::run_attack(tainted) == cli::kExitValidation);

    write_text(tmp.path("bad_eps.json"), json{{"random_epsilons", {0.0}}}.dump());
    cli::AttackArgs bad_eps = args;
    bad_eps.config_file = tmp.path("bad_eps.json");
    CHECK(cli::run_attack(bad_eps) == cli::kExitValidation);
}

TEST_CASE("fpr writes one monotone curve per benign corpus") {
    TempDir tmp("fpr");
    const std::string train_data = make_synth(tmp, "train", 300, 15, 31);
    const std::string outdir = make_artifacts(tmp, train_data);

    const Dataset eval = load_dataset_file(make_synth(tmp, "eval", 200, 10, 32));
    Dataset benign1, benign2;
    for (const auto& r : eval.records) {
        if (r.label == Label::negative) {
            (benign1.size() < 40 ? benign1 : benign2).records.push_back(r);
        }
    }
    REQUIRE(!benign1.empty());
    REQUIRE(!benign2.empty());
    save_dataset_file(benign1, tmp.path("benign1.jsonl"));
    save_dataset_file(benign2, tmp.path("benign2.jsonl"));

    write_text(tmp.path("fpr.json"), "{}");
    const cli::FprArgs args{tmp.path("fpr.json"),
                            outdir + "/model.json",
                            outdir + "/features.json",
                            {tmp.path("benign1.jsonl"), tmp.path("benign2.jsonl")},
                            tmp.path("report.json")};
    REQUIRE(cli::run_fpr(args) == cli::kExitOk);
    const json report = slurp_json(tmp.path("report.json"));
    CHECK(report.at("command") == "fpr");
    REQUIRE(report.at("curves").size() == 2);
    for (const json& curve : report.at("curves")) {
        const auto thresholds = curve.at("thresholds").get<std::vector<double>>();
        const auto fpr = curve.at("fpr").get<std::vector<double>>();
        REQUIRE(thresholds.size() == 19);  // default grid 0.05..0.95
        CHECK(thresholds.front() == 0.05);
        CHECK(thresholds.back() == 0.95);
        REQUIRE(fpr.size() == thresholds.size());
        CHECK(std::is_sorted(fpr.rbegin(), fpr.rend()));
    }
    CHECK(report.at("curves").at(0).at("n") == benign1.size());

    cli::FprArgs no_benign = args;
    no_benign.benign.clear();
    CHECK(cli::run_fpr(no_benign) == cli::kExitValidation);

    cli::FprArgs bad_model = args;
    bad_model.model = tmp.path("nope.json");
    CHECK(cli::run_fpr(bad_model) == cli::kExitValidation);
}

TEST_CASE("mine converts WARC responses into a negative corpus with stats") {
    TempDir tmp("mine");
    std::string warc;
    warc += warc_record("response", "http://a/",
                        "<p>c:\\docs\\pics\\party.jpg and /home/user/cat.png</p>");
    warc += warc_record("request", "http://a/", "GET / HTTP/1.1");
    warc += warc_record("response", "http://b/",
                        "<p>/var/www/img.png and /elsewhere/skip.png and d:\\x\\y.bmp</p>");
    write_text(tmp.path("crawl.warc"), warc);

    const cli::MineArgs args{{tmp.path("crawl.warc")}, tmp.path("mined.jsonl"), "", false, 0};
    REQUIRE(cli::run_mine(args) == cli::kExitOk);

    const Dataset mined = load_dataset_file(tmp.path("mined.jsonl"));
    std::set<std::string> paths;
    for (const auto& r : mined.records) {
        CHECK(r.label == Label::negative);
        paths.insert(r.path);
    }
    CHECK(paths == std::set<std::string>{"c:\\docs\\pics\\party.jpg", "/home/user/cat.png",
                                         "/var/www/img.png"});

    const json stats = slurp_json(tmp.path("mined.jsonl.stats.json"));
    CHECK(stats.at("records_seen") == 3);
    CHECK(stats.at("responses_seen") == 2);
    CHECK(stats.at("skipped") == 0);
    CHECK(stats.at("paths_written") == 3);
    CHECK(stats.at("windows_kept") == 1);
    CHECK(stats.at("linux_kept") == 2);

    // capping records stops after the first response
    cli::MineArgs capped = args;
    capped.out = tmp.path("capped.jsonl");
    capped.stats_out = tmp.path("capped_stats.json");
    capped.max_records = 1;
    REQUIRE(cli::run_mine(capped) == cli::kExitOk);
    CHECK(load_dataset_file(tmp.path("capped.jsonl")).size() == 2);

    cli::MineArgs missing = args;
    missing.inputs = {tmp.path("no_such.warc")};
    CHECK(cli::run_mine(missing) == cli::kExitValidation);

    // a valid archive with no usable paths is a runtime failure, not silence
    write_text(tmp.path("empty.warc"), warc_record("response", "http://c/", "<p>nothing</p>"));
    cli::MineArgs barren = args;
    barren.inputs = {tmp.path("empty.warc")};
    barren.out = tmp.path("barren.jsonl");
    CHECK(cli::run_mine(barren) == cli::kExitRuntime);
}
