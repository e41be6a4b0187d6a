#include "doctest.h"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include "pathclass/corpus.hpp"
#include "pathclass/error.hpp"
#include "pathclass/rng.hpp"

using namespace pathclass;

TEST_CASE("map_label collapses 1..3 to positive") {
    CHECK(map_label(0) == Label::negative);
    CHECK(map_label(1) == Label::positive);
    CHECK(map_label(2) == Label::positive);
    CHECK(map_label(3) == Label::positive);
    CHECK_THROWS_AS(map_label(4), InvalidInput);
    CHECK_THROWS_AS(map_label(-1), InvalidInput);
}

TEST_CASE("extract_system_id takes the prefix before the first separator") {
    CHECK(extract_system_id("E:\\photos\\a.jpg") == "E:");
    CHECK(extract_system_id("drive01/docs/x.pdf") == "drive01");
    CHECK(extract_system_id("standalone.jpg") == "standalone.jpg");
    CHECK(extract_system_id("/usr/x") == "");  // separator first -> empty prefix
    CHECK_THROWS_AS(extract_system_id(""), InvalidInput);
}

namespace {

Dataset tiny_dataset(const std::vector<std::pair<std::string, int>>& rows) {
    Dataset d;
    for (const auto& [path, raw] : rows) {
        d.records.push_back({path, raw, map_label(raw), extract_system_id(path)});
    }
    return d;
}

Dataset random_dataset(Rng& rng, size_t n_records, size_t n_systems) {
    Dataset d;
    for (size_t i = 0; i < n_records; ++i) {
        const auto sys = "sys" + std::to_string(rng.index(n_systems));
        const int raw = rng.real() < 0.4 ? 1 : 0;
        const auto path = sys + "/f" + std::to_string(i) + ".jpg";
        d.records.push_back({path, raw, map_label(raw), sys});
    }
    return d;
}

}  // namespace

TEST_CASE("grouped_kfold keeps systems whole and partitions records") {
    Rng rng(99);
    for (int trial = 0; trial < 50; ++trial) {
        const size_t n_systems = 5 + rng.index(20);
        const Dataset d = random_dataset(rng, 40 + rng.index(200), n_systems);
        for (int k : {2, 3, 5}) {
            std::set<std::string> distinct;
            for (const auto& r : d.records) distinct.insert(r.system_id);
            if (distinct.size() < static_cast<size_t>(k)) continue;
            const FoldAssignment fa = grouped_kfold(d, k, rng.next_u64());
            REQUIRE(fa.fold_of.size() == d.size());
            std::map<std::string, int> fold_of_system;
            for (size_t i = 0; i < d.size(); ++i) {
                REQUIRE(fa.fold_of[i] >= 0);
                REQUIRE(fa.fold_of[i] < k);
                auto [it, inserted] =
                    fold_of_system.emplace(d.records[i].system_id, fa.fold_of[i]);
                if (!inserted) CHECK(it->second == fa.fold_of[i]);
            }
            // systems per fold differ by at most one
            std::vector<int> per_fold(k, 0);
            for (const auto& [sys, fold] : fold_of_system) per_fold[fold]++;
            const auto [lo, hi] = std::minmax_element(per_fold.begin(), per_fold.end());
            CHECK(*hi - *lo <= 1);
        }
    }
}

TEST_CASE("grouped_kfold is deterministic and seed-sensitive") {
    Rng rng(3);
    const Dataset d = random_dataset(rng, 300, 40);
    const FoldAssignment a = grouped_kfold(d, 5, 1234);
    const FoldAssignment b = grouped_kfold(d, 5, 1234);
    CHECK(a.fold_of == b.fold_of);
    const FoldAssignment c = grouped_kfold(d, 5, 1235);
    CHECK(a.fold_of != c.fold_of);
}

TEST_CASE("grouped_kfold rejects k larger than the system count") {
    const Dataset d = tiny_dataset({{"only/a.jpg", 0}, {"only/b.jpg", 1}});
    CHECK_THROWS_AS(grouped_kfold(d, 2, 0), InfeasibleSplit);
}

TEST_CASE("fold_indices and its complement partition the records") {
    Rng rng(8);
    const Dataset d = random_dataset(rng, 120, 12);
    const FoldAssignment fa = grouped_kfold(d, 4, 77);
    for (int f = 0; f < 4; ++f) {
        const auto test = fold_indices(fa, f);
        const auto train = fold_indices(fa, f, /*complement=*/true);
        CHECK(test.size() + train.size() == d.size());
        std::set<size_t> seen(test.begin(), test.end());
        for (size_t i : train) CHECK(seen.insert(i).second);
        CHECK(seen.size() == d.size());
    }
}

TEST_CASE("generate_synthetic plants positive words only in positives") {
    SynthConfig cfg;
    cfg.n_records = 1000;
    cfg.n_systems = 30;
    cfg.positive_fraction = 0.3;
    cfg.positive_vocab = {"planted", "marker"};
    cfg.neutral_vocab = {"photo", "doc", "misc", "data"};
    cfg.seed = 7;
    const Dataset d = generate_synthetic(cfg);
    REQUIRE(d.size() == 1000);

    size_t n_pos = 0;
    std::set<std::string> systems;
    for (const auto& r : d.records) {
        systems.insert(r.system_id);
        const bool has_planted = r.path.find("planted") != std::string::npos ||
                                 r.path.find("marker") != std::string::npos;
        if (r.label == Label::positive) {
            ++n_pos;
            CHECK(has_planted);
        } else {
            CHECK(!has_planted);
        }
    }
    CHECK(n_pos == 300);  // exact count by construction
    CHECK(systems.size() <= 30);
    CHECK(systems.size() >= 25);  // 1000 draws over 30 systems misses few

    // determinism and seed sensitivity
    const Dataset d2 = generate_synthetic(cfg);
    REQUIRE(d2.size() == d.size());
    for (size_t i = 0; i < d.size(); ++i) CHECK(d2.records[i].path == d.records[i].path);
    cfg.seed = 8;
    const Dataset d3 = generate_synthetic(cfg);
    bool any_diff = false;
    for (size_t i = 0; i < d.size(); ++i) any_diff |= d3.records[i].path != d.records[i].path;
    CHECK(any_diff);
}

TEST_CASE("generate_synthetic validates its config") {
    SynthConfig cfg;
    cfg.n_records = 100;
    cfg.n_systems = 10;
    cfg.positive_vocab = {"p"};
    cfg.neutral_vocab = {"n"};

    SynthConfig bad = cfg;
    bad.positive_fraction = 1.5;
    CHECK_THROWS_AS(generate_synthetic(bad), InvalidInput);
    bad = cfg;
    bad.positive_vocab.clear();
    CHECK_THROWS_AS(generate_synthetic(bad), InvalidInput);
    bad = cfg;
    bad.n_systems = 0;
    CHECK_THROWS_AS(generate_synthetic(bad), InvalidInput);
    bad = cfg;
    bad.max_depth = 0;
    CHECK_THROWS_AS(generate_synthetic(bad), InvalidInput);
    bad = cfg;
    bad.neutral_vocab = {"p"};  // overlaps the positive vocab
    CHECK_THROWS_AS(generate_synthetic(bad), InvalidInput);
}

TEST_CASE("dataset JSONL round-trip preserves order and content") {
    const Dataset d = tiny_dataset({{"E:\\a\\b.jpg", 1}, {"drive01/x.pdf", 0}, {"s/t/u.mp4", 2}});
    std::ostringstream out;
    save_dataset(d, out);
    std::istringstream in(out.str());
    const Dataset back = load_dataset(in, "test");
    REQUIRE(back.size() == 3);
    for (size_t i = 0; i < 3; ++i) {
        CHECK(back.records[i].path == d.records[i].path);
        CHECK(back.records[i].raw_label == d.records[i].raw_label);
        CHECK(back.records[i].label == d.records[i].label);
        CHECK(back.records[i].system_id == d.records[i].system_id);
    }
}

TEST_CASE("load_dataset derives missing system ids and reports bad rows") {
    std::istringstream ok(R"({"path":"E:\\a\\b.jpg","raw_label":1})" "\n");
    const Dataset d = load_dataset(ok, "t");
    REQUIRE(d.size() == 1);
    CHECK(d.records[0].system_id == "E:");
    CHECK(d.records[0].label == Label::positive);

    std::istringstream bad_label(R"({"path":"a/b.jpg","raw_label":9})" "\n");
    CHECK_THROWS_WITH_AS(load_dataset(bad_label, "t"),
                         doctest::Contains("row 1"), InvalidInput);

    std::istringstream bad_row("{\"path\":\"a/b.jpg\",\"raw_label\":0}\nnot json\n");
    CHECK_THROWS_WITH_AS(load_dataset(bad_row, "t"), doctest::Contains("row 2"), InvalidInput);

    std::istringstream empty_path(R"({"path":"","raw_label":0})" "\n");
    CHECK_THROWS_AS(load_dataset(empty_path, "t"), InvalidInput);

    std::istringstream empty("");
    CHECK_THROWS_AS(load_dataset(empty, "t"), InvalidInput);
}

TEST_CASE("dataset fingerprint is content and order sensitive") {
    const Dataset a = tiny_dataset({{"s/a.jpg", 0}, {"s/b.jpg", 1}});
    const Dataset b = tiny_dataset({{"s/b.jpg", 1}, {"s/a.jpg", 0}});
    Dataset c = a;
    c.records[1].raw_label = 2;
    CHECK(dataset_fingerprint(a) != dataset_fingerprint(b));
    CHECK(dataset_fingerprint(a) != dataset_fingerprint(c));
    CHECK(dataset_fingerprint(a) == dataset_fingerprint(tiny_dataset({{"s/a.jpg", 0}, {"s/b.jpg", 1}})));
}

TEST_CASE("subset_dataset selects rows in the given order") {
    const Dataset d = tiny_dataset({{"s/a.jpg", 0}, {"s/b.jpg", 1}, {"t/c.jpg", 0}});
    const Dataset sub = subset_dataset(d, {2, 0});
    REQUIRE(sub.size() == 2);
    CHECK(sub.records[0].path == "t/c.jpg");
    CHECK(sub.records[1].path == "s/a.jpg");
}
