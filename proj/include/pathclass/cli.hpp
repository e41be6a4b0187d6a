#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace pathclass::cli {

// Exit codes: 0 success, 2 validation failure, 3 runtime failure.
inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitRuntime = 3;

struct SynthArgs {
    std::string config_file;
    std::string out;
    std::optional<uint64_t> seed;
};

struct TrainArgs {
    std::string config_file;
    std::string dataset;
    std::string outdir;
    std::optional<uint64_t> seed;
};

struct CrossvalArgs {
    std::string config_file;
    std::string dataset;
    std::string report;
    std::optional<uint64_t> seed;
};

struct AttackArgs {
    std::string config_file;
    std::string model;
    std::string features;
    std::string train_dataset;   // lexicon source; must not be the eval fold
    std::string positives;       // records to perturb (positive labels only)
    std::string report;
    std::optional<uint64_t> seed;
};

struct FprArgs {
    std::string config_file;
    std::string model;
    std::string features;
    std::vector<std::string> benign;  // one curve per corpus file
    std::string report;
};

struct MineArgs {
    std::vector<std::string> inputs;  // WARC files
    std::string out;
    std::string stats_out;  // defaults to <out>.stats.json
    bool strict_case = false;
    uint64_t max_records = 0;  // 0 = unlimited
};

int run_synth(const SynthArgs& args);
int run_train(const TrainArgs& args);
int run_crossval(const CrossvalArgs& args);
int run_attack(const AttackArgs& args);
int run_fpr(const FprArgs& args);
int run_mine(const MineArgs& args);

}  // namespace pathclass::cli
