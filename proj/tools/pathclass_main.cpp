#include "CLI11.hpp"
#include "pathclass/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"file-path classification toolkit"};
    app.require_subcommand(1);

    pathclass::cli::SynthArgs synth;
    auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic labeled corpus");
    synth_cmd->add_option("--config", synth.config_file, "JSON config file");
    synth_cmd->add_option("--out", synth.out, "output dataset (JSONL)")->required();
    synth_cmd->add_option("--seed", synth.seed, "seed override");

    pathclass::cli::TrainArgs train;
    auto* train_cmd = app.add_subcommand("train", "fit a feature space, model and lexicon");
    train_cmd->add_option("--config", train.config_file, "JSON config file");
    train_cmd->add_option("--dataset", train.dataset, "training dataset (JSONL)")->required();
    train_cmd->add_option("--outdir", train.outdir, "artifact directory")->required();
    train_cmd->add_option("--seed", train.seed, "seed override");

    pathclass::cli::CrossvalArgs crossval;
    auto* crossval_cmd = app.add_subcommand("crossval", "storage-system-grouped k-fold evaluation");
    crossval_cmd->add_option("--config", crossval.config_file, "JSON config file");
    crossval_cmd->add_option("--dataset", crossval.dataset, "dataset (JSONL)")->required();
    crossval_cmd->add_option("--report", crossval.report, "report output (JSON)")->required();
    crossval_cmd->add_option("--seed", crossval.seed, "seed override");

    pathclass::cli::AttackArgs attack;
    auto* attack_cmd = app.add_subcommand("attack", "black-box robustness evaluation");
    attack_cmd->add_option("--config", attack.config_file, "JSON config file");
    attack_cmd->add_option("--model", attack.model, "trained model artifact")->required();
    attack_cmd->add_option("--features", attack.features, "feature space artifact")->required();
    attack_cmd->add_option("--train-dataset", attack.train_dataset, "lexicon source dataset")
        ->required();
    attack_cmd->add_option("--positives", attack.positives, "held-out positives to perturb")
        ->required();
    attack_cmd->add_option("--report", attack.report, "report output (JSON)")->required();
    attack_cmd->add_option("--seed", attack.seed, "seed override");

    pathclass::cli::FprArgs fpr;
    auto* fpr_cmd = app.add_subcommand("fpr", "false-positive-rate curves on benign corpora");
    fpr_cmd->add_option("--config", fpr.config_file, "JSON config file");
    fpr_cmd->add_option("--model", fpr.model, "trained model artifact")->required();
    fpr_cmd->add_option("--features", fpr.features, "feature space artifact")->required();
    fpr_cmd->add_option("--benign", fpr.benign, "benign corpus files (one curve each)")
        ->required()
        ->expected(-1);
    fpr_cmd->add_option("--report", fpr.report, "report output (JSON)")->required();

    pathclass::cli::MineArgs mine;
    auto* mine_cmd = app.add_subcommand("mine", "mine benign file paths from WARC archives");
    mine_cmd->add_option("--input", mine.inputs, "WARC input files")->required()->expected(-1);
    mine_cmd->add_option("--out", mine.out, "output corpus (JSONL)")->required();
    mine_cmd->add_option("--stats", mine.stats_out, "stats output (default <out>.stats.json)");
    mine_cmd->add_flag("--strict-case", mine.strict_case, "case-sensitive path patterns");
    mine_cmd->add_option("--max-records", mine.max_records,
                         "stop after this many response records per input (0 = all)");

    CLI11_PARSE(app, argc, argv);

    if (synth_cmd->parsed()) return pathclass::cli::run_synth(synth);
    if (train_cmd->parsed()) return pathclass::cli::run_train(train);
    if (crossval_cmd->parsed()) return pathclass::cli::run_crossval(crossval);
    if (attack_cmd->parsed()) return pathclass::cli::run_attack(attack);
    if (fpr_cmd->parsed()) return pathclass::cli::run_fpr(fpr);
    if (mine_cmd->parsed()) return pathclass::cli::run_mine(mine);
    return pathclass::cli::kExitValidation;
}
