#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "igsyn/config.hpp"
#include "igsyn/env.hpp"
#include "igsyn/io.hpp"
#include "igsyn/pipeline.hpp"
#include "igsyn/rng.hpp"

namespace {

struct CommonOpts {
    std::string config_path;
    std::string out_dir = "out";
    std::optional<std::uint64_t> seed;
    bool quiet = false;
    bool verbose = false;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--config", opts.config_path, "Experiment config JSON");
    cmd->add_option("--out", opts.out_dir, "Output directory");
    cmd->add_option("--seed", opts.seed, "Master seed override");
    cmd->add_flag("--quiet", opts.quiet, "Suppress progress output");
    cmd->add_flag("--verbose", opts.verbose, "Extra progress output");
}

// Seed precedence: CLI flag > config file > fixed default 42.
igsyn::ExperimentConfig load_config(const CommonOpts& opts) {
    igsyn::ExperimentConfig cfg;
    if (!opts.config_path.empty()) {
        cfg = igsyn::parse_config(opts.config_path);
    }
    if (opts.seed) {
        cfg.master_seed = *opts.seed;
        cfg.env.master_seed = *opts.seed;
    }
    return cfg;
}

void say(const CommonOpts& opts, const std::string& line) {
    if (!opts.quiet) std::cout << line << "\n";
}

std::string trajectory_digest(const nlohmann::json& traj_json) {
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(
                      igsyn::tag_hash(traj_json.dump())));
    return buf;
}

int run_gen_corpus(const CommonOpts& opts) {
    igsyn::ExperimentConfig cfg = load_config(opts);
    igsyn::Environment env(cfg.env);
    igsyn::Corpus corpus = env.gen_corpus(cfg.master_seed);
    igsyn::write_corpus_files(opts.out_dir, corpus, env);
    igsyn::write_text_file(opts.out_dir + "/config.json",
                           cfg.to_json().dump(2) + "\n");
    say(opts, "gen-corpus: " + std::to_string(corpus.seeds.size()) + " seeds, " +
                  std::to_string(corpus.valset.size()) + " val, " +
                  std::to_string(corpus.testset.size()) + " test -> " + opts.out_dir);
    return 0;
}

int run_warmup(const CommonOpts& opts) {
    igsyn::ExperimentConfig cfg = load_config(opts);
    igsyn::Environment env(cfg.env);
    igsyn::WarmupResult warm = igsyn::warmup(cfg, env);
    igsyn::write_text_file(opts.out_dir + "/config.json",
                           cfg.to_json().dump(2) + "\n");
    igsyn::write_text_file(opts.out_dir + "/trajectory.json",
                           warm.trajectory.to_json().dump(2) + "\n");
    igsyn::write_dataset_jsonl(opts.out_dir + "/pool.jsonl", warm.pool);
    nlohmann::json summary = {{"val_losses", warm.val_losses},
                              {"pool_size", warm.pool.size()},
                              {"epochs", warm.trajectory.checkpoints.size()}};
    igsyn::write_text_file(opts.out_dir + "/warmup.json", summary.dump(2) + "\n");
    say(opts, "warmup: " + std::to_string(warm.trajectory.checkpoints.size()) +
                  " checkpoints, val loss " +
                  igsyn::format_double(warm.val_losses.front()) + " -> " +
                  igsyn::format_double(warm.val_losses.back()));
    return 0;
}

int run_score(const CommonOpts& opts, const std::string& pool_path,
              const std::string& trajectory_path) {
    igsyn::ExperimentConfig cfg = load_config(opts);
    igsyn::Environment env(cfg.env);

    igsyn::TrainingTrajectory trajectory;
    std::vector<igsyn::SyntheticExample> pool;
    igsyn::Corpus corpus;
    if (!trajectory_path.empty()) {
        trajectory = igsyn::TrainingTrajectory::from_json(
            nlohmann::json::parse(igsyn::read_text_file(trajectory_path)));
        corpus = env.gen_corpus(cfg.master_seed);
    } else {
        igsyn::WarmupResult warm = igsyn::warmup(cfg, env);
        trajectory = std::move(warm.trajectory);
        corpus = std::move(warm.corpus);
        if (pool_path.empty()) pool = std::move(warm.pool);
    }
    if (!pool_path.empty()) pool = igsyn::read_dataset_jsonl(pool_path);
    if (pool.empty()) {
        std::cerr << "score: empty candidate pool\n";
        return 1;
    }

    igsyn::InfluenceScorer scorer(cfg.classifier_spec(), corpus.valset, &trajectory,
                                  cfg.influence_variant, cfg.influence_aggregation);
    std::vector<igsyn::LabeledExample> labeled;
    labeled.reserve(pool.size());
    for (const auto& ex : pool) labeled.push_back(ex.as_labeled());
    std::vector<double> raw = scorer.score_pool(labeled);
    std::vector<double> norm = igsyn::minmax_normalize(raw);

    std::vector<igsyn::InfluenceRecord> records(pool.size());
    for (std::size_t i = 0; i < pool.size(); ++i) {
        records[i].candidate_id = pool[i].id;
        records[i].raw_score = raw[i];
        records[i].normalized_score = norm[i];
    }
    std::string variant =
        cfg.influence_variant == igsyn::InfluenceVariant::kAdam ? "adam" : "sgd";
    igsyn::write_influence_csv(opts.out_dir + "/influence.csv", records, variant,
                               trajectory_digest(trajectory.to_json()));
    igsyn::write_text_file(opts.out_dir + "/config.json",
                           cfg.to_json().dump(2) + "\n");
    say(opts, "score: " + std::to_string(records.size()) + " candidates -> " +
                  opts.out_dir + "/influence.csv");
    return 0;
}

int run_train_prompter(const CommonOpts& opts) {
    igsyn::ExperimentConfig cfg = load_config(opts);
    igsyn::Environment env(cfg.env);
    igsyn::WarmupResult warm = igsyn::warmup(cfg, env);
    if (cfg.rl_updates == 0) {
        std::cerr << "train-prompter: no updates requested (rl_updates = 0); "
                     "writing the initial policy\n";
    }
    igsyn::PrompterResult prompter =
        igsyn::train_prompter(cfg, env, warm.corpus, warm.trajectory);
    igsyn::write_text_file(opts.out_dir + "/config.json",
                           cfg.to_json().dump(2) + "\n");
    igsyn::write_text_file(opts.out_dir + "/trajectory.json",
                           warm.trajectory.to_json().dump(2) + "\n");
    igsyn::write_rollouts_jsonl(opts.out_dir + "/rollouts.jsonl", prompter.rollouts);
    igsyn::write_stats_csv(opts.out_dir + "/stats.csv", prompter.curve);
    igsyn::write_text_file(opts.out_dir + "/policy.json",
                           prompter.policy.to_json().dump(2) + "\n");
    if (!prompter.curve.empty()) {
        say(opts, "train-prompter: " + std::to_string(prompter.curve.size()) +
                      " updates, mean reward " +
                      igsyn::format_double(prompter.curve.front().mean_reward) +
                      " -> " +
                      igsyn::format_double(prompter.curve.back().mean_reward));
    } else {
        say(opts, "train-prompter: 0 updates");
    }
    return 0;
}

int run_synthesize(const CommonOpts& opts, const std::string& policy_path,
                   int count) {
    igsyn::ExperimentConfig cfg = load_config(opts);
    igsyn::Environment env(cfg.env);
    igsyn::Corpus corpus = env.gen_corpus(cfg.master_seed);
    igsyn::ParamVector policy = cfg.policy_spec().init_params();
    if (!policy_path.empty()) {
        policy = igsyn::ParamVector::from_json(
            nlohmann::json::parse(igsyn::read_text_file(policy_path)));
    }
    int n = count > 0 ? count : cfg.synth_size;
    igsyn::RngStream rng(igsyn::derive_seed(cfg.master_seed, "synth-cli"));
    std::vector<igsyn::SyntheticExample> dataset =
        igsyn::synthesize_dataset(cfg, env, policy, corpus.seeds, n, rng, "syn");
    igsyn::write_dataset_jsonl(opts.out_dir + "/dataset.jsonl", dataset);
    igsyn::write_text_file(opts.out_dir + "/config.json",
                           cfg.to_json().dump(2) + "\n");
    say(opts, "synthesize: " + std::to_string(dataset.size()) + " examples -> " +
                  opts.out_dir + "/dataset.jsonl");
    return 0;
}

int run_sft(const CommonOpts& opts, const std::string& dataset_path) {
    igsyn::ExperimentConfig cfg = load_config(opts);
    igsyn::Environment env(cfg.env);
    igsyn::Corpus corpus = env.gen_corpus(cfg.master_seed);
    std::vector<igsyn::SyntheticExample> dataset =
        igsyn::read_dataset_jsonl(dataset_path);
    std::vector<igsyn::LabeledExample> labeled;
    labeled.reserve(dataset.size());
    for (const auto& ex : dataset) labeled.push_back(ex.as_labeled());
    igsyn::RngStream rng(igsyn::derive_seed(cfg.master_seed, "sft-cli"));
    igsyn::SftResult sft = igsyn::sft_and_eval(cfg, labeled, corpus.testset, rng);
    igsyn::write_text_file(opts.out_dir + "/params.json",
                           sft.params.to_json().dump(2) + "\n");
    nlohmann::json summary = {{"accuracy", sft.accuracy},
                              {"dataset_size", dataset.size()}};
    igsyn::write_text_file(opts.out_dir + "/sft.json", summary.dump(2) + "\n");
    say(opts, "sft: accuracy " + igsyn::format_double(sft.accuracy));
    return 0;
}

int run_eval(const CommonOpts& opts, const std::string& params_path) {
    igsyn::ExperimentConfig cfg = load_config(opts);
    igsyn::Environment env(cfg.env);
    igsyn::Corpus corpus = env.gen_corpus(cfg.master_seed);
    igsyn::ParamVector params = igsyn::ParamVector::from_json(
        nlohmann::json::parse(igsyn::read_text_file(params_path)));
    igsyn::ClassifierSpec cspec = cfg.classifier_spec();
    std::size_t correct = 0;
    for (const auto& ex : corpus.testset) {
        std::vector<double> probs = igsyn::predict(cspec, params, ex.features);
        int argmax = static_cast<int>(
            std::max_element(probs.begin(), probs.end()) - probs.begin());
        if (argmax == ex.label) ++correct;
    }
    double accuracy =
        static_cast<double>(correct) / static_cast<double>(corpus.testset.size());
    nlohmann::json summary = {{"accuracy", accuracy},
                              {"test_size", corpus.testset.size()}};
    igsyn::write_text_file(opts.out_dir + "/eval.json", summary.dump(2) + "\n");
    say(opts, "eval: accuracy " + igsyn::format_double(accuracy));
    return 0;
}

int run_correlate(const CommonOpts& opts, int pool_size, int subset_size,
                  int trials) {
    igsyn::ExperimentConfig cfg = load_config(opts);
    igsyn::Environment env(cfg.env);
    igsyn::WarmupResult warm = igsyn::warmup(cfg, env);
    igsyn::RngStream rng(igsyn::derive_seed(cfg.master_seed, "correlate-pool"));
    std::vector<igsyn::SyntheticExample> pool = igsyn::synthesize_dataset(
        cfg, env, warm.policy0, warm.corpus.seeds, pool_size, rng, "cand");
    igsyn::CorrelationResult result = igsyn::correlate_if_accuracy(
        cfg, env, warm.corpus, warm.trajectory, pool, subset_size, trials);

    std::string csv = "trial,mean_influence,accuracy\n";
    for (std::size_t i = 0; i < result.pairs.size(); ++i) {
        csv += std::to_string(i) + "," +
               igsyn::format_double(result.pairs[i].first) + "," +
               igsyn::format_double(result.pairs[i].second) + "\n";
    }
    igsyn::write_text_file(opts.out_dir + "/correlation.csv", csv);
    nlohmann::json report = {
        {"config", cfg.to_json()},
        {"pool_size", pool_size},
        {"subset_size", subset_size},
        {"trials", trials},
        {"pearson_r", result.pearson_r.r},
        {"pearson_defined", result.pearson_r.defined},
        {"spearman_rho", result.spearman_rho.r},
        {"spearman_defined", result.spearman_rho.defined}};
    igsyn::write_text_file(opts.out_dir + "/report.json", report.dump(2) + "\n");
    say(opts, "correlate: pearson_r " +
                  (result.pearson_r.defined
                       ? igsyn::format_double(result.pearson_r.r)
                       : std::string("undefined")) +
                  " over " + std::to_string(trials) + " trials");
    return 0;
}

int run_report(const CommonOpts& opts) {
    igsyn::ExperimentConfig cfg = load_config(opts);
    igsyn::MetricsReport report = igsyn::run_experiment(cfg, opts.out_dir);
    say(opts, "report: reward ratio " + igsyn::format_double(report.reward_ratio) +
                  ", pre/post accuracy " + igsyn::format_double(report.pre_accuracy) +
                  "/" + igsyn::format_double(report.post_accuracy) + " -> " +
                  opts.out_dir + "/report.json");
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Influence-guided synthetic data engine"};
    app.require_subcommand(1);

    CommonOpts opts;
    std::string pool_path, trajectory_path, policy_path, dataset_path, params_path;
    int synth_count = 0;
    int pool_size = 2000, subset_size = 200, trials = 30;

    CLI::App* gen = app.add_subcommand("gen-corpus", "Generate corpus files");
    add_common(gen, opts);
    CLI::App* wu = app.add_subcommand("warmup", "Warm up the target model");
    add_common(wu, opts);
    CLI::App* score = app.add_subcommand("score", "Score a candidate pool");
    add_common(score, opts);
    score->add_option("--pool", pool_path, "Candidate pool JSONL");
    score->add_option("--trajectory", trajectory_path, "Trajectory JSON");
    CLI::App* tp = app.add_subcommand("train-prompter", "RL-train the prompter");
    add_common(tp, opts);
    CLI::App* syn = app.add_subcommand("synthesize", "Synthesize a dataset");
    add_common(syn, opts);
    syn->add_option("--policy", policy_path, "Policy params JSON");
    syn->add_option("--count", synth_count, "Examples to synthesize");
    CLI::App* sft = app.add_subcommand("sft", "Train a fresh target on a dataset");
    add_common(sft, opts);
    sft->add_option("--dataset", dataset_path, "Dataset JSONL")->required();
    CLI::App* ev = app.add_subcommand("eval", "Evaluate saved target params");
    add_common(ev, opts);
    ev->add_option("--params", params_path, "Target params JSON")->required();
    CLI::App* corr = app.add_subcommand("correlate", "Influence vs accuracy study");
    add_common(corr, opts);
    corr->add_option("--pool-size", pool_size, "Candidate pool size");
    corr->add_option("--subset-size", subset_size, "Subset size per trial");
    corr->add_option("--trials", trials, "Number of trials");
    CLI::App* rep = app.add_subcommand("report", "Full end-to-end experiment");
    add_common(rep, opts);

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) return run_gen_corpus(opts);
        if (wu->parsed()) return run_warmup(opts);
        if (score->parsed()) return run_score(opts, pool_path, trajectory_path);
        if (tp->parsed()) return run_train_prompter(opts);
        if (syn->parsed()) return run_synthesize(opts, policy_path, synth_count);
        if (sft->parsed()) return run_sft(opts, dataset_path);
        if (ev->parsed()) return run_eval(opts, params_path);
        if (corr->parsed()) return run_correlate(opts, pool_size, subset_size, trials);
        if (rep->parsed()) return run_report(opts);
    } catch (const std::exception& e) {
        std::cerr << app.get_subcommands().front()->get_name() << ": " << e.what()
                  << "\n";
        return 1;
    }
    return 1;
}
