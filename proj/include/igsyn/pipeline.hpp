#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "igsyn/config.hpp"
#include "igsyn/env.hpp"
#include "igsyn/grpo.hpp"
#include "igsyn/influence.hpp"
#include "igsyn/io.hpp"
#include "igsyn/model.hpp"
#include "igsyn/optimizer.hpp"
#include "igsyn/stats.hpp"

namespace igsyn {

struct WarmupResult {
    Corpus corpus;
    std::vector<SyntheticExample> pool;  // full initial pool, invalid included
    TrainingTrajectory trajectory;       // fixed reference for all influence scoring
    ParamVector policy0;                 // untrained reference policy
    std::vector<double> val_losses;      // mean valset loss at epochs 0..T
};

// Reference policy synthesizes a pool; the target trains on the valid slice
// (warmup_fraction of the pool) for warmup_epochs with Adam.
WarmupResult warmup(const ExperimentConfig& cfg, const Environment& env);

struct PrompterResult {
    ParamVector policy;
    std::vector<GrpoStats> curve;       // one entry per update
    std::vector<RolloutRow> rollouts;   // flattened log of every trajectory
    std::map<int, int> seed_visits;     // seed id -> times drawn into a batch
};

// K updates of: sample seed batch -> collect groups -> batch-normalize
// influence -> rewards/advantages -> grpo_update.
PrompterResult train_prompter(const ExperimentConfig& cfg, const Environment& env,
                              const Corpus& corpus,
                              const TrainingTrajectory& trajectory);

// n wellformed examples (invalid generations are dropped and resampled, up to
// synth_retry_cap attempts each). Ids are "<id_prefix>-<index>".
std::vector<SyntheticExample> synthesize_dataset(
    const ExperimentConfig& cfg, const Environment& env, const ParamVector& policy,
    std::span<const SeedDocument> seeds, int n, RngStream& rng,
    const std::string& id_prefix);

struct SftResult {
    ParamVector params;
    double accuracy = 0.0;  // top-1 on the test set
};

// Fresh target (seeded init) trained with Adam for sft_epochs on the dataset.
SftResult sft_and_eval(const ExperimentConfig& cfg,
                       std::span<const LabeledExample> dataset,
                       std::span<const LabeledExample> testset, RngStream& rng);

struct CorrelationResult {
    std::vector<std::pair<double, double>> pairs;  // (mean influence, accuracy)
    Correlation pearson_r;
    Correlation spearman_rho;
};

// For each trial: a uniform random subset of the pool, its mean influence vs
// the valset, and the test accuracy of a fresh target trained on it.
CorrelationResult correlate_if_accuracy(const ExperimentConfig& cfg,
                                        const Environment& env, const Corpus& corpus,
                                        const TrainingTrajectory& trajectory,
                                        std::span<const SyntheticExample> pool,
                                        int subset_size, int trials);

struct MetricsReport {
    std::vector<double> warmup_val_losses;
    int rl_updates = 0;
    double first_window_mean_reward = 0.0;
    double last_window_mean_reward = 0.0;
    double reward_ratio = 0.0;
    double aligned_focus_mass = 0.0;  // P(token0 = validation_aligned) at top seeds
    double pre_mean_if = 0.0;
    double post_mean_if = 0.0;
    double welch_t = 0.0;
    double welch_p = 1.0;
    double pre_accuracy = 0.0;
    double post_accuracy = 0.0;

    nlohmann::json to_json() const;
};

// Mean probability mass the policy puts on validation_aligned focus tokens
// (token0 with token0 mod 4 == 3) at the top_k most-visited seed contexts.
double aligned_focus_mass(const ExperimentConfig& cfg, const ParamVector& policy,
                          const Corpus& corpus, const std::map<int, int>& visits,
                          int top_k = 10);

// Full Algorithm-1 run. Writes config.json, trajectory.json, rollouts.jsonl,
// stats.csv, dataset_pre.jsonl, dataset_post.jsonl, policy.json, report.json
// under out_dir and returns the report.
MetricsReport run_experiment(const ExperimentConfig& cfg, const std::string& out_dir);

}  // namespace igsyn
