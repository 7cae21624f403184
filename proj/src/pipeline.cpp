#include "igsyn/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "igsyn/contract.hpp"

namespace igsyn {

namespace {

double mean_loss(const ClassifierSpec& spec, const ParamVector& params,
                 std::span<const LabeledExample> examples) {
    double s = 0.0;
    for (const LabeledExample& ex : examples) s += loss(spec, params, ex);
    return s / static_cast<double>(examples.size());
}

std::vector<LabeledExample> as_labeled(std::span<const SyntheticExample> dataset) {
    std::vector<LabeledExample> out;
    out.reserve(dataset.size());
    for (const SyntheticExample& ex : dataset) out.push_back(ex.as_labeled());
    return out;
}

}  // namespace

WarmupResult warmup(const ExperimentConfig& cfg, const Environment& env) {
    WarmupResult result;
    result.corpus = env.gen_corpus(cfg.master_seed);
    PolicySpec pspec = cfg.policy_spec();
    result.policy0 = pspec.init_params();

    RngStream pool_rng(derive_seed(cfg.master_seed, "warmup-pool"));
    result.pool.reserve(cfg.warmup_pool_size);
    for (int i = 0; i < cfg.warmup_pool_size; ++i) {
        const SeedDocument& doc =
            result.corpus.seeds[pool_rng.uniform_int(result.corpus.seeds.size())];
        PolicySample sample = policy_sample(pspec, result.policy0, doc.context,
                                            cfg.synth_temperature, pool_rng);
        SyntheticExample ex = env.generate(doc, sample.tokens, pool_rng);
        ex.id = "pool-" + std::to_string(i);
        result.pool.push_back(std::move(ex));
    }

    std::vector<LabeledExample> train_set;
    int want = std::max(1, static_cast<int>(std::lround(
                               cfg.warmup_fraction * cfg.warmup_pool_size)));
    for (const SyntheticExample& ex : result.pool) {
        if (static_cast<int>(train_set.size()) >= want) break;
        if (env.validity(ex).valid) train_set.push_back(ex.as_labeled());
    }
    if (train_set.empty()) {
        throw std::runtime_error(
            "warmup: degenerate pool, every generated example failed validity");
    }

    ClassifierSpec cspec = cfg.classifier_spec();
    RngStream init_rng(derive_seed(cfg.master_seed, "target-init"));
    ParamVector params0 = cspec.init_params(init_rng, 0.1);

    TrainOptions options;
    options.adam = cfg.target_optimizer;
    options.optimizer = OptimizerKind::kAdam;
    options.epochs = cfg.warmup_epochs;
    RngStream train_rng(derive_seed(cfg.master_seed, "warmup-train"));
    result.trajectory = train_epochs(cspec, params0, train_set, options, train_rng);

    result.val_losses.push_back(mean_loss(cspec, params0, result.corpus.valset));
    for (const Checkpoint& ck : result.trajectory.checkpoints) {
        result.val_losses.push_back(mean_loss(cspec, ck.params, result.corpus.valset));
    }
    return result;
}

PrompterResult train_prompter(const ExperimentConfig& cfg, const Environment& env,
                              const Corpus& corpus,
                              const TrainingTrajectory& trajectory) {
    PolicySpec pspec = cfg.policy_spec();
    PrompterResult result{pspec.init_params(), {}, {}, {}};
    if (cfg.rl_updates == 0) return result;

    ParamVector ref_params = result.policy;
    ClassifierSpec cspec = cfg.classifier_spec();
    InfluenceScorer scorer(cspec, corpus.valset, &trajectory, cfg.influence_variant,
                           cfg.influence_aggregation);

    for (int k = 0; k < cfg.rl_updates; ++k) {
        RngStream rng(derive_seed(cfg.master_seed, "rl-update", k));
        std::vector<RolloutGroup> groups;
        groups.reserve(cfg.seeds_per_update);
        for (int s = 0; s < cfg.seeds_per_update; ++s) {
            const SeedDocument& doc = corpus.seeds[rng.uniform_int(corpus.seeds.size())];
            result.seed_visits[doc.id] += 1;
            groups.push_back(collect_group(result.policy, pspec, doc, env, scorer,
                                           cfg.grpo, rng));
        }
        fill_rewards(groups, cfg.grpo, cfg.grpo_per_group_norm);
        GrpoStats stats = grpo_update(result.policy, pspec, groups, ref_params,
                                      cfg.grpo);
        result.curve.push_back(stats);
        for (const RolloutGroup& group : groups) {
            for (std::size_t i = 0; i < group.trajectories.size(); ++i) {
                const Trajectory& traj = group.trajectories[i];
                result.rollouts.push_back(RolloutRow{k, traj.seed_id, traj.tokens,
                                                     traj.valid, traj.raw_if,
                                                     traj.if_norm, traj.reward,
                                                     group.advantages[i]});
            }
        }
    }
    return result;
}

std::vector<SyntheticExample> synthesize_dataset(
    const ExperimentConfig& cfg, const Environment& env, const ParamVector& policy,
    std::span<const SeedDocument> seeds, int n, RngStream& rng,
    const std::string& id_prefix) {
    IGSYN_REQUIRE(n >= 1, "synthesize_dataset needs n >= 1");
    IGSYN_REQUIRE(!seeds.empty(), "synthesize_dataset needs seed documents");
    PolicySpec pspec = cfg.policy_spec();
    std::vector<SyntheticExample> dataset;
    dataset.reserve(n);
    for (int i = 0; i < n; ++i) {
        bool accepted = false;
        for (int attempt = 0; attempt < cfg.synth_retry_cap; ++attempt) {
            const SeedDocument& doc = seeds[rng.uniform_int(seeds.size())];
            PolicySample sample = policy_sample(pspec, policy, doc.context,
                                                cfg.synth_temperature, rng);
            SyntheticExample ex = env.generate(doc, sample.tokens, rng);
            if (!env.validity(ex).valid) continue;
            ex.id = id_prefix + "-" + std::to_string(i);
            dataset.push_back(std::move(ex));
            accepted = true;
            break;
        }
        if (!accepted) {
            throw std::runtime_error(
                "synthesize_dataset: retry cap exhausted before finding a valid "
                "generation (slot " +
                std::to_string(i) + ")");
        }
    }
    return dataset;
}

SftResult sft_and_eval(const ExperimentConfig& cfg,
                       std::span<const LabeledExample> dataset,
                       std::span<const LabeledExample> testset, RngStream& rng) {
    IGSYN_REQUIRE(!dataset.empty(), "sft_and_eval needs a non-empty dataset");
    IGSYN_REQUIRE(!testset.empty(), "sft_and_eval needs a non-empty test set");
    ClassifierSpec cspec = cfg.classifier_spec();
    ParamVector params0 = cspec.init_params(rng, 0.1);
    TrainOptions options;
    options.adam = cfg.target_optimizer;
    options.adam.learning_rate = cfg.sft_learning_rate;
    options.optimizer = OptimizerKind::kAdam;
    options.epochs = cfg.sft_epochs;
    options.batch_size = cfg.sft_batch_size;
    TrainingTrajectory traj = train_epochs(cspec, params0, dataset, options, rng);

    const ParamVector& final_params = traj.checkpoints.back().params;
    std::size_t correct = 0;
    for (const LabeledExample& ex : testset) {
        std::vector<double> probs = predict(cspec, final_params, ex.features);
        int argmax = static_cast<int>(
            std::max_element(probs.begin(), probs.end()) - probs.begin());
        if (argmax == ex.label) ++correct;
    }
    return SftResult{final_params,
                     static_cast<double>(correct) / static_cast<double>(testset.size())};
}

CorrelationResult correlate_if_accuracy(const ExperimentConfig& cfg,
                                        const Environment& env, const Corpus& corpus,
                                        const TrainingTrajectory& trajectory,
                                        std::span<const SyntheticExample> pool,
                                        int subset_size, int trials) {
    IGSYN_REQUIRE(trials >= 1, "correlate_if_accuracy needs trials >= 1");
    IGSYN_REQUIRE(subset_size >= 1 &&
                      subset_size <= static_cast<int>(pool.size()),
                  "subset_size must be in [1, pool size]");
    ClassifierSpec cspec = cfg.classifier_spec();
    InfluenceScorer scorer(cspec, corpus.valset, &trajectory, cfg.influence_variant,
                           cfg.influence_aggregation);
    std::vector<LabeledExample> pool_labeled = as_labeled(pool);
    std::vector<double> pool_scores = scorer.score_pool(pool_labeled);

    CorrelationResult result;
    std::vector<std::size_t> index(pool.size());
    for (int t = 0; t < trials; ++t) {
        RngStream rng(derive_seed(cfg.master_seed, "correlate", t));
        std::iota(index.begin(), index.end(), 0);
        // Partial Fisher-Yates: the first subset_size entries become a
        // uniform random subset.
        for (int i = 0; i < subset_size; ++i) {
            std::size_t j = i + rng.uniform_int(index.size() - i);
            std::swap(index[i], index[j]);
        }
        double mean_if = 0.0;
        std::vector<LabeledExample> subset;
        subset.reserve(subset_size);
        for (int i = 0; i < subset_size; ++i) {
            mean_if += pool_scores[index[i]];
            subset.push_back(pool_labeled[index[i]]);
        }
        mean_if /= static_cast<double>(subset_size);
        // Fixed init/shuffle stream across trials: accuracy differences then
        // reflect the subsets, not training luck.
        RngStream sft_rng(derive_seed(cfg.master_seed, "correlate-sft"));
        SftResult sft = sft_and_eval(cfg, subset, corpus.testset, sft_rng);
        result.pairs.emplace_back(mean_if, sft.accuracy);
    }

    std::vector<double> xs, ys;
    xs.reserve(result.pairs.size());
    ys.reserve(result.pairs.size());
    for (const auto& [x, y] : result.pairs) {
        xs.push_back(x);
        ys.push_back(y);
    }
    result.pearson_r = pearson(xs, ys);
    result.spearman_rho = spearman(xs, ys);
    return result;
}

double aligned_focus_mass(const ExperimentConfig& cfg, const ParamVector& policy,
                          const Corpus& corpus, const std::map<int, int>& visits,
                          int top_k) {
    PolicySpec pspec = cfg.policy_spec();
    // Most-visited seeds, ties broken by id for determinism.
    std::vector<std::pair<int, int>> ranked(visits.begin(), visits.end());
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    if (ranked.empty()) {
        for (int i = 0; i < top_k && i < static_cast<int>(corpus.seeds.size()); ++i) {
            ranked.emplace_back(corpus.seeds[i].id, 0);
        }
    }
    int count = std::min<int>(top_k, ranked.size());
    IGSYN_REQUIRE(count > 0, "no seed contexts available");
    double total = 0.0;
    std::vector<double> input(pspec.input_dim());
    std::vector<double> dist(pspec.vocab_size);
    for (int i = 0; i < count; ++i) {
        const SeedDocument& doc = corpus.seeds[ranked[i].first];
        policy_input(pspec, doc.context, 0, -1, input);
        policy_logits(pspec, policy, input, dist);
        softmax_inplace(dist);
        double mass = 0.0;
        for (int tok = 0; tok < pspec.vocab_size; ++tok) {
            if (tok % 4 == static_cast<int>(FocusMode::kValidationAligned)) {
                mass += dist[tok];
            }
        }
        total += mass;
    }
    return total / static_cast<double>(count);
}

nlohmann::json MetricsReport::to_json() const {
    return {{"warmup", {{"val_losses", warmup_val_losses}}},
            {"rl",
             {{"updates", rl_updates},
              {"first_window_mean_reward", first_window_mean_reward},
              {"last_window_mean_reward", last_window_mean_reward},
              {"reward_ratio", reward_ratio},
              {"aligned_focus_mass", aligned_focus_mass}}},
            {"shift",
             {{"pre_mean_if", pre_mean_if},
              {"post_mean_if", post_mean_if},
              {"welch_t", welch_t},
              {"welch_p", welch_p}}},
            {"downstream",
             {{"pre_accuracy", pre_accuracy}, {"post_accuracy", post_accuracy}}}};
}

MetricsReport run_experiment(const ExperimentConfig& cfg, const std::string& out_dir) {
    Environment env(cfg.env);
    WarmupResult warm = warmup(cfg, env);
    write_text_file(out_dir + "/config.json", cfg.to_json().dump(2) + "\n");
    write_text_file(out_dir + "/trajectory.json",
                    warm.trajectory.to_json().dump(2) + "\n");

    RngStream pre_rng(derive_seed(cfg.master_seed, "synth-pre"));
    std::vector<SyntheticExample> dataset_pre = synthesize_dataset(
        cfg, env, warm.policy0, warm.corpus.seeds, cfg.synth_size, pre_rng, "pre");
    write_dataset_jsonl(out_dir + "/dataset_pre.jsonl", dataset_pre);

    PrompterResult prompter =
        train_prompter(cfg, env, warm.corpus, warm.trajectory);
    write_rollouts_jsonl(out_dir + "/rollouts.jsonl", prompter.rollouts);
    write_stats_csv(out_dir + "/stats.csv", prompter.curve);
    write_text_file(out_dir + "/policy.json", prompter.policy.to_json().dump(2) + "\n");

    RngStream post_rng(derive_seed(cfg.master_seed, "synth-post"));
    std::vector<SyntheticExample> dataset_post = synthesize_dataset(
        cfg, env, prompter.policy, warm.corpus.seeds, cfg.synth_size, post_rng, "post");
    write_dataset_jsonl(out_dir + "/dataset_post.jsonl", dataset_post);

    MetricsReport report;
    report.warmup_val_losses = warm.val_losses;
    report.rl_updates = cfg.rl_updates;
    int window = std::min<int>(20, prompter.curve.size());
    if (window > 0) {
        double first = 0.0, last = 0.0;
        for (int i = 0; i < window; ++i) {
            first += prompter.curve[i].mean_reward;
            last += prompter.curve[prompter.curve.size() - window + i].mean_reward;
        }
        report.first_window_mean_reward = first / window;
        report.last_window_mean_reward = last / window;
        report.reward_ratio =
            std::fabs(report.first_window_mean_reward) > 1e-12
                ? report.last_window_mean_reward / report.first_window_mean_reward
                : 0.0;
    }
    report.aligned_focus_mass =
        aligned_focus_mass(cfg, prompter.policy, warm.corpus, prompter.seed_visits);

    ClassifierSpec cspec = cfg.classifier_spec();
    InfluenceScorer scorer(cspec, warm.corpus.valset, &warm.trajectory,
                           cfg.influence_variant, cfg.influence_aggregation);
    std::vector<double> pre_scores = scorer.score_pool(as_labeled(dataset_pre));
    std::vector<double> post_scores = scorer.score_pool(as_labeled(dataset_post));
    auto mean_of = [](std::span<const double> v) {
        double s = 0.0;
        for (double x : v) s += x;
        return s / static_cast<double>(v.size());
    };
    report.pre_mean_if = mean_of(pre_scores);
    report.post_mean_if = mean_of(post_scores);
    WelchResult welch = welch_one_sided(post_scores, pre_scores);
    report.welch_t = welch.t;
    report.welch_p = welch.p;

    RngStream sft_pre_rng(derive_seed(cfg.master_seed, "sft-pre"));
    report.pre_accuracy = sft_and_eval(cfg, as_labeled(dataset_pre),
                                       warm.corpus.testset, sft_pre_rng)
                              .accuracy;
    RngStream sft_post_rng(derive_seed(cfg.master_seed, "sft-post"));
    report.post_accuracy = sft_and_eval(cfg, as_labeled(dataset_post),
                                        warm.corpus.testset, sft_post_rng)
                               .accuracy;

    nlohmann::json report_json = report.to_json();
    report_json["config"] = cfg.to_json();
    write_text_file(out_dir + "/report.json", report_json.dump(2) + "\n");
    return report;
}

}  // namespace igsyn
