#include "igsyn/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "igsyn/contract.hpp"

namespace igsyn {

namespace {

void check_known_keys(const nlohmann::json& j, const std::string& section,
                      const std::set<std::string>& known) {
    for (const auto& [key, value] : j.items()) {
        if (!known.contains(key)) {
            std::string where = section.empty() ? key : section + "." + key;
            throw ContractError("unknown config key: " + where);
        }
    }
}

template <typename T>
void get_if(const nlohmann::json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

EnvConfig env_from_json(const nlohmann::json& j, std::uint64_t master_seed) {
    check_known_keys(j, "env",
                     {"topic_count", "feature_dim", "vocab", "rubric_length",
                      "validation_topics", "noise_grid", "flip_grid", "seed_count",
                      "val_size", "test_size"});
    EnvConfig env;
    get_if(j, "topic_count", env.topic_count);
    get_if(j, "feature_dim", env.feature_dim);
    get_if(j, "vocab", env.vocab);
    get_if(j, "rubric_length", env.rubric_length);
    get_if(j, "validation_topics", env.validation_topics);
    get_if(j, "noise_grid", env.noise_grid);
    get_if(j, "flip_grid", env.flip_grid);
    get_if(j, "seed_count", env.seed_count);
    get_if(j, "val_size", env.val_size);
    get_if(j, "test_size", env.test_size);
    env.master_seed = master_seed;
    return env;
}

AdamConfig adam_from_json(const nlohmann::json& j, const std::string& section,
                          AdamConfig cfg) {
    check_known_keys(j, section, {"learning_rate", "beta1", "beta2", "eps_adam"});
    get_if(j, "learning_rate", cfg.learning_rate);
    get_if(j, "beta1", cfg.beta1);
    get_if(j, "beta2", cfg.beta2);
    get_if(j, "eps_adam", cfg.eps_adam);
    return cfg;
}

GrpoHyper grpo_from_json(const nlohmann::json& j, bool& per_group_norm) {
    check_known_keys(j, "grpo",
                     {"clip_eps", "kl_beta", "delta", "entropy_coef", "lr",
                      "group_size", "temperature", "lambda_penalty",
                      "per_group_norm"});
    GrpoHyper hyper;
    get_if(j, "clip_eps", hyper.clip_eps);
    get_if(j, "kl_beta", hyper.kl_beta);
    get_if(j, "delta", hyper.delta);
    get_if(j, "entropy_coef", hyper.entropy_coef);
    get_if(j, "lr", hyper.lr);
    get_if(j, "group_size", hyper.group_size);
    get_if(j, "temperature", hyper.temperature);
    get_if(j, "lambda_penalty", hyper.lambda_penalty);
    get_if(j, "per_group_norm", per_group_norm);
    return hyper;
}

}  // namespace

ClassifierSpec ExperimentConfig::classifier_spec() const {
    return ClassifierSpec{env.feature_dim, model_hidden_dim, env.topic_count};
}

PolicySpec ExperimentConfig::policy_spec() const {
    return PolicySpec{env.vocab, env.rubric_length, env.context_dim()};
}

void ExperimentConfig::validate() const {
    target_optimizer.validate();
    grpo.validate();
    Environment check_env(env);  // runs the env invariants
    (void)check_env;
    IGSYN_REQUIRE(model_hidden_dim >= 0, "model.hidden_dim must be >= 0");
    IGSYN_REQUIRE(warmup_fraction > 0.0 && warmup_fraction <= 1.0,
                  "warmup_fraction out of range");
    IGSYN_REQUIRE(warmup_epochs >= 1, "warmup_epochs must be >= 1");
    IGSYN_REQUIRE(warmup_pool_size >= 1, "warmup_pool_size must be >= 1");
    IGSYN_REQUIRE(rl_updates >= 0, "rl_updates must be >= 0");
    IGSYN_REQUIRE(seeds_per_update >= 1, "seeds_per_update must be >= 1");
    IGSYN_REQUIRE(synth_size >= 1, "synth_size must be >= 1");
    IGSYN_REQUIRE(sft_epochs >= 1, "sft_epochs must be >= 1");
    IGSYN_REQUIRE(sft_learning_rate > 0.0, "sft_learning_rate must be positive");
    IGSYN_REQUIRE(sft_batch_size >= 1, "sft_batch_size must be >= 1");
    IGSYN_REQUIRE(synth_temperature > 0.0, "synth_temperature must be positive");
    IGSYN_REQUIRE(synth_retry_cap >= 1, "synth_retry_cap must be >= 1");
}

nlohmann::json ExperimentConfig::to_json() const {
    nlohmann::json j;
    j["master_seed"] = master_seed;
    j["env"] = {{"topic_count", env.topic_count},
                {"feature_dim", env.feature_dim},
                {"vocab", env.vocab},
                {"rubric_length", env.rubric_length},
                {"validation_topics", env.validation_topics},
                {"noise_grid", env.noise_grid},
                {"flip_grid", env.flip_grid},
                {"seed_count", env.seed_count},
                {"val_size", env.val_size},
                {"test_size", env.test_size}};
    j["model"] = {{"hidden_dim", model_hidden_dim}};
    j["target_optimizer"] = {{"learning_rate", target_optimizer.learning_rate},
                             {"beta1", target_optimizer.beta1},
                             {"beta2", target_optimizer.beta2},
                             {"eps_adam", target_optimizer.eps_adam}};
    j["grpo"] = {{"clip_eps", grpo.clip_eps},
                 {"kl_beta", grpo.kl_beta},
                 {"delta", grpo.delta},
                 {"entropy_coef", grpo.entropy_coef},
                 {"lr", grpo.lr},
                 {"group_size", grpo.group_size},
                 {"temperature", grpo.temperature},
                 {"lambda_penalty", grpo.lambda_penalty},
                 {"per_group_norm", grpo_per_group_norm}};
    j["influence"] = {
        {"variant", influence_variant == InfluenceVariant::kAdam ? "adam" : "sgd"},
        {"aggregation", influence_aggregation == ValAggregation::kMean   ? "mean"
                        : influence_aggregation == ValAggregation::kSum ? "sum"
                                                                        : "max"}};
    j["warmup_fraction"] = warmup_fraction;
    j["warmup_epochs"] = warmup_epochs;
    j["warmup_pool_size"] = warmup_pool_size;
    j["rl_updates"] = rl_updates;
    j["seeds_per_update"] = seeds_per_update;
    j["synth_size"] = synth_size;
    j["sft_epochs"] = sft_epochs;
    j["sft_learning_rate"] = sft_learning_rate;
    j["sft_batch_size"] = sft_batch_size;
    j["synth_temperature"] = synth_temperature;
    j["synth_retry_cap"] = synth_retry_cap;
    return j;
}

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
    IGSYN_REQUIRE(j.is_object(), "config must be a JSON object");
    check_known_keys(j, "",
                     {"master_seed", "env", "model", "target_optimizer", "grpo",
                      "influence", "warmup_fraction", "warmup_epochs",
                      "warmup_pool_size", "rl_updates", "seeds_per_update",
                      "synth_size", "sft_epochs", "sft_learning_rate", "sft_batch_size",
                      "synth_temperature", "synth_retry_cap"});
    ExperimentConfig cfg;
    get_if(j, "master_seed", cfg.master_seed);
    if (j.contains("env")) {
        cfg.env = env_from_json(j.at("env"), cfg.master_seed);
    } else {
        cfg.env.master_seed = cfg.master_seed;
    }
    if (j.contains("model")) {
        check_known_keys(j.at("model"), "model", {"hidden_dim"});
        get_if(j.at("model"), "hidden_dim", cfg.model_hidden_dim);
    }
    if (j.contains("target_optimizer")) {
        cfg.target_optimizer = adam_from_json(
            j.at("target_optimizer"), "target_optimizer", cfg.target_optimizer);
    }
    if (j.contains("grpo")) {
        cfg.grpo = grpo_from_json(j.at("grpo"), cfg.grpo_per_group_norm);
    }
    if (j.contains("influence")) {
        const auto& inf = j.at("influence");
        check_known_keys(inf, "influence", {"variant", "aggregation"});
        if (inf.contains("variant")) {
            std::string v = inf.at("variant").get<std::string>();
            IGSYN_REQUIRE(v == "adam" || v == "sgd",
                          "influence.variant must be adam or sgd");
            cfg.influence_variant =
                v == "adam" ? InfluenceVariant::kAdam : InfluenceVariant::kSgd;
        }
        if (inf.contains("aggregation")) {
            std::string a = inf.at("aggregation").get<std::string>();
            IGSYN_REQUIRE(a == "mean" || a == "sum" || a == "max",
                          "influence.aggregation must be mean, sum, or max");
            cfg.influence_aggregation = a == "mean"  ? ValAggregation::kMean
                                        : a == "sum" ? ValAggregation::kSum
                                                     : ValAggregation::kMax;
        }
    }
    get_if(j, "warmup_fraction", cfg.warmup_fraction);
    get_if(j, "warmup_epochs", cfg.warmup_epochs);
    get_if(j, "warmup_pool_size", cfg.warmup_pool_size);
    get_if(j, "rl_updates", cfg.rl_updates);
    get_if(j, "seeds_per_update", cfg.seeds_per_update);
    get_if(j, "synth_size", cfg.synth_size);
    get_if(j, "sft_epochs", cfg.sft_epochs);
    get_if(j, "sft_learning_rate", cfg.sft_learning_rate);
    get_if(j, "sft_batch_size", cfg.sft_batch_size);
    get_if(j, "synth_temperature", cfg.synth_temperature);
    get_if(j, "synth_retry_cap", cfg.synth_retry_cap);
    cfg.validate();
    return cfg;
}

ExperimentConfig parse_config_text(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    return ExperimentConfig::from_json(j);
}

ExperimentConfig parse_config(const std::string& path) {
    std::ifstream in(path);
    IGSYN_REQUIRE(in.good(), "cannot open config file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

}  // namespace igsyn
