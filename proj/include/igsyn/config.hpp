#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

#include "igsyn/env.hpp"
#include "igsyn/grpo.hpp"
#include "igsyn/influence.hpp"
#include "igsyn/optimizer.hpp"

namespace igsyn {

// Fully resolved experiment configuration. JSON shape mirrors the struct:
// sections env/model/target_optimizer/grpo/influence plus top-level pipeline
// scalars. Unknown keys are rejected by name; every invariant is validated.
struct ExperimentConfig {
    std::uint64_t master_seed = 42;
    EnvConfig env;
    int model_hidden_dim = 0;
    // Warm-up and brute-force training. Desk-scale default lr, hotter than
    // the generic AdamConfig default.
    AdamConfig target_optimizer{.learning_rate = 0.05};
    GrpoHyper grpo;
    bool grpo_per_group_norm = false;
    InfluenceVariant influence_variant = InfluenceVariant::kAdam;
    ValAggregation influence_aggregation = ValAggregation::kMean;

    double warmup_fraction = 0.10;
    int warmup_epochs = 3;
    int warmup_pool_size = 600;
    int rl_updates = 200;   // K
    int seeds_per_update = 8;
    int synth_size = 1000;
    int sft_epochs = 25;
    double sft_learning_rate = 0.05;
    int sft_batch_size = 32;
    double synth_temperature = 1.0;
    int synth_retry_cap = 50;

    ClassifierSpec classifier_spec() const;
    PolicySpec policy_spec() const;

    void validate() const;
    nlohmann::json to_json() const;
    static ExperimentConfig from_json(const nlohmann::json& j);
};

// Reads, parses, defaults, and validates; errors name the offending key.
ExperimentConfig parse_config(const std::string& path);

// Resolved-config round-trip helper.
ExperimentConfig parse_config_text(const std::string& text);

}  // namespace igsyn
