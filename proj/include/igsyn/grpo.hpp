#pragma once

#include <string>
#include <vector>

#include "igsyn/env.hpp"
#include "igsyn/influence.hpp"
#include "igsyn/model.hpp"
#include "igsyn/param_vector.hpp"
#include "igsyn/rng.hpp"

namespace igsyn {

struct GrpoHyper {
    double clip_eps = 0.2;
    double kl_beta = 0.01;
    double delta = 1e-8;
    double entropy_coef = 0.01;
    double lr = 1e-3;
    int group_size = 5;
    double temperature = 1.5;
    double lambda_penalty = 0.1;

    void validate() const;
};

struct Trajectory {
    int seed_id = 0;
    std::vector<int> tokens;
    std::vector<double> behavior_logprobs;  // temperature-scaled, at sampling
    std::vector<double> old_logprobs;       // temperature-1, for importance ratios
    SyntheticExample example;
    int valid = 0;
    std::string invalid_reason;
    double raw_if = 0.0;   // meaningful only when valid
    double if_norm = 0.0;  // set by fill_rewards for valid trajectories
    double reward = 0.0;   // set by fill_rewards
};

struct RolloutGroup {
    int seed_id = 0;
    std::vector<double> context;  // the seed's policy conditioning vector
    std::vector<Trajectory> trajectories;  // exactly G
    std::vector<double> advantages;        // set by fill_rewards
};

struct GrpoStats {
    double loss = 0.0;
    double surrogate = 0.0;
    double mean_reward = 0.0;
    double mean_if = 0.0;  // mean if_norm over valid trajectories (0 if none)
    double kl = 0.0;
    double entropy = 0.0;
    double clip_frac = 0.0;
};

// R = valid * if_norm - lambda * (1 - valid)
double reward(int valid, double if_norm, double lambda);

// Group-normalized advantages with population variance: (R - mean)/sqrt(popvar + delta).
std::vector<double> advantages(std::span<const double> rewards, double delta);

// exp(new - old), elementwise.
std::vector<double> importance_ratios(std::span<const double> new_logprobs,
                                      std::span<const double> old_logprobs);

// min(ratio * adv, clip(ratio, 1-eps, 1+eps) * adv)
double clipped_term(double ratio, double advantage, double eps);

// Mean over rows of exact categorical KL(p || q); throws on support violation.
double kl_term(const std::vector<std::vector<double>>& policy_dists,
               const std::vector<std::vector<double>>& ref_dists);

// Mean over rows of entropy -sum p ln p.
double entropy_term(const std::vector<std::vector<double>>& dists);

// Samples G rubrics at hyper.temperature, generates and validity-checks one
// synthetic example each, and scores raw influence for the valid ones.
// Rewards/advantages are left for fill_rewards, which sees the whole batch.
RolloutGroup collect_group(const ParamVector& policy_params, const PolicySpec& spec,
                           const SeedDocument& seed_doc, const Environment& env,
                           const InfluenceScorer& scorer, const GrpoHyper& hyper,
                           RngStream& rng);

// Min-max-normalizes raw influence across the batch (all groups, or per group
// when per_group), fills Eq.-style rewards, then computes group advantages.
void fill_rewards(std::vector<RolloutGroup>& groups, const GrpoHyper& hyper,
                  bool per_group = false);

// One gradient step on the clipped surrogate + KL + entropy objective.
// Mutates policy_params; groups must have rewards and advantages filled.
GrpoStats grpo_update(ParamVector& policy_params, const PolicySpec& spec,
                      const std::vector<RolloutGroup>& groups,
                      const ParamVector& ref_params, const GrpoHyper& hyper);

}  // namespace igsyn
