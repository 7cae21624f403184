#include "igsyn/grpo.hpp"

#include <algorithm>
#include <cmath>

#include "igsyn/contract.hpp"
#include "igsyn/kernels.hpp"
#include "igsyn/optimizer.hpp"

namespace igsyn {

void GrpoHyper::validate() const {
    IGSYN_REQUIRE(clip_eps > 0.0 && clip_eps < 1.0, "clip_eps out of range");
    IGSYN_REQUIRE(kl_beta >= 0.0, "kl_beta must be non-negative");
    IGSYN_REQUIRE(delta > 0.0, "delta must be positive");
    IGSYN_REQUIRE(entropy_coef >= 0.0, "entropy_coef must be non-negative");
    IGSYN_REQUIRE(lr > 0.0, "lr must be positive");
    IGSYN_REQUIRE(group_size >= 2, "group_size must be >= 2");
    IGSYN_REQUIRE(temperature > 0.0, "temperature must be positive");
    IGSYN_REQUIRE(lambda_penalty > 0.0, "lambda_penalty must be positive");
}

double reward(int valid, double if_norm, double lambda) {
    IGSYN_REQUIRE(valid == 0 || valid == 1, "valid must be 0 or 1");
    IGSYN_REQUIRE(lambda > 0.0, "lambda must be positive");
    if (valid == 1) {
        IGSYN_REQUIRE(if_norm >= 0.0 && if_norm <= 1.0, "if_norm must be in [0,1]");
        return if_norm;
    }
    return -lambda;
}

std::vector<double> advantages(std::span<const double> rewards, double delta) {
    IGSYN_REQUIRE(rewards.size() >= 2, "advantages need a group of >= 2");
    IGSYN_REQUIRE(delta > 0.0, "delta must be positive");
    double n = static_cast<double>(rewards.size());
    double mean = 0.0;
    for (double r : rewards) mean += r;
    mean /= n;
    double var = 0.0;
    for (double r : rewards) var += (r - mean) * (r - mean);
    var /= n;  // population variance
    double denom = std::sqrt(var + delta);
    std::vector<double> out(rewards.size());
    for (std::size_t i = 0; i < rewards.size(); ++i) {
        out[i] = (rewards[i] - mean) / denom;
    }
    return out;
}

std::vector<double> importance_ratios(std::span<const double> new_logprobs,
                                      std::span<const double> old_logprobs) {
    IGSYN_REQUIRE(new_logprobs.size() == old_logprobs.size(),
                  "logprob length mismatch");
    std::vector<double> r(new_logprobs.size());
    for (std::size_t i = 0; i < r.size(); ++i) {
        r[i] = std::exp(new_logprobs[i] - old_logprobs[i]);
    }
    return r;
}

double clipped_term(double ratio, double advantage, double eps) {
    IGSYN_REQUIRE(ratio > 0.0, "ratio must be positive");
    double clipped = std::clamp(ratio, 1.0 - eps, 1.0 + eps);
    return std::min(ratio * advantage, clipped * advantage);
}

double kl_term(const std::vector<std::vector<double>>& policy_dists,
               const std::vector<std::vector<double>>& ref_dists) {
    IGSYN_REQUIRE(policy_dists.size() == ref_dists.size(), "KL row count mismatch");
    IGSYN_REQUIRE(!policy_dists.empty(), "KL of empty distribution list");
    double total = 0.0;
    for (std::size_t t = 0; t < policy_dists.size(); ++t) {
        const auto& p = policy_dists[t];
        const auto& q = ref_dists[t];
        IGSYN_REQUIRE(p.size() == q.size(), "KL column count mismatch");
        double row = 0.0;
        for (std::size_t a = 0; a < p.size(); ++a) {
            if (p[a] == 0.0) continue;
            IGSYN_REQUIRE(q[a] > 0.0, "KL support violation: q=0 where p>0");
            row += p[a] * std::log(p[a] / q[a]);
        }
        total += row;
    }
    return total / static_cast<double>(policy_dists.size());
}

double entropy_term(const std::vector<std::vector<double>>& dists) {
    IGSYN_REQUIRE(!dists.empty(), "entropy of empty distribution list");
    double total = 0.0;
    for (const auto& p : dists) {
        double h = 0.0;
        for (double v : p) {
            if (v > 0.0) h -= v * std::log(v);
        }
        total += h;
    }
    return total / static_cast<double>(dists.size());
}

RolloutGroup collect_group(const ParamVector& policy_params, const PolicySpec& spec,
                           const SeedDocument& seed_doc, const Environment& env,
                           const InfluenceScorer& scorer, const GrpoHyper& hyper,
                           RngStream& rng) {
    hyper.validate();
    RolloutGroup group;
    group.seed_id = seed_doc.id;
    group.context = seed_doc.context;
    group.trajectories.reserve(hyper.group_size);
    for (int g = 0; g < hyper.group_size; ++g) {
        PolicySample sample =
            policy_sample(spec, policy_params, seed_doc.context, hyper.temperature, rng);
        Trajectory traj;
        traj.seed_id = seed_doc.id;
        traj.tokens = sample.tokens;
        traj.behavior_logprobs = sample.behavior_logprobs;
        traj.old_logprobs =
            policy_logprobs(spec, policy_params, seed_doc.context, traj.tokens).logprobs;
        traj.example = env.generate(seed_doc, traj.tokens, rng);
        ValidityResult vr = env.validity(traj.example);
        traj.valid = vr.valid ? 1 : 0;
        traj.invalid_reason = vr.reason;
        if (traj.valid == 1) {
            traj.raw_if = scorer.score(traj.example.as_labeled());
        }
        group.trajectories.push_back(std::move(traj));
    }
    return group;
}

namespace {

void fill_one_batch(std::vector<Trajectory*>& valid_trajs, const GrpoHyper& hyper) {
    if (valid_trajs.empty()) return;
    std::vector<double> raw;
    raw.reserve(valid_trajs.size());
    for (const Trajectory* t : valid_trajs) raw.push_back(t->raw_if);
    std::vector<double> norm = minmax_normalize(raw);
    for (std::size_t i = 0; i < valid_trajs.size(); ++i) {
        valid_trajs[i]->if_norm = norm[i];
    }
}

}  // namespace

void fill_rewards(std::vector<RolloutGroup>& groups, const GrpoHyper& hyper,
                  bool per_group) {
    hyper.validate();
    if (per_group) {
        for (RolloutGroup& group : groups) {
            std::vector<Trajectory*> valid_trajs;
            for (Trajectory& t : group.trajectories) {
                if (t.valid == 1) valid_trajs.push_back(&t);
            }
            fill_one_batch(valid_trajs, hyper);
        }
    } else {
        std::vector<Trajectory*> valid_trajs;
        for (RolloutGroup& group : groups) {
            for (Trajectory& t : group.trajectories) {
                if (t.valid == 1) valid_trajs.push_back(&t);
            }
        }
        fill_one_batch(valid_trajs, hyper);
    }
    for (RolloutGroup& group : groups) {
        std::vector<double> rewards;
        rewards.reserve(group.trajectories.size());
        for (Trajectory& t : group.trajectories) {
            t.reward = reward(t.valid, t.if_norm, hyper.lambda_penalty);
            rewards.push_back(t.reward);
        }
        group.advantages = advantages(rewards, hyper.delta);
    }
}

GrpoStats grpo_update(ParamVector& policy_params, const PolicySpec& spec,
                      const std::vector<RolloutGroup>& groups,
                      const ParamVector& ref_params, const GrpoHyper& hyper) {
    hyper.validate();
    IGSYN_REQUIRE(!groups.empty(), "grpo_update needs at least one group");
    for (const RolloutGroup& group : groups) {
        IGSYN_REQUIRE(static_cast<int>(group.trajectories.size()) == hyper.group_size,
                      "incomplete group");
        IGSYN_REQUIRE(group.advantages.size() == group.trajectories.size(),
                      "group advantages not filled");
    }

    GrpoStats stats;
    const int L = spec.rubric_length;
    const std::size_t traj_count = groups.size() * hyper.group_size;
    const std::size_t token_count = traj_count * L;
    // Per-trajectory token mean times batch mean over trajectories makes every
    // term a per-token mean, so all three objective pieces share one scale.
    const double tok_scale = 1.0 / static_cast<double>(token_count);

    std::vector<double> grad_loss(policy_params.size(), 0.0);
    std::vector<double> input(spec.input_dim());
    std::vector<double> dlogits(spec.vocab_size);

    std::size_t clipped_tokens = 0;
    double surrogate_sum = 0.0;  // per-trajectory token means
    double kl_sum = 0.0;         // per-token
    double entropy_sum = 0.0;    // per-token
    double reward_sum = 0.0;
    double if_sum = 0.0;
    std::size_t valid_count = 0;

    for (const RolloutGroup& group : groups) {
        for (std::size_t i = 0; i < group.trajectories.size(); ++i) {
            const Trajectory& traj = group.trajectories[i];
            double adv = group.advantages[i];
            PolicyEval cur =
                policy_logprobs(spec, policy_params, group.context, traj.tokens);
            PolicyEval ref =
                policy_logprobs(spec, ref_params, group.context, traj.tokens);
            std::vector<double> ratios =
                importance_ratios(cur.logprobs, traj.old_logprobs);

            double traj_surrogate = 0.0;
            for (int t = 0; t < L; ++t) {
                const std::vector<double>& p = cur.dists[t];
                const std::vector<double>& q = ref.dists[t];
                double unclipped = ratios[t] * adv;
                double term = clipped_term(ratios[t], adv, hyper.clip_eps);
                traj_surrogate += term;
                bool clipped_active = unclipped > term;
                if (clipped_active) ++clipped_tokens;

                double kl_t = 0.0;
                double h_t = 0.0;
                for (int a = 0; a < spec.vocab_size; ++a) {
                    if (p[a] > 0.0) {
                        IGSYN_REQUIRE(q[a] > 0.0, "KL support violation: q=0 where p>0");
                        kl_t += p[a] * std::log(p[a] / q[a]);
                        h_t -= p[a] * std::log(p[a]);
                    }
                }
                kl_sum += kl_t;
                entropy_sum += h_t;

                // Loss gradient w.r.t. this position's logits. The surrogate
                // reaches theta only through the unclipped branch (the clipped
                // value is constant in theta almost everywhere); d r/d logit_a
                // = r * (1[a=tok] - p_a).
                double coeff = clipped_active ? 0.0 : ratios[t] * adv;
                for (int a = 0; a < spec.vocab_size; ++a) {
                    double lp = std::log(std::max(p[a], 1e-300));
                    double lq = std::log(std::max(q[a], 1e-300));
                    double d_surr = coeff * ((a == traj.tokens[t] ? 1.0 : 0.0) - p[a]);
                    double d_kl = p[a] * ((lp - lq) - kl_t);
                    double d_ent = -p[a] * (lp + h_t);
                    dlogits[a] = tok_scale * (-d_surr + hyper.kl_beta * d_kl -
                                              hyper.entropy_coef * d_ent);
                }
                policy_input(spec, group.context, t, t > 0 ? traj.tokens[t - 1] : -1,
                             input);
                policy_accumulate_logit_grad(spec, input, dlogits, grad_loss);
            }
            surrogate_sum += traj_surrogate / static_cast<double>(L);
            reward_sum += traj.reward;
            if (traj.valid == 1) {
                if_sum += traj.if_norm;
                ++valid_count;
            }
        }
    }

    stats.kl = kl_sum / static_cast<double>(token_count);
    stats.entropy = entropy_sum / static_cast<double>(token_count);
    stats.surrogate = surrogate_sum / static_cast<double>(traj_count);
    stats.loss = -stats.surrogate + hyper.kl_beta * stats.kl -
                 hyper.entropy_coef * stats.entropy;
    stats.mean_reward = reward_sum / static_cast<double>(traj_count);
    stats.mean_if = valid_count > 0 ? if_sum / static_cast<double>(valid_count) : 0.0;
    stats.clip_frac =
        static_cast<double>(clipped_tokens) / static_cast<double>(token_count);

    sgd_step(policy_params, grad_loss, hyper.lr);
    return stats;
}

}  // namespace igsyn
