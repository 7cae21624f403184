#include "igsyn/influence.hpp"

#include <algorithm>
#include <cmath>

#include "igsyn/contract.hpp"
#include "igsyn/kernels.hpp"

namespace igsyn {

double cosine(std::span<const double> a, std::span<const double> b) {
    IGSYN_REQUIRE(a.size() == b.size(), "cosine length mismatch");
    double na = std::sqrt(kernels::sumsq(a.data(), a.size()));
    double nb = std::sqrt(kernels::sumsq(b.data(), b.size()));
    if (na < 1e-30 || nb < 1e-30) return 0.0;
    return kernels::dot(a.data(), b.data(), a.size()) / (na * nb);
}

double per_step_influence(std::span<const double> train_grad,
                          std::span<const double> val_grad, double lr) {
    IGSYN_REQUIRE(train_grad.size() == val_grad.size(),
                  "per_step_influence dimension mismatch");
    IGSYN_REQUIRE(lr > 0.0, "learning rate must be positive");
    return lr * kernels::dot(train_grad.data(), val_grad.data(), train_grad.size());
}

namespace {

void check_trajectory(const TrainingTrajectory& trajectory) {
    IGSYN_REQUIRE(!trajectory.checkpoints.empty(), "trajectory must be non-empty");
}

void check_adam_states(const TrainingTrajectory& trajectory) {
    for (const Checkpoint& ck : trajectory.checkpoints) {
        IGSYN_REQUIRE(ck.adam_state.m.size() == ck.params.size() &&
                          ck.adam_state.v.size() == ck.params.size(),
                      "checkpoint missing Adam state");
    }
}

double aggregate(std::span<const double> per_pair, ValAggregation aggregation) {
    switch (aggregation) {
        case ValAggregation::kSum: {
            double s = 0.0;
            for (double v : per_pair) s += v;
            return s;
        }
        case ValAggregation::kMax:
            return *std::max_element(per_pair.begin(), per_pair.end());
        case ValAggregation::kMean:
        default: {
            double s = 0.0;
            for (double v : per_pair) s += v;
            return s / static_cast<double>(per_pair.size());
        }
    }
}

}  // namespace

double influence_sgd(const ClassifierSpec& spec, const LabeledExample& z,
                     const LabeledExample& z_val, const TrainingTrajectory& trajectory) {
    check_trajectory(trajectory);
    double total = 0.0;
    for (const Checkpoint& ck : trajectory.checkpoints) {
        std::vector<double> gz = grad(spec, ck.params, z);
        std::vector<double> gv = grad(spec, ck.params, z_val);
        total += ck.avg_lr * kernels::dot(gz.data(), gv.data(), gz.size());
    }
    return total;
}

double influence_adam(const ClassifierSpec& spec, const LabeledExample& z,
                      const LabeledExample& z_val, const TrainingTrajectory& trajectory) {
    check_trajectory(trajectory);
    check_adam_states(trajectory);
    AdamConfig cfg;  // betas/eps only; learning rates come from the checkpoints
    double total = 0.0;
    for (const Checkpoint& ck : trajectory.checkpoints) {
        std::vector<double> gz = grad(spec, ck.params, z);
        std::vector<double> gv = grad(spec, ck.params, z_val);
        std::vector<double> gamma = adam_direction(gz, ck.adam_state, cfg);
        total += ck.avg_lr * cosine(gv, gamma);
    }
    return total;
}

double influence_vs_valset(const ClassifierSpec& spec, const LabeledExample& z,
                           std::span<const LabeledExample> valset,
                           const TrainingTrajectory& trajectory,
                           InfluenceVariant variant, ValAggregation aggregation) {
    IGSYN_REQUIRE(!valset.empty(), "valset must be non-empty");
    std::vector<double> per_pair;
    per_pair.reserve(valset.size());
    for (const LabeledExample& z_val : valset) {
        per_pair.push_back(variant == InfluenceVariant::kSgd
                               ? influence_sgd(spec, z, z_val, trajectory)
                               : influence_adam(spec, z, z_val, trajectory));
    }
    return aggregate(per_pair, aggregation);
}

std::vector<double> minmax_normalize(std::span<const double> scores) {
    IGSYN_REQUIRE(!scores.empty(), "cannot normalize an empty score list");
    auto [lo_it, hi_it] = std::minmax_element(scores.begin(), scores.end());
    double lo = *lo_it, hi = *hi_it;
    std::vector<double> out(scores.size());
    if (hi - lo < 1e-12) {
        std::fill(out.begin(), out.end(), 0.5);
        return out;
    }
    for (std::size_t i = 0; i < scores.size(); ++i) {
        out[i] = (scores[i] - lo) / (hi - lo);
    }
    return out;
}

double brute_force_utility(const ClassifierSpec& spec, const LabeledExample& z,
                           const Checkpoint& checkpoint,
                           std::span<const LabeledExample> valset, int step_count,
                           double lr, const AdamConfig& config) {
    IGSYN_REQUIRE(step_count >= 1, "step_count must be >= 1");
    IGSYN_REQUIRE(!valset.empty(), "valset must be non-empty");
    auto mean_val_loss = [&](const ParamVector& p) {
        double s = 0.0;
        for (const LabeledExample& ex : valset) s += loss(spec, p, ex);
        return s / static_cast<double>(valset.size());
    };
    ParamVector params = checkpoint.params;
    AdamState state = checkpoint.adam_state;
    if (state.m.size() != params.size()) state = AdamState::zeros(params.size());
    AdamConfig cfg = config;
    cfg.learning_rate = lr;
    double before = mean_val_loss(params);
    for (int s = 0; s < step_count; ++s) {
        std::vector<double> g = grad(spec, params, z);
        adam_step(params, state, g, cfg);
    }
    return before - mean_val_loss(params);
}

InfluenceScorer::InfluenceScorer(const ClassifierSpec& spec,
                                 std::vector<LabeledExample> valset,
                                 const TrainingTrajectory* trajectory,
                                 InfluenceVariant variant, ValAggregation aggregation)
    : spec_(spec),
      valset_(std::move(valset)),
      trajectory_(trajectory),
      variant_(variant),
      aggregation_(aggregation) {
    IGSYN_REQUIRE(trajectory_ != nullptr, "trajectory must be provided");
    check_trajectory(*trajectory_);
    IGSYN_REQUIRE(!valset_.empty(), "valset must be non-empty");
    if (variant_ == InfluenceVariant::kAdam) check_adam_states(*trajectory_);
    val_grads_.reserve(trajectory_->checkpoints.size());
    for (const Checkpoint& ck : trajectory_->checkpoints) {
        std::vector<std::vector<double>> grads;
        grads.reserve(valset_.size());
        for (const LabeledExample& z_val : valset_) {
            grads.push_back(grad(spec_, ck.params, z_val));
        }
        val_grads_.push_back(std::move(grads));
    }
}

double InfluenceScorer::score(const LabeledExample& z) const {
    AdamConfig cfg;
    std::vector<double> per_pair(valset_.size(), 0.0);
    for (std::size_t c = 0; c < trajectory_->checkpoints.size(); ++c) {
        const Checkpoint& ck = trajectory_->checkpoints[c];
        std::vector<double> gz = grad(spec_, ck.params, z);
        if (variant_ == InfluenceVariant::kAdam) {
            std::vector<double> gamma = adam_direction(gz, ck.adam_state, cfg);
            for (std::size_t j = 0; j < valset_.size(); ++j) {
                per_pair[j] += ck.avg_lr * cosine(val_grads_[c][j], gamma);
            }
        } else {
            for (std::size_t j = 0; j < valset_.size(); ++j) {
                per_pair[j] += ck.avg_lr * kernels::dot(gz.data(), val_grads_[c][j].data(),
                                                        gz.size());
            }
        }
    }
    return aggregate(per_pair, aggregation_);
}

std::vector<double> InfluenceScorer::score_pool(
    std::span<const LabeledExample> pool) const {
    std::vector<double> scores;
    scores.reserve(pool.size());
    for (const LabeledExample& z : pool) scores.push_back(score(z));
    return scores;
}

}  // namespace igsyn
