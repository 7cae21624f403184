#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "igsyn/model.hpp"
#include "igsyn/optimizer.hpp"
#include "igsyn/param_vector.hpp"

namespace igsyn {

struct InfluenceRecord {
    std::string candidate_id;
    double raw_score = 0.0;
    std::optional<double> normalized_score;  // in [0,1] once normalization ran
};

// a.b / (|a||b|); 0 when either norm is below 1e-30.
double cosine(std::span<const double> a, std::span<const double> b);

// Predicted loss decrease on z' from one SGD step on z: lr * <g_z, g_z'>.
double per_step_influence(std::span<const double> train_grad,
                          std::span<const double> val_grad, double lr);

enum class InfluenceVariant { kSgd, kAdam };
enum class ValAggregation { kMean, kSum, kMax };

double influence_sgd(const ClassifierSpec& spec, const LabeledExample& z,
                     const LabeledExample& z_val, const TrainingTrajectory& trajectory);

double influence_adam(const ClassifierSpec& spec, const LabeledExample& z,
                      const LabeledExample& z_val, const TrainingTrajectory& trajectory);

double influence_vs_valset(const ClassifierSpec& spec, const LabeledExample& z,
                           std::span<const LabeledExample> valset,
                           const TrainingTrajectory& trajectory,
                           InfluenceVariant variant,
                           ValAggregation aggregation = ValAggregation::kMean);

std::vector<double> minmax_normalize(std::span<const double> scores);

// Ground-truth probe: clone the checkpoint, run step_count Adam updates on z
// alone (moments continue from the snapshot), return mean validation loss
// before minus after. Positive = training on z helped.
double brute_force_utility(const ClassifierSpec& spec, const LabeledExample& z,
                           const Checkpoint& checkpoint,
                           std::span<const LabeledExample> valset, int step_count,
                           double lr, const AdamConfig& config = AdamConfig{});

// Batch scorer that caches per-checkpoint validation gradients (the same
// valset is scored against every candidate, so the val side is hoisted).
class InfluenceScorer {
public:
    InfluenceScorer(const ClassifierSpec& spec, std::vector<LabeledExample> valset,
                    const TrainingTrajectory* trajectory,
                    InfluenceVariant variant = InfluenceVariant::kAdam,
                    ValAggregation aggregation = ValAggregation::kMean);

    double score(const LabeledExample& z) const;
    std::vector<double> score_pool(std::span<const LabeledExample> pool) const;

private:
    ClassifierSpec spec_;
    std::vector<LabeledExample> valset_;
    const TrainingTrajectory* trajectory_;
    InfluenceVariant variant_;
    ValAggregation aggregation_;
    // val_grads_[checkpoint][val example] -> gradient
    std::vector<std::vector<std::vector<double>>> val_grads_;
};

}  // namespace igsyn
