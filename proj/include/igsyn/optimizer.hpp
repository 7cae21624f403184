#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "igsyn/model.hpp"
#include "igsyn/param_vector.hpp"
#include "igsyn/rng.hpp"

namespace igsyn {

struct AdamConfig {
    double learning_rate = 0.01;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps_adam = 1e-8;

    void validate() const;
};

struct AdamState {
    std::vector<double> m;
    std::vector<double> v;  // elementwise >= 0
    std::int64_t step = 0;

    static AdamState zeros(std::size_t n) {
        return AdamState{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0), 0};
    }
};

// params -= lr * grad
void sgd_step(ParamVector& params, std::span<const double> grad, double lr);

// One Adam update: moments, bias correction, parameter move. Mutates both.
void adam_step(ParamVector& params, AdamState& state, std::span<const double> grad,
               const AdamConfig& config);

// Bias-corrected direction Adam WOULD take for this gradient at this state,
// without mutating anything. adam_step's parameter delta is -lr times this.
std::vector<double> adam_direction(std::span<const double> grad,
                                   const AdamState& state, const AdamConfig& config);

struct Checkpoint {
    int epoch_index = 0;  // 1-based
    double avg_lr = 0.0;
    ParamVector params;
    AdamState adam_state;
};

struct TrainingTrajectory {
    std::vector<Checkpoint> checkpoints;

    nlohmann::json to_json() const;
    static TrainingTrajectory from_json(const nlohmann::json& j);
};

enum class OptimizerKind { kSgd, kAdam };

struct TrainOptions {
    AdamConfig adam;  // learning_rate doubles as the SGD step size
    OptimizerKind optimizer = OptimizerKind::kAdam;
    int epochs = 3;
    int batch_size = 1;
    // "constant" keeps learning_rate throughout; "linear" uses per-epoch
    // constants lr * (T - i + 1)/T so epoch averages stay exact.
    std::string lr_schedule = "constant";
};

// Per-example (or mini-batch mean) updates in shuffled order, one checkpoint
// per epoch carrying end-of-epoch params, optimizer moments, and the epoch's
// average learning rate.
TrainingTrajectory train_epochs(const ClassifierSpec& spec, const ParamVector& params0,
                                std::span<const LabeledExample> dataset,
                                const TrainOptions& options, RngStream& rng);

}  // namespace igsyn
