#include "igsyn/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "igsyn/contract.hpp"
#include "igsyn/kernels.hpp"

namespace igsyn {

void AdamConfig::validate() const {
    IGSYN_REQUIRE(learning_rate > 0.0, "learning_rate must be positive");
    IGSYN_REQUIRE(beta1 >= 0.0 && beta1 < 1.0, "beta1 out of range");
    IGSYN_REQUIRE(beta2 >= 0.0 && beta2 < 1.0, "beta2 out of range");
    IGSYN_REQUIRE(eps_adam > 0.0, "eps_adam must be positive");
}

void sgd_step(ParamVector& params, std::span<const double> grad, double lr) {
    IGSYN_REQUIRE(grad.size() == params.size(), "gradient dimension mismatch");
    IGSYN_REQUIRE(lr > 0.0, "learning rate must be positive");
    kernels::axpy(-lr, grad.data(), params.mutable_values().data(), grad.size());
}

void adam_step(ParamVector& params, AdamState& state, std::span<const double> grad,
               const AdamConfig& config) {
    config.validate();
    std::size_t n = params.size();
    IGSYN_REQUIRE(grad.size() == n, "gradient dimension mismatch");
    IGSYN_REQUIRE(state.m.size() == n && state.v.size() == n,
                  "Adam state dimension mismatch");
    kernels::adam_moments(state.m.data(), state.v.data(), grad.data(), n,
                          config.beta1, config.beta2);
    state.step += 1;
    double inv_bc1 = 1.0 / (1.0 - std::pow(config.beta1, static_cast<double>(state.step)));
    double inv_bc2 = 1.0 / (1.0 - std::pow(config.beta2, static_cast<double>(state.step)));
    std::vector<double> dir(n);
    kernels::adam_direction(dir.data(), state.m.data(), state.v.data(), n,
                            inv_bc1, inv_bc2, config.eps_adam);
    kernels::axpy(-config.learning_rate, dir.data(), params.mutable_values().data(), n);
}

std::vector<double> adam_direction(std::span<const double> grad,
                                   const AdamState& state, const AdamConfig& config) {
    config.validate();
    std::size_t n = grad.size();
    IGSYN_REQUIRE(state.m.size() == n && state.v.size() == n,
                  "Adam state dimension mismatch");
    std::vector<double> m = state.m;
    std::vector<double> v = state.v;
    kernels::adam_moments(m.data(), v.data(), grad.data(), n, config.beta1, config.beta2);
    std::int64_t step = state.step + 1;
    double inv_bc1 = 1.0 / (1.0 - std::pow(config.beta1, static_cast<double>(step)));
    double inv_bc2 = 1.0 / (1.0 - std::pow(config.beta2, static_cast<double>(step)));
    std::vector<double> dir(n);
    kernels::adam_direction(dir.data(), m.data(), v.data(), n, inv_bc1, inv_bc2,
                            config.eps_adam);
    return dir;
}

nlohmann::json TrainingTrajectory::to_json() const {
    nlohmann::json epochs = nlohmann::json::array();
    for (const Checkpoint& ck : checkpoints) {
        epochs.push_back({{"i", ck.epoch_index},
                          {"avg_lr", ck.avg_lr},
                          {"params", ck.params.to_json()},
                          {"m", ck.adam_state.m},
                          {"v", ck.adam_state.v},
                          {"step", ck.adam_state.step}});
    }
    return nlohmann::json{{"version", 1}, {"epochs", std::move(epochs)}};
}

TrainingTrajectory TrainingTrajectory::from_json(const nlohmann::json& j) {
    IGSYN_REQUIRE(j.contains("version") && j.at("version").get<int>() == 1,
                  "unsupported trajectory version");
    TrainingTrajectory traj;
    int prev_index = 0;
    for (const auto& e : j.at("epochs")) {
        Checkpoint ck;
        ck.epoch_index = e.at("i").get<int>();
        ck.avg_lr = e.at("avg_lr").get<double>();
        ck.params = ParamVector::from_json(e.at("params"));
        ck.adam_state.m = e.at("m").get<std::vector<double>>();
        ck.adam_state.v = e.at("v").get<std::vector<double>>();
        ck.adam_state.step = e.at("step").get<std::int64_t>();
        IGSYN_REQUIRE(ck.avg_lr > 0.0, "checkpoint avg_lr must be positive");
        IGSYN_REQUIRE(ck.epoch_index > prev_index,
                      "checkpoint epoch indices must be strictly increasing");
        prev_index = ck.epoch_index;
        traj.checkpoints.push_back(std::move(ck));
    }
    IGSYN_REQUIRE(!traj.checkpoints.empty(), "trajectory must be non-empty");
    return traj;
}

TrainingTrajectory train_epochs(const ClassifierSpec& spec, const ParamVector& params0,
                                std::span<const LabeledExample> dataset,
                                const TrainOptions& options, RngStream& rng) {
    options.adam.validate();
    IGSYN_REQUIRE(options.epochs >= 1, "epochs must be >= 1");
    IGSYN_REQUIRE(!dataset.empty(), "dataset must be non-empty");
    IGSYN_REQUIRE(options.batch_size >= 1, "batch_size must be >= 1");
    IGSYN_REQUIRE(options.lr_schedule == "constant" || options.lr_schedule == "linear",
                  "unknown lr_schedule: " + options.lr_schedule);
    IGSYN_REQUIRE(params0.size() == spec.param_count(),
                  "initial params do not match classifier spec");

    ParamVector params = params0;
    AdamState state = AdamState::zeros(params.size());
    TrainingTrajectory traj;
    std::vector<std::size_t> order(dataset.size());
    std::iota(order.begin(), order.end(), 0);
    int T = options.epochs;

    for (int epoch = 1; epoch <= T; ++epoch) {
        double lr = options.adam.learning_rate;
        if (options.lr_schedule == "linear") {
            lr *= static_cast<double>(T - epoch + 1) / static_cast<double>(T);
        }
        // Fisher-Yates with the explicit stream; std::shuffle's use of the
        // engine is implementation-defined.
        for (std::size_t i = order.size(); i > 1; --i) {
            std::size_t k = rng.uniform_int(i);
            std::swap(order[i - 1], order[k]);
        }
        AdamConfig step_cfg = options.adam;
        step_cfg.learning_rate = lr;
        std::vector<double> batch_grad(params.size());
        for (std::size_t pos = 0; pos < order.size(); pos += options.batch_size) {
            std::size_t end = std::min(pos + options.batch_size, order.size());
            std::fill(batch_grad.begin(), batch_grad.end(), 0.0);
            for (std::size_t b = pos; b < end; ++b) {
                std::vector<double> g = grad(spec, params, dataset[order[b]]);
                kernels::axpy(1.0 / static_cast<double>(end - pos), g.data(),
                              batch_grad.data(), g.size());
            }
            if (options.optimizer == OptimizerKind::kAdam) {
                adam_step(params, state, batch_grad, step_cfg);
            } else {
                sgd_step(params, batch_grad, lr);
            }
        }
        Checkpoint ck;
        ck.epoch_index = epoch;
        ck.avg_lr = lr;  // constant within the epoch, so the average is exact
        ck.params = params;
        ck.adam_state = state;
        traj.checkpoints.push_back(std::move(ck));
    }
    return traj;
}

}  // namespace igsyn
