#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "igsyn/param_vector.hpp"
#include "igsyn/rng.hpp"

namespace igsyn {

struct LabeledExample {
    std::vector<double> features;
    int label = 0;
};

// Softmax classifier over class logits; hidden_dim == 0 means a plain linear
// map, otherwise one tanh hidden layer.
struct ClassifierSpec {
    int input_dim = 0;
    int hidden_dim = 0;
    int class_count = 0;

    std::size_t param_count() const;
    std::map<std::string, Segment> segment_map() const;
    ParamVector init_params(RngStream& rng, double scale = 0.1) const;
};

// Numerically stable in-place softmax; the result sums to 1.
void softmax_inplace(std::span<double> logits);

double loss(const ClassifierSpec& spec, const ParamVector& params,
            const LabeledExample& example);
std::vector<double> grad(const ClassifierSpec& spec, const ParamVector& params,
                         const LabeledExample& example);
// Class probabilities, for evaluation.
std::vector<double> predict(const ClassifierSpec& spec, const ParamVector& params,
                            std::span<const double> features);

// Autoregressive token policy conditioned on a fixed-dimension context vector.
// Logits at position t are an affine map of [context | position one-hot |
// previous-token one-hot] (the token block is zero at t = 0).
struct PolicySpec {
    int vocab_size = 0;
    int rubric_length = 0;
    int context_dim = 0;

    int input_dim() const { return context_dim + rubric_length + vocab_size; }
    std::size_t param_count() const;
    std::map<std::string, Segment> segment_map() const;
    ParamVector init_params() const;  // zeros: the uniform reference policy
};

struct PolicyEval {
    std::vector<double> logprobs;             // one per position, of the given token
    std::vector<std::vector<double>> dists;   // one categorical per position
};

PolicyEval policy_logprobs(const PolicySpec& spec, const ParamVector& params,
                           std::span<const double> context,
                           std::span<const int> tokens);

struct PolicySample {
    std::vector<int> tokens;
    std::vector<double> behavior_logprobs;  // under the temperature-scaled policy
};

PolicySample policy_sample(const PolicySpec& spec, const ParamVector& params,
                           std::span<const double> context, double temperature,
                           RngStream& rng);

// Gradient of sum_t log pi(token_t | prefix) w.r.t. params, same layout.
std::vector<double> policy_grad_logprob(const PolicySpec& spec,
                                        const ParamVector& params,
                                        std::span<const double> context,
                                        std::span<const int> tokens);

// Low-level pieces for custom per-token objectives (policy updates build
// arbitrary dlogits and push them through the shared affine map).
void policy_input(const PolicySpec& spec, std::span<const double> context,
                  int position, int prev_token, std::span<double> out);
void policy_logits(const PolicySpec& spec, const ParamVector& params,
                   std::span<const double> input, std::span<double> out);
void policy_accumulate_logit_grad(const PolicySpec& spec,
                                  std::span<const double> input,
                                  std::span<const double> dlogits,
                                  std::span<double> grad_out);

}  // namespace igsyn
