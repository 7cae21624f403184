#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "igsyn/model.hpp"
#include "igsyn/rng.hpp"

namespace igsyn {

struct EnvConfig {
    int topic_count = 8;    // D
    int feature_dim = 16;   // d
    int vocab = 16;         // V
    int rubric_length = 4;  // L; tokens 0-3 carry the semantics
    std::vector<int> validation_topics = {0, 1, 2};
    std::vector<double> noise_grid = {0.05, 0.2, 0.5, 1.0};
    std::vector<double> flip_grid = {0.0, 0.25, 0.5, 1.0};
    std::uint64_t master_seed = 42;
    int seed_count = 800;
    int val_size = 60;
    int test_size = 120;

    // Dimension of the policy conditioning vector: topic one-hot plus a
    // scalar noise summary.
    int context_dim() const { return topic_count + 1; }
};

struct SeedDocument {
    int id = 0;
    int topic = 0;
    std::vector<double> surface_noise;  // dim d
    std::vector<double> context;        // dim D+1
};

enum class FocusMode { kSeedTopic = 0, kShiftPlusOne = 1, kRandomTopic = 2,
                       kValidationAligned = 3 };

struct RubricSpec {
    FocusMode focus_mode = FocusMode::kSeedTopic;
    double noise_level = 0.0;
    double flip_prob = 0.0;
    bool format_ok = true;
};

struct SyntheticExample {
    std::string id;  // assigned when pooled/serialized
    std::vector<double> features;
    int label = 0;
    bool wellformed = true;
    int seed_id = 0;
    std::vector<int> rubric_tokens;

    LabeledExample as_labeled() const { return LabeledExample{features, label}; }
};

struct ValidityResult {
    bool valid = false;
    std::string reason;  // first failing check: formatting | non-triviality | safety
};

struct Corpus {
    std::vector<SeedDocument> seeds;
    std::vector<LabeledExample> valset;   // labels drawn from validation_topics
    std::vector<LabeledExample> testset;  // same distribution, disjoint stream
};

// Topic-vector world: fixed unit prototypes per topic, seed documents that
// carry a topic plus surface noise, and a generator whose output quality is
// verifiably controlled by the rubric tokens.
class Environment {
public:
    explicit Environment(EnvConfig config);

    const EnvConfig& config() const { return config_; }
    std::span<const double> prototype(int topic) const;

    Corpus gen_corpus(std::uint64_t seed) const;

    RubricSpec decode_rubric(std::span<const int> tokens) const;

    SyntheticExample generate(const SeedDocument& seed_doc,
                              std::span<const int> tokens, RngStream& rng) const;

    ValidityResult validity(const SyntheticExample& example) const;

private:
    EnvConfig config_;
    std::vector<std::vector<double>> prototypes_;  // D unit vectors, dim d
};

}  // namespace igsyn
