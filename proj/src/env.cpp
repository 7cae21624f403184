#include "igsyn/env.hpp"

#include <algorithm>
#include <cmath>

#include "igsyn/contract.hpp"
#include "igsyn/kernels.hpp"

namespace igsyn {

Environment::Environment(EnvConfig config) : config_(std::move(config)) {
    IGSYN_REQUIRE(config_.topic_count >= 2, "topic_count must be >= 2");
    IGSYN_REQUIRE(config_.feature_dim >= 1, "feature_dim must be >= 1");
    IGSYN_REQUIRE(config_.vocab >= 4, "vocab must be >= 4");
    IGSYN_REQUIRE(config_.rubric_length >= 4,
                  "rubric_length must be >= 4 (tokens 0-3 carry semantics)");
    IGSYN_REQUIRE(!config_.validation_topics.empty(),
                  "validation_topics must be non-empty");
    for (int t : config_.validation_topics) {
        IGSYN_REQUIRE(t >= 0 && t < config_.topic_count,
                      "validation topic out of range");
    }
    IGSYN_REQUIRE(!config_.noise_grid.empty(), "noise_grid must be non-empty");
    for (double n : config_.noise_grid) {
        IGSYN_REQUIRE(n >= 0.0, "noise levels must be non-negative");
    }
    IGSYN_REQUIRE(!config_.flip_grid.empty(), "flip_grid must be non-empty");
    for (double f : config_.flip_grid) {
        IGSYN_REQUIRE(f >= 0.0 && f <= 1.0, "flip probabilities must be in [0,1]");
    }
    IGSYN_REQUIRE(config_.seed_count >= 1 && config_.val_size >= 1 &&
                      config_.test_size >= 1,
                  "corpus sizes must be positive");

    // Fixed pseudo-random unit prototypes, one per topic.
    RngStream proto_rng(derive_seed(config_.master_seed, "prototypes"));
    prototypes_.reserve(config_.topic_count);
    for (int k = 0; k < config_.topic_count; ++k) {
        std::vector<double> mu(config_.feature_dim);
        double norm = 0.0;
        while (norm < 1e-12) {  // astronomically unlikely to loop
            for (double& x : mu) x = proto_rng.normal();
            norm = std::sqrt(kernels::sumsq(mu.data(), mu.size()));
        }
        for (double& x : mu) x /= norm;
        prototypes_.push_back(std::move(mu));
    }
}

std::span<const double> Environment::prototype(int topic) const {
    IGSYN_REQUIRE(topic >= 0 && topic < config_.topic_count, "topic out of range");
    return prototypes_[topic];
}

Corpus Environment::gen_corpus(std::uint64_t seed) const {
    Corpus corpus;
    const int d = config_.feature_dim;

    RngStream seed_rng(derive_seed(seed, "seed-docs"));
    corpus.seeds.reserve(config_.seed_count);
    for (int i = 0; i < config_.seed_count; ++i) {
        SeedDocument doc;
        doc.id = i;
        doc.topic = static_cast<int>(seed_rng.uniform_int(config_.topic_count));
        doc.surface_noise.resize(d);
        double mean = 0.0;
        for (double& x : doc.surface_noise) {
            x = 0.1 * seed_rng.normal();
            mean += x;
        }
        mean /= static_cast<double>(d);
        doc.context.assign(config_.context_dim(), 0.0);
        doc.context[doc.topic] = 1.0;
        doc.context[config_.topic_count] = mean;
        corpus.seeds.push_back(std::move(doc));
    }

    auto draw_eval = [&](RngStream& rng, int count, std::vector<LabeledExample>& out) {
        out.reserve(count);
        for (int i = 0; i < count; ++i) {
            int topic = config_.validation_topics[i % config_.validation_topics.size()];
            LabeledExample ex;
            ex.label = topic;
            ex.features.resize(d);
            for (int j = 0; j < d; ++j) {
                ex.features[j] = prototypes_[topic][j] + 0.1 * rng.normal();
            }
            out.push_back(std::move(ex));
        }
    };
    RngStream val_rng(derive_seed(seed, "valset"));
    draw_eval(val_rng, config_.val_size, corpus.valset);
    RngStream test_rng(derive_seed(seed, "testset"));
    draw_eval(test_rng, config_.test_size, corpus.testset);
    return corpus;
}

RubricSpec Environment::decode_rubric(std::span<const int> tokens) const {
    IGSYN_REQUIRE(static_cast<int>(tokens.size()) == config_.rubric_length,
                  "rubric token count mismatch");
    for (int t : tokens) {
        IGSYN_REQUIRE(t >= 0 && t < config_.vocab, "rubric token out of range");
    }
    RubricSpec spec;
    spec.focus_mode = static_cast<FocusMode>(tokens[0] % 4);
    spec.noise_level = config_.noise_grid[tokens[1] % config_.noise_grid.size()];
    spec.flip_prob = config_.flip_grid[tokens[2] % config_.flip_grid.size()];
    spec.format_ok = tokens[3] < config_.vocab / 2;
    return spec;
}

SyntheticExample Environment::generate(const SeedDocument& seed_doc,
                                       std::span<const int> tokens,
                                       RngStream& rng) const {
    RubricSpec rubric = decode_rubric(tokens);
    const int D = config_.topic_count;
    int k = seed_doc.topic;
    switch (rubric.focus_mode) {
        case FocusMode::kSeedTopic:
            break;
        case FocusMode::kShiftPlusOne:
            k = (seed_doc.topic + 1) % D;
            break;
        case FocusMode::kRandomTopic:
            k = static_cast<int>(rng.uniform_int(D));
            break;
        case FocusMode::kValidationAligned:
            k = config_.validation_topics[rng.uniform_int(
                config_.validation_topics.size())];
            break;
    }
    SyntheticExample ex;
    ex.seed_id = seed_doc.id;
    ex.rubric_tokens.assign(tokens.begin(), tokens.end());
    ex.features.resize(config_.feature_dim);
    for (int j = 0; j < config_.feature_dim; ++j) {
        ex.features[j] = prototypes_[k][j] + rubric.noise_level * rng.normal();
    }
    ex.label = k;
    if (rubric.flip_prob > 0.0 && rng.uniform() < rubric.flip_prob) {
        // Uniformly random *other* class.
        int other = static_cast<int>(rng.uniform_int(D - 1));
        ex.label = other >= k ? other + 1 : other;
    }
    ex.wellformed = rubric.format_ok;
    return ex;
}

ValidityResult Environment::validity(const SyntheticExample& example) const {
    if (!example.wellformed) return {false, "formatting"};
    double norm = std::sqrt(
        kernels::sumsq(example.features.data(), example.features.size()));
    if (!(norm > 1e-9)) return {false, "non-triviality"};
    if (example.label < 0 || example.label >= config_.topic_count) {
        return {false, "safety"};
    }
    return {true, ""};
}

}  // namespace igsyn
