#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "igsyn/env.hpp"
#include "igsyn/grpo.hpp"
#include "igsyn/influence.hpp"

namespace igsyn {

// Round-trippable, locale-independent double formatting for CSV output.
std::string format_double(double v);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

// Dataset records: {id, features, label, wellformed, provenance}.
nlohmann::json dataset_record(const SyntheticExample& ex);
SyntheticExample parse_dataset_record(const nlohmann::json& j);
void write_dataset_jsonl(const std::string& path,
                         std::span<const SyntheticExample> dataset);
std::vector<SyntheticExample> read_dataset_jsonl(const std::string& path);

// Corpus exports (write-only; pipelines regenerate corpora from config).
void write_corpus_files(const std::string& dir, const Corpus& corpus,
                        const Environment& env);

// One rollout log line: {update_idx, seed_id, tokens, valid, raw_if, if_norm,
// reward, advantage}.
struct RolloutRow {
    int update_idx = 0;
    int seed_id = 0;
    std::vector<int> tokens;
    int valid = 0;
    double raw_if = 0.0;
    double if_norm = 0.0;
    double reward = 0.0;
    double advantage = 0.0;
};

void write_rollouts_jsonl(const std::string& path, std::span<const RolloutRow> rows);

// CSV {update_idx, mean_reward, mean_if, kl, entropy, clip_frac}.
void write_stats_csv(const std::string& path, std::span<const GrpoStats> curve);

// CSV {candidate_id, raw_score, normalized_score, variant, trajectory_id}.
void write_influence_csv(const std::string& path,
                         std::span<const InfluenceRecord> records,
                         const std::string& variant, const std::string& trajectory_id);

}  // namespace igsyn
