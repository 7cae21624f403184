#include "igsyn/io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "igsyn/contract.hpp"

namespace igsyn {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_text_file(const std::string& path, const std::string& content) {
    std::filesystem::path p(path);
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    std::ofstream out(path, std::ios::binary);
    IGSYN_REQUIRE(out.good(), "cannot open for writing: " + path);
    out << content;
    IGSYN_REQUIRE(out.good(), "write failed: " + path);
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    IGSYN_REQUIRE(in.good(), "cannot open: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

nlohmann::json dataset_record(const SyntheticExample& ex) {
    return {{"id", ex.id},
            {"features", ex.features},
            {"label", ex.label},
            {"wellformed", ex.wellformed},
            {"provenance", {{"seed_id", ex.seed_id}, {"tokens", ex.rubric_tokens}}}};
}

SyntheticExample parse_dataset_record(const nlohmann::json& j) {
    SyntheticExample ex;
    ex.id = j.at("id").get<std::string>();
    ex.features = j.at("features").get<std::vector<double>>();
    ex.label = j.at("label").get<int>();
    ex.wellformed = j.at("wellformed").get<bool>();
    const auto& prov = j.at("provenance");
    ex.seed_id = prov.at("seed_id").get<int>();
    ex.rubric_tokens = prov.at("tokens").get<std::vector<int>>();
    return ex;
}

void write_dataset_jsonl(const std::string& path,
                         std::span<const SyntheticExample> dataset) {
    std::string out;
    for (const SyntheticExample& ex : dataset) {
        out += dataset_record(ex).dump();
        out += '\n';
    }
    write_text_file(path, out);
}

std::vector<SyntheticExample> read_dataset_jsonl(const std::string& path) {
    std::ifstream in(path);
    IGSYN_REQUIRE(in.good(), "cannot open: " + path);
    std::vector<SyntheticExample> dataset;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        dataset.push_back(parse_dataset_record(nlohmann::json::parse(line)));
    }
    return dataset;
}

void write_corpus_files(const std::string& dir, const Corpus& corpus,
                        const Environment& env) {
    std::filesystem::create_directories(dir);
    const int d = env.config().feature_dim;
    std::string seeds_out;
    for (const SeedDocument& doc : corpus.seeds) {
        std::vector<double> features(d);
        std::span<const double> mu = env.prototype(doc.topic);
        for (int j = 0; j < d; ++j) features[j] = mu[j] + doc.surface_noise[j];
        nlohmann::json rec = {{"id", "seed-" + std::to_string(doc.id)},
                              {"features", features},
                              {"label", doc.topic},
                              {"wellformed", true},
                              {"provenance", {{"kind", "seed"}}}};
        seeds_out += rec.dump();
        seeds_out += '\n';
    }
    write_text_file(dir + "/seeds.jsonl", seeds_out);

    auto write_eval = [&](const std::string& path, const std::string& prefix,
                          std::span<const LabeledExample> examples) {
        std::string out;
        for (std::size_t i = 0; i < examples.size(); ++i) {
            nlohmann::json rec = {{"id", prefix + "-" + std::to_string(i)},
                                  {"features", examples[i].features},
                                  {"label", examples[i].label},
                                  {"wellformed", true},
                                  {"provenance", {{"kind", prefix}}}};
            out += rec.dump();
            out += '\n';
        }
        write_text_file(path, out);
    };
    write_eval(dir + "/valset.jsonl", "val", corpus.valset);
    write_eval(dir + "/testset.jsonl", "test", corpus.testset);
}

void write_rollouts_jsonl(const std::string& path, std::span<const RolloutRow> rows) {
    std::string out;
    for (const RolloutRow& row : rows) {
        nlohmann::json rec = {{"update_idx", row.update_idx},
                              {"seed_id", row.seed_id},
                              {"tokens", row.tokens},
                              {"valid", row.valid},
                              {"raw_if", row.raw_if},
                              {"if_norm", row.if_norm},
                              {"reward", row.reward},
                              {"advantage", row.advantage}};
        out += rec.dump();
        out += '\n';
    }
    write_text_file(path, out);
}

void write_stats_csv(const std::string& path, std::span<const GrpoStats> curve) {
    std::string out = "update_idx,mean_reward,mean_if,kl,entropy,clip_frac\n";
    for (std::size_t i = 0; i < curve.size(); ++i) {
        const GrpoStats& s = curve[i];
        out += std::to_string(i);
        out += ',';
        out += format_double(s.mean_reward);
        out += ',';
        out += format_double(s.mean_if);
        out += ',';
        out += format_double(s.kl);
        out += ',';
        out += format_double(s.entropy);
        out += ',';
        out += format_double(s.clip_frac);
        out += '\n';
    }
    write_text_file(path, out);
}

void write_influence_csv(const std::string& path,
                         std::span<const InfluenceRecord> records,
                         const std::string& variant,
                         const std::string& trajectory_id) {
    std::string out = "candidate_id,raw_score,normalized_score,variant,trajectory_id\n";
    for (const InfluenceRecord& rec : records) {
        out += rec.candidate_id;
        out += ',';
        out += format_double(rec.raw_score);
        out += ',';
        out += rec.normalized_score ? format_double(*rec.normalized_score) : "";
        out += ',';
        out += variant;
        out += ',';
        out += trajectory_id;
        out += '\n';
    }
    write_text_file(path, out);
}

}  // namespace igsyn
