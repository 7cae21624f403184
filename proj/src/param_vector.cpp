#include "igsyn/param_vector.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include <json.hpp>

#include "igsyn/contract.hpp"

namespace igsyn {

ParamVector::ParamVector(std::vector<double> values,
                         std::map<std::string, Segment> segments)
    : values_(std::move(values)), segments_(std::move(segments)) {
    validate();
}

ParamVector ParamVector::zeros(const std::map<std::string, Segment>& segments) {
    std::size_t total = 0;
    for (const auto& [name, seg] : segments) total += seg.length;
    return ParamVector(std::vector<double>(total, 0.0), segments);
}

std::span<const double> ParamVector::segment(const std::string& name) const {
    auto it = segments_.find(name);
    IGSYN_REQUIRE(it != segments_.end(), "unknown segment: " + name);
    return std::span<const double>(values_).subspan(it->second.offset, it->second.length);
}

std::span<double> ParamVector::mutable_segment(const std::string& name) {
    auto it = segments_.find(name);
    IGSYN_REQUIRE(it != segments_.end(), "unknown segment: " + name);
    return std::span<double>(values_).subspan(it->second.offset, it->second.length);
}

void ParamVector::check_finite() const {
    for (double v : values_) IGSYN_REQUIRE(std::isfinite(v), "non-finite parameter value");
}

void ParamVector::validate() const {
    check_finite();
    // Disjointness + exact cover of [0, size()).
    std::vector<std::pair<std::size_t, std::size_t>> ranges;
    ranges.reserve(segments_.size());
    for (const auto& [name, seg] : segments_) {
        IGSYN_REQUIRE(seg.offset + seg.length <= values_.size(),
                      "segment out of bounds: " + name);
        ranges.emplace_back(seg.offset, seg.length);
    }
    std::sort(ranges.begin(), ranges.end());
    std::size_t cursor = 0;
    for (const auto& [off, len] : ranges) {
        IGSYN_REQUIRE(off == cursor, "segments must tile the parameter vector");
        cursor = off + len;
    }
    IGSYN_REQUIRE(cursor == values_.size(), "segments must cover all values");
}

nlohmann::json ParamVector::to_json() const {
    nlohmann::json j;
    j["version"] = 1;
    nlohmann::json segs = nlohmann::json::object();
    for (const auto& [name, seg] : segments_) {
        segs[name] = {{"offset", seg.offset}, {"length", seg.length}};
    }
    j["segments"] = segs;
    j["values"] = values_;
    return j;
}

ParamVector ParamVector::from_json(const nlohmann::json& j) {
    IGSYN_REQUIRE(j.contains("version") && j["version"].get<int>() == 1,
                  "unsupported ParamVector version");
    std::map<std::string, Segment> segments;
    for (const auto& [name, seg] : j.at("segments").items()) {
        segments[name] = Segment{seg.at("offset").get<std::size_t>(),
                                 seg.at("length").get<std::size_t>()};
    }
    return ParamVector(j.at("values").get<std::vector<double>>(), std::move(segments));
}

}  // namespace igsyn
