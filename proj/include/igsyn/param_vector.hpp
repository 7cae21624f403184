#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace igsyn {

struct Segment {
    std::size_t offset = 0;
    std::size_t length = 0;

    bool operator==(const Segment&) const = default;
};

// Flat 64-bit parameter storage with a named segment map. Segments are
// pairwise disjoint and cover [0, size()) exactly; all values stay finite.
class ParamVector {
public:
    ParamVector() = default;
    ParamVector(std::vector<double> values, std::map<std::string, Segment> segments);

    static ParamVector zeros(const std::map<std::string, Segment>& segments);

    std::size_t size() const { return values_.size(); }
    std::span<const double> values() const { return values_; }
    std::span<double> mutable_values() { return values_; }
    const std::map<std::string, Segment>& segments() const { return segments_; }

    std::span<const double> segment(const std::string& name) const;
    std::span<double> mutable_segment(const std::string& name);

    // Re-validates finiteness; call after writing through mutable views when
    // the values came from outside the library.
    void check_finite() const;

    bool operator==(const ParamVector&) const = default;

    // Versioned JSON object {version, segments, values}.
    nlohmann::json to_json() const;
    static ParamVector from_json(const nlohmann::json& j);

private:
    void validate() const;

    std::vector<double> values_;
    std::map<std::string, Segment> segments_;
};

}  // namespace igsyn
