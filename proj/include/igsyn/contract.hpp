#pragma once

#include <stdexcept>
#include <string>

namespace igsyn {

// Thrown on any violated operation precondition (dimension mismatches,
// out-of-range tokens, malformed configs).
class ContractError : public std::invalid_argument {
public:
    explicit ContractError(const std::string& what) : std::invalid_argument(what) {}
};

}  // namespace igsyn

#define IGSYN_REQUIRE(cond, msg)                      \
    do {                                              \
        if (!(cond)) throw ::igsyn::ContractError(msg); \
    } while (0)
