#pragma once

#include <optional>
#include <set>
#include <string>
#include <string_view>

namespace crowdms::labels {

// Ground-truth annotations carried inside opaque simulated source text:
//   // @behavior <behaviorId>
//   // @defect <defectId> affects <behaviorId> [<behaviorId> ...]
// and in oracle code tests:
//   @checks <behaviorId>

std::set<std::string> behaviors(std::string_view source);
std::set<std::string> defective(std::string_view source);
std::optional<std::string> checked_behavior(std::string_view testSource);

/// Implemented and not broken by any defect.
bool behavior_passes(std::string_view source, const std::string& behaviorId);

}  // namespace crowdms::labels
