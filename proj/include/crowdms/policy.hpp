#pragma once

#include <cstdint>

#include "crowdms/error.hpp"
#include "crowdms/value.hpp"

namespace crowdms {

enum class AssignmentMode { Fifo, Random };

struct AssignmentPolicy {
  AssignmentMode mode = AssignmentMode::Fifo;
  std::uint64_t seed = 0;
  bool selfReviewAllowed = false;
  int skipCooldown = 1;
  Timestamp timeLimit = minutes(15);
  Timestamp warningAt = minutes(14);

  bool operator==(const AssignmentPolicy&) const = default;
};

/// Throws WorkflowError(Validation) unless warningAt < timeLimit and the
/// cooldown is non-negative.
void validate_policy(const AssignmentPolicy& policy);

/// Reads the documented `assignment.*` keys from a project config value:
/// {"assignment": {"mode": "fifo"|"random", "seed", "timeLimitMinutes",
/// "warningAtMinutes", "selfReviewAllowed", "skipCooldown"}}. Missing keys keep defaults.
AssignmentPolicy policy_from_config(const Value& config);

void to_json(Value& j, const AssignmentPolicy& p);
void from_json(const Value& j, AssignmentPolicy& p);

}  // namespace crowdms
