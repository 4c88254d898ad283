#include "crowdms/policy.hpp"

#include <cmath>

namespace crowdms {

void validate_policy(const AssignmentPolicy& policy) {
  std::vector<Violation> v;
  if (policy.timeLimit <= 0) v.push_back({"assignment.timeLimitMinutes", "must be positive"});
  if (policy.warningAt >= policy.timeLimit)
    v.push_back({"assignment.warningAtMinutes", "must be less than the time limit"});
  if (policy.warningAt < 0) v.push_back({"assignment.warningAtMinutes", "must be non-negative"});
  if (policy.skipCooldown < 0) v.push_back({"assignment.skipCooldown", "must be non-negative"});
  if (!v.empty()) throw WorkflowError(ErrorCode::Validation, "invalid assignment policy", std::move(v));
}

AssignmentPolicy policy_from_config(const Value& config) {
  AssignmentPolicy p;
  const Value* a = &config;
  if (config.is_object() && config.contains("assignment")) a = &config.at("assignment");
  if (!a->is_object()) return p;
  try {
    if (a->contains("mode")) {
      const auto mode = a->at("mode").get<std::string>();
      if (mode == "fifo" || mode == "Fifo") {
        p.mode = AssignmentMode::Fifo;
      } else if (mode == "random" || mode == "Random") {
        p.mode = AssignmentMode::Random;
      } else {
        throw WorkflowError(ErrorCode::Validation, "unknown assignment.mode '" + mode + "'");
      }
    }
    if (a->contains("seed")) p.seed = a->at("seed").get<std::uint64_t>();
    if (a->contains("timeLimitMinutes")) p.timeLimit = minutes(a->at("timeLimitMinutes").get<double>());
    if (a->contains("warningAtMinutes")) p.warningAt = minutes(a->at("warningAtMinutes").get<double>());
    if (a->contains("selfReviewAllowed")) p.selfReviewAllowed = a->at("selfReviewAllowed").get<bool>();
    if (a->contains("skipCooldown")) p.skipCooldown = a->at("skipCooldown").get<int>();
  } catch (const nlohmann::json::exception& e) {
    throw WorkflowError(ErrorCode::Validation, std::string("bad assignment config: ") + e.what());
  }
  validate_policy(p);
  return p;
}

void to_json(Value& j, const AssignmentPolicy& p) {
  j = Value{{"mode", p.mode == AssignmentMode::Fifo ? "fifo" : "random"},
            {"seed", p.seed},
            {"selfReviewAllowed", p.selfReviewAllowed},
            {"skipCooldown", p.skipCooldown},
            {"timeLimitSeconds", p.timeLimit},
            {"warningAtSeconds", p.warningAt}};
}

void from_json(const Value& j, AssignmentPolicy& p) {
  p = AssignmentPolicy{};
  const auto mode = j.value("mode", std::string("fifo"));
  if (mode != "fifo" && mode != "random")
    throw WorkflowError(ErrorCode::Validation, "assignment mode must be fifo or random", {{"mode", mode}});
  p.mode = mode == "random" ? AssignmentMode::Random : AssignmentMode::Fifo;
  p.seed = j.value("seed", std::uint64_t{0});
  p.selfReviewAllowed = j.value("selfReviewAllowed", false);
  p.skipCooldown = j.value("skipCooldown", 1);
  p.timeLimit = j.value("timeLimitSeconds", minutes(15));
  p.warningAt = j.value("warningAtSeconds", minutes(14));
}

}  // namespace crowdms
