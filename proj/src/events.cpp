#include "crowdms/events.hpp"

#include <array>

#include "crowdms/error.hpp"

namespace crowdms {
namespace {

constexpr std::array<std::pair<EventType, std::string_view>, 18> kNames{{
    {EventType::ProjectCreated, "ProjectCreated"},
    {EventType::FunctionCreated, "FunctionCreated"},
    {EventType::MicrotaskGenerated, "MicrotaskGenerated"},
    {EventType::MicrotaskAssigned, "MicrotaskAssigned"},
    {EventType::MicrotaskSkipped, "MicrotaskSkipped"},
    {EventType::MicrotaskExpired, "MicrotaskExpired"},
    {EventType::SubmissionReceived, "SubmissionReceived"},
    {EventType::ReviewRecorded, "ReviewRecorded"},
    {EventType::ContributionApplied, "ContributionApplied"},
    {EventType::ReworkRequested, "ReworkRequested"},
    {EventType::IssueOpened, "IssueOpened"},
    {EventType::IssueResolved, "IssueResolved"},
    {EventType::FunctionCompleted, "FunctionCompleted"},
    {EventType::QuestionPosted, "QuestionPosted"},
    {EventType::AnswerPosted, "AnswerPosted"},
    {EventType::NotificationEmitted, "NotificationEmitted"},
    {EventType::ScoreAwarded, "ScoreAwarded"},
    {EventType::ProjectPublished, "ProjectPublished"},
}};

}  // namespace

std::string_view to_string(EventType t) {
  for (const auto& [type, name] : kNames)
    if (type == t) return name;
  return "";
}

std::optional<EventType> event_type_from(std::string_view name) {
  for (const auto& [type, n] : kNames)
    if (n == name) return type;
  return std::nullopt;
}

void to_json(Value& j, const ProjectEvent& e) {
  j = Value{{"sequence", e.sequence},
            {"timestamp", e.timestamp},
            {"batch", e.batch},
            {"kind", to_string(e.type)},
            {"payload", e.payload}};
}

void from_json(const Value& j, ProjectEvent& e) {
  e = ProjectEvent{};
  j.at("sequence").get_to(e.sequence);
  j.at("timestamp").get_to(e.timestamp);
  e.batch = j.value("batch", std::int64_t{0});
  const auto kind = j.at("kind").get<std::string>();
  auto type = event_type_from(kind);
  if (!type) throw WorkflowError(ErrorCode::Corrupt, "unknown event kind '" + kind + "'");
  e.type = *type;
  e.payload = j.at("payload");
}

std::string encode_event(const ProjectEvent& e) { return canonicalize(Value(e)); }

}  // namespace crowdms
