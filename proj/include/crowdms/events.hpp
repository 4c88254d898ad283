#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "crowdms/value.hpp"

namespace crowdms {

enum class EventType {
  ProjectCreated,
  FunctionCreated,
  MicrotaskGenerated,
  MicrotaskAssigned,
  MicrotaskSkipped,
  MicrotaskExpired,
  SubmissionReceived,
  ReviewRecorded,
  ContributionApplied,
  ReworkRequested,
  IssueOpened,
  IssueResolved,
  FunctionCompleted,
  QuestionPosted,
  AnswerPosted,
  NotificationEmitted,
  ScoreAwarded,
  ProjectPublished,
};

std::string_view to_string(EventType t);
std::optional<EventType> event_type_from(std::string_view name);

/// One immutable record of the project log. `batch` groups the events
/// appended by a single command; consumers see whole batches only.
struct ProjectEvent {
  std::int64_t sequence = 0;
  Timestamp timestamp = 0;
  std::int64_t batch = 0;
  EventType type = EventType::ProjectCreated;
  Value payload = Value::object();

  bool operator==(const ProjectEvent&) const = default;
};

void to_json(Value& j, const ProjectEvent& e);
void from_json(const Value& j, ProjectEvent& e);

/// One canonical-form line, no trailing newline.
std::string encode_event(const ProjectEvent& e);

}  // namespace crowdms
