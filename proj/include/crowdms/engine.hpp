#pragma once

#include <optional>
#include <string>
#include <vector>

#include "crowdms/scheduler.hpp"
#include "crowdms/state.hpp"

namespace crowdms {

enum class Role { Client, Worker };

struct Principal {
  Role role = Role::Worker;
  std::string id;
};

struct IfbSubmission {
  AssignmentId assignmentId;
  WorkerId workerId;
  SubmissionPayload payload;
  Value testReport;  // optional TestRunReport the worker last saw
  std::string clientToken;
};

struct ReviewSubmission {
  AssignmentId assignmentId;
  WorkerId workerId;
  int stars = 0;
  std::string feedback;
  std::string clientToken;
};

struct IssueResolution {
  std::optional<std::string> description;
  std::optional<Signature> signature;
};

// Command handlers: pure (state, command) -> events. None of them mutate the
// state; callers append the returned batch to the log and fold it.

/// Throws WorkflowError(Validation) carrying the request's violations.
std::vector<ProjectEvent> init_project(const std::string& projectId, const std::string& clientId,
                                       const ClientRequest& request, const AssignmentPolicy& policy, Timestamp now);

std::vector<ProjectEvent> handle_ifb_submission(const ProjectState& state, const IfbSubmission& submission,
                                                Timestamp now);

std::vector<ProjectEvent> handle_review_submission(const ProjectState& state, const ReviewSubmission& review,
                                                   Timestamp now);

std::vector<ProjectEvent> resolve_issue(const ProjectState& state, const IssueId& issue, const Principal& caller,
                                        const IssueResolution& resolution, Timestamp now);

std::vector<ProjectEvent> post_question(const ProjectState& state, const WorkerId& author, const std::string& text,
                                        Timestamp now);

std::vector<ProjectEvent> post_answer(const ProjectState& state, const std::string& questionId,
                                      const WorkerId& author, const std::string& text, Timestamp now);

std::vector<ProjectEvent> record_publication(const ProjectState& state, const PublicationRecord& record,
                                             Timestamp now);

/// A project's log plus its folded state. Every command first expires and
/// warns overdue assignments as of `now` (its own batch), then runs.
/// Not thread-safe; the service serializes commands per project.
class Project {
 public:
  static Project create(const std::string& projectId, const std::string& clientId, const ClientRequest& request,
                        const AssignmentPolicy& policy, Timestamp now);
  static Project replay(std::vector<ProjectEvent> log);
  /// Resumes from a snapshot plus the events after it.
  static Project resume(ProjectState snapshot, std::vector<ProjectEvent> log);

  const ProjectState& state() const { return state_; }
  const std::vector<ProjectEvent>& log() const { return log_; }

  /// Appends one batch and folds it. Returns the batch.
  const std::vector<ProjectEvent>& commit(std::vector<ProjectEvent> batch);

  std::vector<ProjectEvent> advance(Timestamp now);
  std::optional<AssignmentView> fetch(const WorkerId& worker, Timestamp now);
  void skip(const AssignmentId& assignment, const WorkerId& worker, Timestamp now);
  SubmissionId submit(const IfbSubmission& submission, Timestamp now);
  void review(const ReviewSubmission& review, Timestamp now);
  void resolve(const IssueId& issue, const Principal& caller, const IssueResolution& resolution, Timestamp now);

  /// Events appended since the given sequence (exclusive).
  std::vector<ProjectEvent> events_after(std::int64_t sequence) const;

 private:
  ProjectState state_;
  std::vector<ProjectEvent> log_;
  std::vector<ProjectEvent> lastBatch_;
};

}  // namespace crowdms
