#pragma once

#include <deque>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "crowdms/events.hpp"
#include "crowdms/model.hpp"
#include "crowdms/policy.hpp"
#include "crowdms/scoring.hpp"

namespace crowdms {

/// FIFO of queued microtask ids; an id appears at most once.
class MicrotaskQueue {
 public:
  /// Throws WorkflowError(Conflict) on a duplicate id.
  void enqueue(const MicrotaskId& id);
  bool remove(const MicrotaskId& id);
  bool contains(const MicrotaskId& id) const { return members_.count(id) > 0; }
  std::size_t size() const { return order_.size(); }
  bool empty() const { return order_.empty(); }
  const std::deque<MicrotaskId>& items() const { return order_; }

  bool operator==(const MicrotaskQueue& o) const { return order_ == o.order_; }

 private:
  std::deque<MicrotaskId> order_;
  std::set<MicrotaskId> members_;
};

struct ReviewRecord {
  MicrotaskId microtaskId;
  ReviewDecision decision;
  WorkerId implementerWorkerId;
  std::string clientToken;
  std::int64_t sequence = 0;
  bool operator==(const ReviewRecord&) const = default;
};

struct PublicationRecord {
  std::string location;
  std::string contentHash;
  std::string target;
  Timestamp timestamp = 0;
  bool operator==(const PublicationRecord&) const = default;
};

/// Id counters; every generated id is `prefix + (counter + 1)`.
struct IdCounters {
  int functions = 0;
  int microtasks = 0;
  int submissions = 0;
  int assignments = 0;
  int issues = 0;
  int questions = 0;
  int answers = 0;
  int notifications = 0;
  bool operator==(const IdCounters&) const = default;
};

/// Everything known about one project; a pure fold of its event log.
struct ProjectState {
  std::string projectId;
  bool created = false;
  std::string clientId;
  ClientRequest request;
  AssignmentPolicy policy;

  std::map<FunctionId, FunctionArtifact> functions;
  std::vector<FunctionId> functionOrder;
  std::map<MicrotaskId, Microtask> microtasks;
  std::set<MicrotaskId> live;
  MicrotaskQueue queue;
  std::map<WorkerId, MicrotaskId> activeAssignments;
  /// worker -> (skipped microtask -> other assignments still to go before it is eligible again)
  std::map<WorkerId, std::map<MicrotaskId, int>> skipCooldowns;
  std::map<SubmissionId, Submission> submissions;
  std::vector<ReviewRecord> reviews;
  std::map<IssueId, Issue> issues;
  std::vector<Question> questions;
  std::vector<Answer> answers;
  std::vector<Notification> notifications;
  ScoreLedger scores;
  std::vector<PublicationRecord> publications;

  IdCounters counters;
  std::int64_t lastSequence = 0;
  std::int64_t lastBatch = 0;
  Timestamp clock = 0;

  const FunctionArtifact* find_function(const FunctionId& id) const;
  const FunctionArtifact* find_function_by_name(const std::string& name) const;
  const Microtask* find_assignment(const AssignmentId& id) const;
  const Microtask* live_microtask_for(const FunctionId& id) const;
  AdtRegistry adts() const { return make_registry(request.adts); }

  bool operator==(const ProjectState&) const = default;
};

/// Applies one event. Throws WorkflowError(Corrupt) when the event references
/// unknown entities or carries a malformed payload.
void apply_event(ProjectState& state, const ProjectEvent& event);

ProjectState fold(const std::vector<ProjectEvent>& events);

void to_json(Value& j, const ProjectState& s);
void from_json(const Value& j, ProjectState& s);

/// Per-function lifecycle and live-microtask summary.
struct ProjectStatus {
  struct FunctionStatus {
    FunctionId id;
    std::string name;
    FunctionState state;
    int liveMicrotasks = 0;
  };
  std::vector<FunctionStatus> functions;
  int liveMicrotasks = 0;
  int queued = 0;
  bool complete = false;
};

ProjectStatus project_status(const ProjectState& state);
void to_json(Value& j, const ProjectStatus& s);

}  // namespace crowdms
