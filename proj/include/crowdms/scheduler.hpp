#pragma once

#include <optional>
#include <vector>

#include "crowdms/state.hpp"

namespace crowdms {

struct AssignmentView {
  AssignmentId assignmentId;
  MicrotaskId microtaskId;
  WorkerId workerId;
  Timestamp deadline = 0;
  bool operator==(const AssignmentView&) const = default;
};

struct FetchOutcome {
  std::optional<AssignmentView> assignment;  // nullopt means NoneAvailable
  std::vector<ProjectEvent> events;
};

/// Adds a Queued microtask at the tail. Throws WorkflowError(Conflict) on a
/// duplicate id and WorkflowError(Validation) if the microtask is not Queued.
void enqueue(MicrotaskQueue& queue, const Microtask& microtask);

/// Queued microtasks `worker` may receive, in queue order. Excludes reviews
/// of the worker's own submissions (unless the policy allows self review) and
/// microtasks still inside the worker's skip cooldown.
std::vector<MicrotaskId> eligible_microtasks(const ProjectState& state, const WorkerId& worker);

/// Assigns the first (Fifo) or a seeded-uniform (Random) eligible microtask.
/// Throws WorkflowError(Conflict) if the worker already holds an assignment.
FetchOutcome fetch(const ProjectState& state, const WorkerId& worker, Timestamp now);

/// Returns a held assignment to the tail of the queue, discarding any work.
/// Throws WorkflowError(StaleAssignment) unless `worker` holds it and it has not expired.
std::vector<ProjectEvent> skip(const ProjectState& state, const AssignmentId& assignment, const WorkerId& worker,
                               Timestamp now);

/// Emits a one-time warning for assignments past warningAt and expires those
/// past the time limit, ordered by assignment time. Idempotent for a given now.
std::vector<ProjectEvent> tick(const ProjectState& state, Timestamp now);

/// Finds the live assignment `id` held by `worker`; throws StaleAssignment otherwise.
const Microtask& require_held(const ProjectState& state, const AssignmentId& id, const WorkerId& worker,
                              Timestamp now);

}  // namespace crowdms
