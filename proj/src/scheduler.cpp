#include "crowdms/scheduler.hpp"

#include <algorithm>

#include "crowdms/event_batch.hpp"

namespace crowdms {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

void enqueue(MicrotaskQueue& queue, const Microtask& microtask) {
  if (microtask.state != MicrotaskState::Queued)
    throw WorkflowError(ErrorCode::Validation, "only Queued microtasks can be enqueued");
  queue.enqueue(microtask.id);
}

std::vector<MicrotaskId> eligible_microtasks(const ProjectState& state, const WorkerId& worker) {
  const std::map<MicrotaskId, int>* cooldown = nullptr;
  if (auto it = state.skipCooldowns.find(worker); it != state.skipCooldowns.end()) cooldown = &it->second;

  std::vector<MicrotaskId> out;
  for (const auto& id : state.queue.items()) {
    const auto& m = state.microtasks.at(id);
    if (cooldown && cooldown->count(id)) continue;
    if (m.kind == MicrotaskKind::Review && !state.policy.selfReviewAllowed) {
      const auto& sub = state.submissions.at(*m.submissionId);
      if (sub.workerId == worker) continue;
    }
    out.push_back(id);
  }
  return out;
}

FetchOutcome fetch(const ProjectState& state, const WorkerId& worker, Timestamp now) {
  if (worker.empty()) throw WorkflowError(ErrorCode::Validation, "worker id required");
  if (auto it = state.activeAssignments.find(worker); it != state.activeAssignments.end())
    throw WorkflowError(ErrorCode::Conflict, "worker " + worker + " already holds assignment " +
                                                 state.microtasks.at(it->second).assignmentId.value_or(""));
  const auto eligible = eligible_microtasks(state, worker);
  if (eligible.empty()) return {};

  std::size_t pick = 0;
  if (state.policy.mode == AssignmentMode::Random) {
    const auto draw = splitmix64(state.policy.seed + static_cast<std::uint64_t>(state.counters.assignments));
    pick = static_cast<std::size_t>(draw % eligible.size());
  }

  EventBatch batch(state, now);
  AssignmentView view{batch.assignment_id(), eligible[pick], worker, now + state.policy.timeLimit};
  batch.emit(EventType::MicrotaskAssigned, {{"microtaskId", view.microtaskId},
                                            {"assignmentId", view.assignmentId},
                                            {"workerId", worker},
                                            {"deadline", view.deadline}});
  return {view, batch.take()};
}

const Microtask& require_held(const ProjectState& state, const AssignmentId& id, const WorkerId& worker,
                              Timestamp now) {
  const Microtask* m = state.find_assignment(id);
  if (!m) throw WorkflowError(ErrorCode::StaleAssignment, "assignment " + id + " is not live");
  if (m->assignee != worker)
    throw WorkflowError(ErrorCode::StaleAssignment, "assignment " + id + " is not held by " + worker);
  if (now >= m->deadline) throw WorkflowError(ErrorCode::StaleAssignment, "assignment " + id + " has expired");
  return *m;
}

std::vector<ProjectEvent> skip(const ProjectState& state, const AssignmentId& assignment, const WorkerId& worker,
                               Timestamp now) {
  const auto& m = require_held(state, assignment, worker, now);
  EventBatch batch(state, now);
  batch.emit(EventType::MicrotaskSkipped, {{"microtaskId", m.id}, {"assignmentId", assignment}, {"workerId", worker}});
  return batch.take();
}

std::vector<ProjectEvent> tick(const ProjectState& state, Timestamp now) {
  std::vector<const Microtask*> due;
  for (const auto& [worker, mid] : state.activeAssignments) {
    const auto& m = state.microtasks.at(mid);
    const bool warn = !m.warned && now - m.assignedAt >= state.policy.warningAt;
    if (warn || now >= m.deadline) due.push_back(&m);
  }
  if (due.empty()) return {};
  std::sort(due.begin(), due.end(), [](const Microtask* a, const Microtask* b) {
    if (a->assignedAt != b->assignedAt) return a->assignedAt < b->assignedAt;
    return a->id < b->id;
  });

  EventBatch batch(state, now);
  for (const Microtask* m : due) {
    if (!m->warned && now - m->assignedAt >= state.policy.warningAt) {
      Notification n;
      n.id = batch.notification_id();
      n.recipient = *m->assignee;
      n.kind = NotificationKind::TimeWarning;
      n.assignmentId = *m->assignmentId;
      n.functionId = m->functionId;
      batch.emit(EventType::NotificationEmitted, {{"notification", n}, {"microtaskId", m->id}});
    }
    if (now >= m->deadline) {
      batch.emit(EventType::MicrotaskExpired,
                 {{"microtaskId", m->id}, {"assignmentId", *m->assignmentId}, {"workerId", *m->assignee}});
    }
  }
  return batch.take();
}

}  // namespace crowdms
