#include "crowdms/engine.hpp"

#include <algorithm>
#include <set>

#include "crowdms/event_batch.hpp"

namespace crowdms {
namespace {

bool blank(const std::string& s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); });
}

void emit_new_ifb(EventBatch& batch, const FunctionId& function, std::optional<std::string> feedback = {}) {
  Microtask m;
  m.id = batch.microtask_id();
  m.kind = MicrotaskKind::ImplementFunctionBehavior;
  m.functionId = function;
  m.reworkFeedback = std::move(feedback);
  m.createdAt = batch.now();
  batch.emit(EventType::MicrotaskGenerated, {{"microtask", m}});
}

ValidationResult validate_payload(const ProjectState& state, const FunctionArtifact& fn, const SubmissionPayload& p) {
  ValidationResult out;
  switch (p.kind) {
    case PayloadKind::IssueReport:
      if (blank(p.issueText)) out.add("payload.issueText", "issue report requires text");
      break;
    case PayloadKind::MarkComplete:
      if (!p.code.empty() || !p.testsAdded.empty() || !p.stubsAdded.empty() || !p.newFunctions.empty())
        out.add("payload", "MarkComplete carries no code changes");
      break;
    case PayloadKind::BehaviorContribution: {
      std::set<std::string> ids;
      for (std::size_t i = 0; i < p.testsAdded.size(); ++i) {
        const auto& t = p.testsAdded[i];
        const std::string path = "payload.testsAdded[" + std::to_string(i) + "]";
        if (!t.id.empty() && !ids.insert(t.id).second) out.add(path, "duplicate test id '" + t.id + "'");
        if (t.kind == TestCase::Kind::IoPair) {
          if (!t.inputs.is_array()) {
            out.add(path, "inputs must be a list");
          } else if (t.inputs.size() != fn.signature.params.size()) {
            out.add(path, "expected " + std::to_string(fn.signature.params.size()) + " inputs, got " +
                              std::to_string(t.inputs.size()));
          }
        } else if (blank(t.source)) {
          out.add(path, "code test requires source");
        }
      }
      std::set<std::string> keys;
      for (std::size_t i = 0; i < p.stubsAdded.size(); ++i) {
        const auto& s = p.stubsAdded[i];
        const std::string path = "payload.stubsAdded[" + std::to_string(i) + "]";
        if (!is_identifier(s.calleeName)) out.add(path, "callee '" + s.calleeName + "' is not an identifier");
        if (!s.argumentTuple.is_array()) {
          out.add(path, "argumentTuple must be a list");
          continue;
        }
        if (!keys.insert(s.key()).second) out.add(path, "duplicate stub for " + s.calleeName);
      }
      const auto adts = state.adts();
      std::set<std::string> names;
      for (std::size_t i = 0; i < p.newFunctions.size(); ++i) {
        const auto& nf = p.newFunctions[i];
        const std::string path = "payload.newFunctions[" + std::to_string(i) + "]";
        if (!is_identifier(nf.name)) out.add(path, "function name '" + nf.name + "' is not an identifier");
        if (state.find_function_by_name(nf.name) || !names.insert(nf.name).second)
          out.add(path, "function '" + nf.name + "' already exists");
        if (blank(nf.description)) out.add(path, "description required");
        validate_signature(nf.signature, adts, path, out);
      }
      break;
    }
  }
  return out;
}

}  // namespace

std::vector<ProjectEvent> init_project(const std::string& projectId, const std::string& clientId,
                                       const ClientRequest& request, const AssignmentPolicy& policy, Timestamp now) {
  auto result = validate_client_request(request);
  if (!result.ok())
    throw WorkflowError(ErrorCode::Validation, "invalid client request", std::move(result.violations));
  validate_policy(policy);

  ProjectState empty;
  EventBatch batch(empty, now);
  batch.emit(EventType::ProjectCreated,
             {{"projectId", projectId}, {"clientId", clientId}, {"request", request}, {"policy", policy}});
  std::vector<FunctionId> ids;
  for (const auto& ep : request.endpoints) {
    FunctionArtifact f;
    f.id = batch.function_id();
    f.name = ep.functionName;
    f.description = ep.description;
    f.signature = ep.signature;
    batch.emit(EventType::FunctionCreated, {{"function", f}});
    ids.push_back(f.id);
  }
  for (const auto& id : ids) emit_new_ifb(batch, id);
  return batch.take();
}

std::vector<ProjectEvent> handle_ifb_submission(const ProjectState& state, const IfbSubmission& in, Timestamp now) {
  const auto& m = require_held(state, in.assignmentId, in.workerId, now);
  if (m.kind != MicrotaskKind::ImplementFunctionBehavior)
    throw WorkflowError(ErrorCode::Validation, "assignment " + in.assignmentId + " is a Review; submit a rating");
  const auto& fn = state.functions.at(m.functionId);
  if (fn.state != FunctionState::AwaitingWork)
    throw WorkflowError(ErrorCode::Conflict, "function " + fn.name + " is " + std::string(to_string(fn.state)));
  auto check = validate_payload(state, fn, in.payload);
  if (!check.ok()) throw WorkflowError(ErrorCode::Validation, "invalid submission", std::move(check.violations));

  EventBatch batch(state, now);
  Submission sub;
  sub.id = batch.submission_id();
  sub.microtaskId = m.id;
  sub.workerId = in.workerId;
  sub.functionId = fn.id;
  sub.payload = in.payload;
  sub.testReport = in.testReport;
  sub.baseVersion = fn.version;
  sub.baseCode = fn.code;
  sub.clientToken = in.clientToken;
  int n = 0;
  for (auto& t : sub.payload.testsAdded) {
    ++n;
    if (t.id.empty()) t.id = sub.id + ".t" + std::to_string(n);
    if (t.authorWorkerId.empty()) t.authorWorkerId = in.workerId;
  }
  for (auto& s : sub.payload.stubsAdded)
    if (s.authorWorkerId.empty()) s.authorWorkerId = in.workerId;
  batch.emit(EventType::SubmissionReceived, {{"submission", sub}});

  if (in.payload.kind == PayloadKind::IssueReport) {
    Issue issue{batch.issue_id(), fn.id, in.workerId, in.payload.issueText, false};
    batch.emit(EventType::IssueOpened, {{"issue", issue}, {"microtaskId", m.id}});
    return batch.take();
  }

  Microtask review;
  review.id = batch.microtask_id();
  review.kind = MicrotaskKind::Review;
  review.functionId = fn.id;
  review.submissionId = sub.id;
  review.createdAt = now;
  batch.emit(EventType::MicrotaskGenerated, {{"microtask", review}});

  for (const auto& nf : in.payload.newFunctions) {
    FunctionArtifact f;
    f.id = batch.function_id();
    f.name = nf.name;
    f.description = nf.description;
    f.signature = nf.signature;
    f.creator = in.workerId;
    batch.emit(EventType::FunctionCreated, {{"function", f}});
    emit_new_ifb(batch, f.id);
  }
  return batch.take();
}

std::vector<ProjectEvent> handle_review_submission(const ProjectState& state, const ReviewSubmission& in,
                                                   Timestamp now) {
  const auto& m = require_held(state, in.assignmentId, in.workerId, now);
  if (m.kind != MicrotaskKind::Review)
    throw WorkflowError(ErrorCode::Validation, "assignment " + in.assignmentId + " is not a Review");
  if (in.stars < 1 || in.stars > 5)
    throw WorkflowError(ErrorCode::Validation, "stars must be in [1,5]", {{"stars", "out of range"}});
  if (in.stars <= 3 && blank(in.feedback))
    throw WorkflowError(ErrorCode::Validation, "feedback is required for ratings of 3 stars or fewer",
                        {{"feedback", "required when stars <= 3"}});

  const auto& sub = state.submissions.at(*m.submissionId);
  const auto& fn = state.functions.at(sub.functionId);
  ReviewDecision decision{sub.id, in.workerId, in.stars, in.feedback};

  EventBatch batch(state, now);
  batch.emit(EventType::ReviewRecorded, {{"microtaskId", m.id},
                                         {"decision", decision},
                                         {"outcome", decision.accepted() ? "Accepted" : "NeedsRevision"},
                                         {"implementerWorkerId", sub.workerId},
                                         {"clientToken", in.clientToken}});
  batch.emit(EventType::ContributionApplied,
             {{"functionId", fn.id}, {"submissionId", sub.id}, {"version", fn.version + 1}});
  batch.emit(EventType::ScoreAwarded, {{"workerId", sub.workerId},
                                       {"points", points_for({AwardReason::ImplementerAward, in.stars})},
                                       {"reason", "ImplementerAward"},
                                       {"stars", in.stars},
                                       {"submissionId", sub.id}});
  batch.emit(EventType::ScoreAwarded, {{"workerId", in.workerId},
                                       {"points", points_for({AwardReason::ReviewerAward, 0})},
                                       {"reason", "ReviewerAward"},
                                       {"submissionId", sub.id}});

  Notification note;
  note.recipient = sub.workerId;
  note.kind = NotificationKind::ReviewReceived;
  note.stars = in.stars;
  note.feedback = in.feedback;
  note.functionId = fn.id;

  if (decision.accepted()) {
    note.id = batch.notification_id();
    batch.emit(EventType::NotificationEmitted, {{"notification", note}});
    if (sub.payload.kind == PayloadKind::MarkComplete)
      batch.emit(EventType::FunctionCompleted, {{"functionId", fn.id}});
    else
      emit_new_ifb(batch, fn.id);
  } else {
    batch.emit(EventType::ReworkRequested, {{"functionId", fn.id}, {"submissionId", sub.id}, {"feedback", in.feedback}});
    emit_new_ifb(batch, fn.id, in.feedback);
    note.id = batch.notification_id();
    batch.emit(EventType::NotificationEmitted, {{"notification", note}});
  }
  return batch.take();
}

std::vector<ProjectEvent> resolve_issue(const ProjectState& state, const IssueId& issueId, const Principal& caller,
                                        const IssueResolution& resolution, Timestamp now) {
  if (caller.role != Role::Client || (!state.clientId.empty() && caller.id != state.clientId))
    throw WorkflowError(ErrorCode::Forbidden, "only the project client may resolve issues");
  auto it = state.issues.find(issueId);
  if (it == state.issues.end()) throw WorkflowError(ErrorCode::NotFound, "unknown issue " + issueId);
  if (it->second.resolved) throw WorkflowError(ErrorCode::Conflict, "issue " + issueId + " is already resolved");
  const auto& fn = state.functions.at(it->second.functionId);

  const std::string description = resolution.description.value_or(fn.description);
  const Signature signature = resolution.signature.value_or(fn.signature);
  ValidationResult check;
  if (blank(description)) check.add("description", "description required");
  validate_signature(signature, state.adts(), "signature", check);
  if (!check.ok()) throw WorkflowError(ErrorCode::Validation, "invalid resolution", std::move(check.violations));

  EventBatch batch(state, now);
  batch.emit(EventType::IssueResolved,
             {{"issueId", issueId}, {"functionId", fn.id}, {"description", description}, {"signature", signature}});
  emit_new_ifb(batch, fn.id);
  Notification note;
  note.id = batch.notification_id();
  note.recipient = it->second.reporterWorkerId;
  note.kind = NotificationKind::IssueResolved;
  note.functionId = fn.id;
  batch.emit(EventType::NotificationEmitted, {{"notification", note}});
  return batch.take();
}

std::vector<ProjectEvent> post_question(const ProjectState& state, const WorkerId& author, const std::string& text,
                                        Timestamp now) {
  if (blank(text)) throw WorkflowError(ErrorCode::Validation, "question text required", {{"text", "empty"}});
  EventBatch batch(state, now);
  Question q{batch.question_id(), author, text, now};
  batch.emit(EventType::QuestionPosted, {{"question", q}});
  return batch.take();
}

std::vector<ProjectEvent> post_answer(const ProjectState& state, const std::string& questionId,
                                      const WorkerId& author, const std::string& text, Timestamp now) {
  bool known = std::any_of(state.questions.begin(), state.questions.end(),
                           [&](const Question& q) { return q.id == questionId; });
  if (!known) throw WorkflowError(ErrorCode::NotFound, "unknown question " + questionId);
  if (blank(text)) throw WorkflowError(ErrorCode::Validation, "answer text required", {{"text", "empty"}});
  EventBatch batch(state, now);
  Answer a{batch.answer_id(), questionId, author, text, now};
  batch.emit(EventType::AnswerPosted, {{"answer", a}});
  return batch.take();
}

std::vector<ProjectEvent> record_publication(const ProjectState& state, const PublicationRecord& record,
                                             Timestamp now) {
  EventBatch batch(state, now);
  batch.emit(EventType::ProjectPublished,
             {{"location", record.location}, {"contentHash", record.contentHash}, {"target", record.target}});
  return batch.take();
}

// ---------------------------------------------------------------------------

Project Project::create(const std::string& projectId, const std::string& clientId, const ClientRequest& request,
                        const AssignmentPolicy& policy, Timestamp now) {
  Project p;
  p.commit(init_project(projectId, clientId, request, policy, now));
  return p;
}

Project Project::replay(std::vector<ProjectEvent> log) {
  Project p;
  for (const auto& e : log) apply_event(p.state_, e);
  p.log_ = std::move(log);
  return p;
}

Project Project::resume(ProjectState snapshot, std::vector<ProjectEvent> log) {
  Project p;
  p.state_ = std::move(snapshot);
  for (const auto& e : log)
    if (e.sequence > p.state_.lastSequence) apply_event(p.state_, e);
  p.log_ = std::move(log);
  return p;
}

const std::vector<ProjectEvent>& Project::commit(std::vector<ProjectEvent> batch) {
  for (const auto& e : batch) apply_event(state_, e);
  log_.insert(log_.end(), batch.begin(), batch.end());
  lastBatch_ = std::move(batch);
  return lastBatch_;
}

std::vector<ProjectEvent> Project::advance(Timestamp now) { return commit(tick(state_, now)); }

std::optional<AssignmentView> Project::fetch(const WorkerId& worker, Timestamp now) {
  advance(now);
  auto outcome = crowdms::fetch(state_, worker, now);
  commit(std::move(outcome.events));
  return outcome.assignment;
}

void Project::skip(const AssignmentId& assignment, const WorkerId& worker, Timestamp now) {
  advance(now);
  commit(crowdms::skip(state_, assignment, worker, now));
}

SubmissionId Project::submit(const IfbSubmission& submission, Timestamp now) {
  advance(now);
  const auto& batch = commit(handle_ifb_submission(state_, submission, now));
  return batch.front().payload.at("submission").at("id").get<std::string>();
}

void Project::review(const ReviewSubmission& review, Timestamp now) {
  advance(now);
  commit(handle_review_submission(state_, review, now));
}

void Project::resolve(const IssueId& issue, const Principal& caller, const IssueResolution& resolution,
                      Timestamp now) {
  advance(now);
  commit(resolve_issue(state_, issue, caller, resolution, now));
}

std::vector<ProjectEvent> Project::events_after(std::int64_t sequence) const {
  auto it = std::find_if(log_.begin(), log_.end(), [&](const ProjectEvent& e) { return e.sequence > sequence; });
  return {it, log_.end()};
}

}  // namespace crowdms
