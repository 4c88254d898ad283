#include "crowdms/event_log.hpp"

#include <fstream>
#include <istream>
#include <ostream>

namespace crowdms {

void write_events(std::ostream& out, const std::vector<ProjectEvent>& events) {
  for (const auto& e : events) out << encode_event(e) << '\n';
}

std::vector<ProjectEvent> read_events(std::istream& in) {
  std::vector<ProjectEvent> events;
  std::string line;
  std::int64_t expected = 1;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      events.push_back(parse_value(line).get<ProjectEvent>());
    } catch (const std::exception& e) {
      throw LogCorruptError(expected, e.what());
    }
    expected = events.back().sequence + 1;
  }
  return events;
}

void save_log(const std::filesystem::path& path, const std::vector<ProjectEvent>& events) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw WorkflowError(ErrorCode::Io, "cannot write " + path.string());
  write_events(out, events);
  if (!out) throw WorkflowError(ErrorCode::Io, "write failed for " + path.string());
}

std::vector<ProjectEvent> load_log(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw WorkflowError(ErrorCode::Io, "cannot read " + path.string());
  return read_events(in);
}

void to_json(Value& j, const InvariantViolation& v) {
  j = Value{{"sequence", v.sequence}, {"invariant", v.invariant}, {"message", v.message}};
}

// ---------------------------------------------------------------------------

void InvariantChecker::violation(std::int64_t seq, std::string invariant, std::string message) {
  violations_.push_back({seq, std::move(invariant), std::move(message)});
}

void InvariantChecker::observe(const ProjectEvent& e) {
  if (e.batch != tally_.batch) {
    if (tally_.batch >= 0) close_batch();
    if (e.batch < tally_.batch) violation(e.sequence, "batch-order", "batch number decreased");
    tally_ = BatchTally{};
    tally_.batch = e.batch;
  }
  tally_.lastSequence = e.sequence;

  if (e.sequence != lastSequence_ + 1)
    violation(e.sequence, "sequence", "expected sequence " + std::to_string(lastSequence_ + 1) + ", got " +
                                          std::to_string(e.sequence));
  lastSequence_ = e.sequence;

  try {
    apply_event(state_, e);
  } catch (const WorkflowError& ex) {
    throw LogCorruptError(e.sequence, ex.what());
  }
  ++events_;

  const auto& p = e.payload;
  switch (e.type) {
    case EventType::SubmissionReceived:
      if (p.at("submission").at("payload").at("kind") == "IssueReport")
        ++counts_.issueSubmissions;
      else
        ++counts_.nonIssueIfbSubmissions;
      break;
    case EventType::MicrotaskGenerated:
      if (p.at("microtask").at("kind") == "Review")
        ++counts_.reviewsGenerated;
      else
        ++tally_.ifbGenerated[p.at("microtask").at("functionId").get<std::string>()];
      break;
    case EventType::ReviewRecorded: {
      ++counts_.reviewsRecorded;
      ++tally_.reviewsRecorded;
      const auto decision = p.at("decision").get<ReviewDecision>();
      const auto& sub = state_.submissions.at(decision.submissionId);
      if (decision.accepted() && sub.payload.kind != PayloadKind::MarkComplete)
        tally_.acceptedContinuation = sub.functionId;
      if (!state_.policy.selfReviewAllowed && decision.reviewerWorkerId == sub.workerId)
        violation(e.sequence, "self-review", "worker " + sub.workerId + " reviewed their own submission " + sub.id);
      break;
    }
    case EventType::ContributionApplied:
      ++counts_.contributionsApplied;
      ++tally_.contributionsApplied;
      break;
    case EventType::ScoreAwarded: {
      const int points = p.at("points").get<int>();
      if (p.at("reason") == "ReviewerAward") {
        ++counts_.reviewerAwards;
        ++tally_.reviewerAwards;
        if (points != kReviewerPoints) violation(e.sequence, "score-range", "reviewer award of " + std::to_string(points));
      } else {
        const int stars = p.value("stars", 0);
        if (stars < 1 || stars > 5 || points != kPointsPerStar * stars)
          violation(e.sequence, "score-range",
                    "implementer award of " + std::to_string(points) + " for " + std::to_string(stars) + " stars");
      }
      break;
    }
    default:
      break;
  }
  check_prefix(e);
}

void InvariantChecker::check_prefix(const ProjectEvent& e) {
  std::map<FunctionId, int> live;
  std::map<WorkerId, int> held;
  for (const auto& id : state_.live) {
    const auto& m = state_.microtasks.at(id);
    ++live[m.functionId];
    const bool queued = state_.queue.contains(id);
    bool assigned = false;
    if (m.state == MicrotaskState::Assigned && m.assignee) {
      ++held[*m.assignee];
      auto it = state_.activeAssignments.find(*m.assignee);
      assigned = it != state_.activeAssignments.end() && it->second == id;
    }
    const int places = int(queued) + int(assigned) + int(m.state == MicrotaskState::Submitted);
    if (places != 1 || (queued != (m.state == MicrotaskState::Queued)))
      violation(e.sequence, "no-lost-microtask", "microtask " + id + " is in " + std::to_string(places) + " places");
  }
  for (const auto& [fid, n] : live) {
    if (n > 1) violation(e.sequence, "locking", "function " + fid + " has " + std::to_string(n) + " live microtasks");
    const auto* f = state_.find_function(fid);
    if (f && f->state != FunctionState::AwaitingWork)
      violation(e.sequence, "locking", "function " + fid + " is " + std::string(to_string(f->state)) +
                                           " but has a live microtask");
  }
  for (const auto& [w, n] : held)
    if (n > 1) violation(e.sequence, "single-assignment", "worker " + w + " holds " + std::to_string(n) + " assignments");
  counts_.maxConcurrentAssignments =
      std::max<std::int64_t>(counts_.maxConcurrentAssignments, static_cast<std::int64_t>(state_.activeAssignments.size()));
}

void InvariantChecker::close_batch() {
  const auto seq = tally_.lastSequence;
  for (const auto& [fid, f] : state_.functions) {
    if (f.state != FunctionState::AwaitingWork) continue;
    if (!state_.live_microtask_for(fid))
      violation(seq, "locking", "function " + fid + " awaits work but has no live microtask");
  }
  if (counts_.reviewsGenerated != counts_.nonIssueIfbSubmissions)
    violation(seq, "conservation", "reviews generated " + std::to_string(counts_.reviewsGenerated) +
                                       " != non-issue submissions " + std::to_string(counts_.nonIssueIfbSubmissions));
  if (tally_.reviewsRecorded != tally_.contributionsApplied || tally_.reviewsRecorded != tally_.reviewerAwards)
    violation(seq, "conservation", "batch " + std::to_string(tally_.batch) + " records " +
                                       std::to_string(tally_.reviewsRecorded) + " reviews but applies " +
                                       std::to_string(tally_.contributionsApplied) + " contributions and " +
                                       std::to_string(tally_.reviewerAwards) + " reviewer awards");
  if (tally_.acceptedContinuation) {
    auto it = tally_.ifbGenerated.find(*tally_.acceptedContinuation);
    if (it == tally_.ifbGenerated.end() || it->second != 1)
      violation(seq, "chaining", "accepted review of " + *tally_.acceptedContinuation +
                                     " was not followed by exactly one new implement microtask");
  }
}

void InvariantChecker::finish() {
  if (tally_.batch >= 0) close_batch();
  tally_ = BatchTally{};
}

ReplayReport replay_events(const std::vector<ProjectEvent>& events) {
  InvariantChecker checker;
  for (const auto& e : events) checker.observe(e);
  checker.finish();
  return {checker.state(), checker.violations(), checker.counts(), checker.events()};
}

}  // namespace crowdms
