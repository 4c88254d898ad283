#include "crowdms/state.hpp"

#include <algorithm>

namespace crowdms {

void MicrotaskQueue::enqueue(const MicrotaskId& id) {
  if (!members_.insert(id).second)
    throw WorkflowError(ErrorCode::Conflict, "microtask " + id + " is already queued");
  order_.push_back(id);
}

bool MicrotaskQueue::remove(const MicrotaskId& id) {
  if (members_.erase(id) == 0) return false;
  order_.erase(std::find(order_.begin(), order_.end(), id));
  return true;
}

const FunctionArtifact* ProjectState::find_function(const FunctionId& id) const {
  auto it = functions.find(id);
  return it == functions.end() ? nullptr : &it->second;
}

const FunctionArtifact* ProjectState::find_function_by_name(const std::string& name) const {
  for (const auto& [id, f] : functions)
    if (f.name == name) return &f;
  return nullptr;
}

const Microtask* ProjectState::find_assignment(const AssignmentId& id) const {
  for (const auto& [worker, mid] : activeAssignments) {
    const auto& m = microtasks.at(mid);
    if (m.assignmentId == id) return &m;
  }
  return nullptr;
}

const Microtask* ProjectState::live_microtask_for(const FunctionId& id) const {
  for (const auto& mid : live) {
    const auto& m = microtasks.at(mid);
    if (m.functionId == id) return &m;
  }
  return nullptr;
}

namespace {

[[noreturn]] void corrupt(const ProjectEvent& e, const std::string& what) {
  throw WorkflowError(ErrorCode::Corrupt,
                      "event " + std::to_string(e.sequence) + " (" + std::string(to_string(e.type)) + "): " + what);
}

template <typename Map>
auto& lookup(Map& map, const std::string& key, const ProjectEvent& e, const char* what) {
  auto it = map.find(key);
  if (it == map.end()) corrupt(e, std::string("unknown ") + what + " '" + key + "'");
  return it->second;
}

void retire(ProjectState& s, Microtask& m) {
  m.state = MicrotaskState::Retired;
  s.live.erase(m.id);
  s.queue.remove(m.id);
  if (m.assignee) {
    auto it = s.activeAssignments.find(*m.assignee);
    if (it != s.activeAssignments.end() && it->second == m.id) s.activeAssignments.erase(it);
  }
}

void requeue(ProjectState& s, Microtask& m, const WorkerId& worker) {
  m.state = MicrotaskState::Queued;
  m.assignee.reset();
  m.assignmentId.reset();
  m.warned = false;
  s.queue.enqueue(m.id);
  s.activeAssignments.erase(worker);
  if (s.policy.skipCooldown > 0) s.skipCooldowns[worker][m.id] = s.policy.skipCooldown;
}

void apply_contribution(FunctionArtifact& f, const Submission& sub, int version) {
  const auto& p = sub.payload;
  if (p.kind == PayloadKind::BehaviorContribution) {
    f.code = p.code;
    for (const auto& t : p.testsAdded) {
      auto it = std::find_if(f.tests.begin(), f.tests.end(), [&](const TestCase& x) { return x.id == t.id; });
      if (it != f.tests.end())
        *it = t;
      else
        f.tests.push_back(t);
    }
    for (const auto& stub : p.stubsAdded) {
      const auto key = stub.key();
      auto it = std::find_if(f.stubs.begin(), f.stubs.end(), [&](const Stub& x) { return x.key() == key; });
      if (it != f.stubs.end())
        *it = stub;
      else
        f.stubs.push_back(stub);
    }
  }
  f.version = version;
}

void apply(ProjectState& s, const ProjectEvent& e) {
  const Value& p = e.payload;
  switch (e.type) {
    case EventType::ProjectCreated:
      if (s.created) corrupt(e, "project already created");
      s.created = true;
      s.projectId = p.at("projectId").get<std::string>();
      s.clientId = p.value("clientId", std::string());
      s.request = p.at("request").get<ClientRequest>();
      s.policy = p.at("policy").get<AssignmentPolicy>();
      break;

    case EventType::FunctionCreated: {
      auto f = p.at("function").get<FunctionArtifact>();
      if (s.functions.count(f.id)) corrupt(e, "duplicate function " + f.id);
      s.functionOrder.push_back(f.id);
      s.functions.emplace(f.id, std::move(f));
      ++s.counters.functions;
      break;
    }

    case EventType::MicrotaskGenerated: {
      auto m = p.at("microtask").get<Microtask>();
      if (s.microtasks.count(m.id)) corrupt(e, "duplicate microtask " + m.id);
      lookup(s.functions, m.functionId, e, "function");
      m.state = MicrotaskState::Queued;
      m.createdAt = e.timestamp;
      if (m.kind == MicrotaskKind::Review) {
        if (!m.submissionId) corrupt(e, "review without submission");
        auto& sub = lookup(s.submissions, *m.submissionId, e, "submission");
        auto& ifb = lookup(s.microtasks, sub.microtaskId, e, "microtask");
        if (ifb.state == MicrotaskState::Submitted) retire(s, ifb);
      }
      s.queue.enqueue(m.id);
      s.live.insert(m.id);
      s.microtasks.emplace(m.id, std::move(m));
      ++s.counters.microtasks;
      break;
    }

    case EventType::MicrotaskAssigned: {
      auto& m = lookup(s.microtasks, p.at("microtaskId").get<std::string>(), e, "microtask");
      const auto worker = p.at("workerId").get<std::string>();
      if (m.state != MicrotaskState::Queued) corrupt(e, "microtask " + m.id + " is not queued");
      m.state = MicrotaskState::Assigned;
      m.assignee = worker;
      m.assignmentId = p.at("assignmentId").get<std::string>();
      m.assignedAt = e.timestamp;
      m.deadline = p.at("deadline").get<Timestamp>();
      m.warned = false;
      s.queue.remove(m.id);
      s.activeAssignments[worker] = m.id;
      ++s.counters.assignments;
      if (auto it = s.skipCooldowns.find(worker); it != s.skipCooldowns.end()) {
        auto& cd = it->second;
        cd.erase(m.id);
        for (auto c = cd.begin(); c != cd.end();) {
          if (--c->second <= 0)
            c = cd.erase(c);
          else
            ++c;
        }
        if (cd.empty()) s.skipCooldowns.erase(it);
      }
      break;
    }

    case EventType::MicrotaskSkipped:
    case EventType::MicrotaskExpired: {
      auto& m = lookup(s.microtasks, p.at("microtaskId").get<std::string>(), e, "microtask");
      if (m.state != MicrotaskState::Assigned) corrupt(e, "microtask " + m.id + " is not assigned");
      requeue(s, m, p.at("workerId").get<std::string>());
      break;
    }

    case EventType::SubmissionReceived: {
      auto sub = p.at("submission").get<Submission>();
      auto& m = lookup(s.microtasks, sub.microtaskId, e, "microtask");
      m.state = MicrotaskState::Submitted;
      s.activeAssignments.erase(sub.workerId);
      s.submissions.emplace(sub.id, std::move(sub));
      ++s.counters.submissions;
      break;
    }

    case EventType::IssueOpened: {
      auto issue = p.at("issue").get<Issue>();
      auto& f = lookup(s.functions, issue.functionId, e, "function");
      f.state = FunctionState::Halted;
      f.haltingIssue = issue.id;
      if (auto it = p.find("microtaskId"); it != p.end() && it->is_string())
        retire(s, lookup(s.microtasks, it->get<std::string>(), e, "microtask"));
      s.issues.emplace(issue.id, std::move(issue));
      ++s.counters.issues;
      break;
    }

    case EventType::ReviewRecorded: {
      ReviewRecord r;
      r.microtaskId = p.at("microtaskId").get<std::string>();
      r.decision = p.at("decision").get<ReviewDecision>();
      r.implementerWorkerId = p.value("implementerWorkerId", std::string());
      r.clientToken = p.value("clientToken", std::string());
      r.sequence = e.sequence;
      retire(s, lookup(s.microtasks, r.microtaskId, e, "microtask"));
      lookup(s.submissions, r.decision.submissionId, e, "submission").reviewed = true;
      s.reviews.push_back(std::move(r));
      break;
    }

    case EventType::ContributionApplied: {
      auto& f = lookup(s.functions, p.at("functionId").get<std::string>(), e, "function");
      const auto& sub = lookup(s.submissions, p.at("submissionId").get<std::string>(), e, "submission");
      apply_contribution(f, sub, p.at("version").get<int>());
      break;
    }

    case EventType::ReworkRequested:
      lookup(s.functions, p.at("functionId").get<std::string>(), e, "function");
      break;

    case EventType::IssueResolved: {
      auto& issue = lookup(s.issues, p.at("issueId").get<std::string>(), e, "issue");
      auto& f = lookup(s.functions, issue.functionId, e, "function");
      issue.resolved = true;
      f.description = p.at("description").get<std::string>();
      f.signature = p.at("signature").get<Signature>();
      f.state = FunctionState::AwaitingWork;
      f.haltingIssue.reset();
      if (f.is_endpoint()) {
        for (auto& ep : s.request.endpoints) {
          if (ep.functionName == f.name) {
            ep.description = f.description;
            ep.signature = f.signature;
          }
        }
      }
      break;
    }

    case EventType::FunctionCompleted:
      lookup(s.functions, p.at("functionId").get<std::string>(), e, "function").state = FunctionState::Completed;
      break;

    case EventType::QuestionPosted:
      s.questions.push_back(p.at("question").get<Question>());
      ++s.counters.questions;
      break;

    case EventType::AnswerPosted: {
      auto a = p.at("answer").get<Answer>();
      bool known = std::any_of(s.questions.begin(), s.questions.end(),
                               [&](const Question& q) { return q.id == a.questionId; });
      if (!known) corrupt(e, "answer to unknown question " + a.questionId);
      s.answers.push_back(std::move(a));
      ++s.counters.answers;
      break;
    }

    case EventType::NotificationEmitted: {
      auto n = p.at("notification").get<Notification>();
      if (n.kind == NotificationKind::TimeWarning) {
        if (auto it = p.find("microtaskId"); it != p.end())
          lookup(s.microtasks, it->get<std::string>(), e, "microtask").warned = true;
      }
      s.notifications.push_back(std::move(n));
      ++s.counters.notifications;
      break;
    }

    case EventType::ScoreAwarded:
      s.scores.record(p.at("workerId").get<std::string>(),
                      {e.sequence, p.at("points").get<int>(),
                       p.at("reason") == "ImplementerAward" ? AwardReason::ImplementerAward
                                                            : AwardReason::ReviewerAward,
                       p.value("stars", 0)});
      break;

    case EventType::ProjectPublished:
      s.publications.push_back({p.at("location").get<std::string>(), p.at("contentHash").get<std::string>(),
                                p.value("target", std::string()), e.timestamp});
      break;
  }
}

}  // namespace

void apply_event(ProjectState& state, const ProjectEvent& event) {
  if (!state.created && event.type != EventType::ProjectCreated)
    corrupt(event, "first event must be ProjectCreated");
  try {
    apply(state, event);
  } catch (const nlohmann::json::exception& ex) {
    corrupt(event, std::string("malformed payload: ") + ex.what());
  } catch (const WorkflowError& ex) {
    if (ex.code() == ErrorCode::Corrupt) throw;
    corrupt(event, ex.what());
  }
  state.lastSequence = event.sequence;
  state.lastBatch = event.batch;
  state.clock = std::max(state.clock, event.timestamp);
}

ProjectState fold(const std::vector<ProjectEvent>& events) {
  ProjectState s;
  for (const auto& e : events) apply_event(s, e);
  return s;
}

// ---------------------------------------------------------------------------

namespace {

template <typename Map>
Value map_values(const Map& m) {
  Value arr = Value::array();
  for (const auto& [k, v] : m) arr.push_back(v);
  return arr;
}

}  // namespace

void to_json(Value& j, const ProjectState& s) {
  Value reviews = Value::array();
  for (const auto& r : s.reviews)
    reviews.push_back({{"microtaskId", r.microtaskId},
                       {"decision", r.decision},
                       {"implementerWorkerId", r.implementerWorkerId},
                       {"clientToken", r.clientToken},
                       {"sequence", r.sequence}});
  Value cooldowns = Value::object();
  for (const auto& [w, m] : s.skipCooldowns) cooldowns[w] = m;
  Value pubs = Value::array();
  for (const auto& p : s.publications)
    pubs.push_back({{"location", p.location}, {"contentHash", p.contentHash}, {"target", p.target}, {"timestamp", p.timestamp}});
  j = Value{{"projectId", s.projectId},
            {"created", s.created},
            {"clientId", s.clientId},
            {"request", s.request},
            {"policy", s.policy},
            {"functions", map_values(s.functions)},
            {"functionOrder", s.functionOrder},
            {"microtasks", map_values(s.microtasks)},
            {"live", s.live},
            {"queue", s.queue.items()},
            {"activeAssignments", s.activeAssignments},
            {"skipCooldowns", cooldowns},
            {"submissions", map_values(s.submissions)},
            {"reviews", reviews},
            {"issues", map_values(s.issues)},
            {"questions", s.questions},
            {"answers", s.answers},
            {"notifications", s.notifications},
            {"scores", s.scores},
            {"publications", pubs},
            {"counters",
             {{"functions", s.counters.functions},
              {"microtasks", s.counters.microtasks},
              {"submissions", s.counters.submissions},
              {"assignments", s.counters.assignments},
              {"issues", s.counters.issues},
              {"questions", s.counters.questions},
              {"answers", s.counters.answers},
              {"notifications", s.counters.notifications}}},
            {"lastSequence", s.lastSequence},
            {"lastBatch", s.lastBatch},
            {"clock", s.clock}};
}

void from_json(const Value& j, ProjectState& s) {
  s = ProjectState{};
  s.projectId = j.at("projectId").get<std::string>();
  s.created = j.at("created").get<bool>();
  s.clientId = j.value("clientId", std::string());
  s.request = j.at("request").get<ClientRequest>();
  s.policy = j.at("policy").get<AssignmentPolicy>();
  for (const auto& f : j.at("functions")) {
    auto fa = f.get<FunctionArtifact>();
    s.functions.emplace(fa.id, std::move(fa));
  }
  s.functionOrder = j.at("functionOrder").get<std::vector<FunctionId>>();
  for (const auto& m : j.at("microtasks")) {
    auto mt = m.get<Microtask>();
    s.microtasks.emplace(mt.id, std::move(mt));
  }
  s.live = j.at("live").get<std::set<MicrotaskId>>();
  for (const auto& id : j.at("queue")) s.queue.enqueue(id.get<std::string>());
  s.activeAssignments = j.at("activeAssignments").get<std::map<WorkerId, MicrotaskId>>();
  for (auto it = j.at("skipCooldowns").begin(); it != j.at("skipCooldowns").end(); ++it)
    s.skipCooldowns[it.key()] = it.value().get<std::map<MicrotaskId, int>>();
  for (const auto& sub : j.at("submissions")) {
    auto x = sub.get<Submission>();
    s.submissions.emplace(x.id, std::move(x));
  }
  for (const auto& r : j.at("reviews"))
    s.reviews.push_back({r.at("microtaskId").get<std::string>(), r.at("decision").get<ReviewDecision>(),
                         r.at("implementerWorkerId").get<std::string>(), r.at("clientToken").get<std::string>(),
                         r.at("sequence").get<std::int64_t>()});
  for (const auto& i : j.at("issues")) {
    auto x = i.get<Issue>();
    s.issues.emplace(x.id, std::move(x));
  }
  s.questions = j.at("questions").get<std::vector<Question>>();
  s.answers = j.at("answers").get<std::vector<Answer>>();
  s.notifications = j.at("notifications").get<std::vector<Notification>>();
  s.scores = j.at("scores").get<ScoreLedger>();
  for (const auto& p : j.at("publications"))
    s.publications.push_back({p.at("location").get<std::string>(), p.at("contentHash").get<std::string>(),
                              p.at("target").get<std::string>(), p.at("timestamp").get<Timestamp>()});
  const auto& c = j.at("counters");
  s.counters = {c.at("functions").get<int>(),   c.at("microtasks").get<int>(), c.at("submissions").get<int>(),
                c.at("assignments").get<int>(), c.at("issues").get<int>(),     c.at("questions").get<int>(),
                c.at("answers").get<int>(),     c.at("notifications").get<int>()};
  s.lastSequence = j.at("lastSequence").get<std::int64_t>();
  s.lastBatch = j.at("lastBatch").get<std::int64_t>();
  s.clock = j.at("clock").get<Timestamp>();
}

ProjectStatus project_status(const ProjectState& state) {
  ProjectStatus st;
  std::map<FunctionId, int> liveCount;
  for (const auto& id : state.live) ++liveCount[state.microtasks.at(id).functionId];
  bool allDone = !state.functionOrder.empty();
  for (const auto& id : state.functionOrder) {
    const auto& f = state.functions.at(id);
    st.functions.push_back({f.id, f.name, f.state, liveCount[f.id]});
    allDone = allDone && f.state == FunctionState::Completed;
  }
  st.liveMicrotasks = static_cast<int>(state.live.size());
  st.queued = static_cast<int>(state.queue.size());
  st.complete = allDone && state.live.empty();
  return st;
}

void to_json(Value& j, const ProjectStatus& s) {
  Value fns = Value::array();
  for (const auto& f : s.functions)
    fns.push_back({{"id", f.id}, {"name", f.name}, {"state", to_string(f.state)}, {"liveMicrotasks", f.liveMicrotasks}});
  j = Value{{"functions", fns}, {"liveMicrotasks", s.liveMicrotasks}, {"queued", s.queued}, {"complete", s.complete}};
}

}  // namespace crowdms
