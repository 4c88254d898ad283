#include "crowdms/simulator.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <random>
#include <set>

#include "crowdms/labels.hpp"

namespace crowdms {
namespace {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }
  bool chance(double p) { return uniform() < p; }
  double in(const Range& r) { return r.lo + (r.hi - r.lo) * uniform(); }
  int between(int lo, int hi) { return lo + static_cast<int>(uniform() * (hi - lo + 1)); }
  Timestamp seconds_between(Timestamp lo, Timestamp hi) {
    return lo + static_cast<Timestamp>(uniform() * static_cast<double>(hi - lo + 1));
  }

 private:
  std::mt19937_64 gen_;
};

struct SimWorker {
  WorkerId id;
  double skip = 0;
  double reviewSkip = 0;
  double defect = 0;
  double threshold = 1;
  double issue = 0;
  double abandon = 0;
  double strictness = 0;

  Timestamp nextAt = 0;
  bool active = false;
  // Work in hand: submit or skip at nextAt.
  std::optional<AssignmentView> holding;
  bool willSkip = false;
};

struct PendingReview {
  PayloadKind kind = PayloadKind::BehaviorContribution;
  std::optional<std::string> newDefect;  // behavior broken by this contribution
  bool claimCorrect = true;              // MarkComplete on a finished, clean function
};

struct Fixture {
  ClientRequest request;
  std::vector<fixtures::Behavior> catalog;
  std::map<std::string, NewFunctionSpec> helpers;  // crowd-created functions by name
};

Fixture load_fixture(const std::string& name) {
  Fixture f;
  if (name == "todo") {
    f.request = fixtures::todo_request();
    f.catalog = fixtures::todo_behaviors();
    const auto helper = fixtures::date_helper_spec();
    f.helpers[helper.name] = helper;
    return f;
  }
  std::ifstream in(name);
  if (!in) throw WorkflowError(ErrorCode::Io, "cannot open client request fixture " + name);
  try {
    from_json(Value::parse(in), f.request);
  } catch (const Value::exception& e) {
    throw WorkflowError(ErrorCode::Validation, "client request fixture " + name + ": " + e.what());
  }
  for (const auto& ep : f.request.endpoints)
    for (int k = 1; k <= 3; ++k)
      f.catalog.push_back({ep.functionName + ".behavior-" + std::to_string(k), ep.functionName,
                           "behavior " + std::to_string(k), "// step " + std::to_string(k)});
  return f;
}

std::string kind_name(MicrotaskKind k) { return std::string(to_string(k)); }

double median(std::vector<double> v) {
  if (v.empty()) return 0;
  std::sort(v.begin(), v.end());
  const auto n = v.size();
  return n % 2 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2;
}

class Simulation {
 public:
  explicit Simulation(const SimulationConfig& config)
      : config_(config), fixture_(load_fixture(config.clientRequestFixture)), rng_(config.seed) {}

  SimulationResult run();

 private:
  void act(SimWorker& w);
  void start_work(SimWorker& w, const AssignmentView& view);
  void finish_work(SimWorker& w);
  void submit_ifb(SimWorker& w, const Microtask& m, const FunctionArtifact& fn);
  void submit_review(SimWorker& w, const Microtask& m);
  void resolve_issues(Timestamp now);
  std::vector<std::string> catalog_for(const std::string& function) const;

  const SimulationConfig& config_;
  Fixture fixture_;
  Rng rng_;
  std::optional<Project> project_;
  std::vector<SimWorker> workers_;
  std::map<SubmissionId, PendingReview> pending_;
  std::map<std::string, std::map<std::string, std::vector<std::string>>> defects_;  // function -> defects
  std::vector<std::pair<Timestamp, IssueId>> issues_;
  int defectCounter_ = 0;
};

std::vector<std::string> Simulation::catalog_for(const std::string& function) const {
  std::vector<std::string> out;
  for (const auto& b : fixture_.catalog)
    if (b.function == function) out.push_back(b.id);
  return out;
}

SimulationResult Simulation::run() {
  const Timestamp origin = 1'700'000'000;
  for (int i = 1; i <= config_.workerCount; ++i) {
    SimWorker w;
    w.id = "worker-" + std::to_string(i);
    const auto& r = config_.perWorker;
    w.skip = rng_.in(r.skipProbability);
    w.reviewSkip = rng_.in(r.reviewSkipProbability);
    w.defect = rng_.in(r.defectProbability);
    w.threshold = rng_.in(r.markCompleteThreshold);
    w.issue = rng_.in(r.issueProbability);
    w.abandon = rng_.in(r.abandonProbability);
    w.strictness = rng_.in(r.reviewStrictness);
    workers_.push_back(w);
  }
  project_ = Project::create("sim-" + std::to_string(config_.seed), "client", fixture_.request, config_.policy, origin);

  Timestamp sessionStart = origin + minutes(1);
  for (const auto& session : config_.sessions) {
    const Timestamp end = sessionStart + minutes(session.durationMinutes);
    for (std::size_t i = 0; i < workers_.size(); ++i) {
      auto& w = workers_[i];
      const bool participates =
          session.workers.empty() ||
          std::find(session.workers.begin(), session.workers.end(), static_cast<int>(i) + 1) != session.workers.end();
      w.active = participates;
      if (participates && !w.holding) w.nextAt = sessionStart + rng_.seconds_between(0, minutes(3));
    }
    for (;;) {
      if (project_status(project_->state()).complete && pending_.empty()) break;
      SimWorker* next = nullptr;
      for (auto& w : workers_) {
        const bool due = w.holding ? true : (w.active && w.nextAt < end);
        if (due && (!next || w.nextAt < next->nextAt)) next = &w;
      }
      Timestamp issueAt = issues_.empty() ? std::numeric_limits<Timestamp>::max() : issues_.front().first;
      if (!next && issueAt >= end) break;
      if (issueAt < end && (!next || issueAt <= next->nextAt)) {
        resolve_issues(issueAt);
        continue;
      }
      act(*next);
    }
    if (end > project_->state().clock) project_->advance(end);
    sessionStart = end + minutes(config_.sessionGapMinutes);
  }

  SimulationResult result;
  result.events = project_->log();
  result.state = project_->state();
  return result;
}

void Simulation::resolve_issues(Timestamp now) {
  while (!issues_.empty() && issues_.front().first <= now) {
    const IssueId id = issues_.front().second;
    issues_.erase(issues_.begin());
    const auto& state = project_->state();
    const auto& issue = state.issues.at(id);
    const auto& fn = state.functions.at(issue.functionId);
    IssueResolution res;
    res.description = fn.description + " (clarified by the client)";
    const bool hasUser = std::any_of(fn.signature.params.begin(), fn.signature.params.end(),
                                     [](const Param& p) { return p.name == "userId"; });
    if (!hasUser && fn.is_endpoint() && state.adts().count("Todo")) {
      res.signature = fn.signature;
      res.signature->params.insert(res.signature->params.begin(), {"userId", TypeRef::parse("string")});
    }
    project_->resolve(id, {Role::Client, state.clientId}, res, now);
  }
}

void Simulation::act(SimWorker& w) {
  if (w.holding) {
    finish_work(w);
    return;
  }
  auto view = project_->fetch(w.id, w.nextAt);
  if (!view) {
    w.nextAt += rng_.seconds_between(minutes(1), minutes(3));
    return;
  }
  start_work(w, *view);
}

void Simulation::start_work(SimWorker& w, const AssignmentView& view) {
  const auto& m = project_->state().microtasks.at(view.microtaskId);
  const bool review = m.kind == MicrotaskKind::Review;
  const Timestamp now = w.nextAt;
  if (rng_.chance(w.abandon)) {
    // Walks away; the scheduler expires the assignment at the time limit.
    w.nextAt = view.deadline + rng_.seconds_between(minutes(1), minutes(5));
    return;
  }
  w.holding = view;
  w.willSkip = rng_.chance(review ? w.reviewSkip : w.skip);
  if (w.willSkip)
    w.nextAt = now + rng_.seconds_between(30, minutes(2));
  else if (review)
    w.nextAt = now + rng_.seconds_between(minutes(1), minutes(8));
  else
    w.nextAt = now + rng_.seconds_between(minutes(2), minutes(13));
}

void Simulation::finish_work(SimWorker& w) {
  const AssignmentView view = *w.holding;
  w.holding.reset();
  const Timestamp now = w.nextAt;
  w.nextAt = now + rng_.seconds_between(10, 90);
  if (w.willSkip) {
    project_->skip(view.assignmentId, w.id, now);
    return;
  }
  project_->advance(now);
  const auto& state = project_->state();
  const auto* m = state.find_assignment(view.assignmentId);
  if (!m) return;  // expired meanwhile
  if (m->kind == MicrotaskKind::Review)
    submit_review(w, *m);
  else
    submit_ifb(w, *m, state.functions.at(m->functionId));
}

void Simulation::submit_ifb(SimWorker& w, const Microtask& m, const FunctionArtifact& fn) {
  const Timestamp now = w.nextAt;
  IfbSubmission sub;
  sub.assignmentId = *m.assignmentId;
  sub.workerId = w.id;

  const auto all = catalog_for(fn.name);
  const auto present = labels::behaviors(fn.code);
  std::vector<std::string> implemented;
  std::vector<std::string> missing;
  for (const auto& b : all) (present.count(b) ? implemented : missing).push_back(b);
  auto& defects = defects_[fn.name];

  const double done = all.empty() ? 1.0 : static_cast<double>(implemented.size()) / static_cast<double>(all.size());
  PendingReview pending;
  if (rng_.chance(w.issue)) {
    sub.payload.kind = PayloadKind::IssueReport;
    sub.payload.issueText = "The description of " + fn.name + " is ambiguous.";
    project_->submit(sub, now);
    for (const auto& [id, issue] : project_->state().issues)
      if (!issue.resolved && issue.functionId == fn.id &&
          std::none_of(issues_.begin(), issues_.end(), [&](const auto& p) { return p.second == id; }))
        issues_.push_back({now + minutes(config_.clientResponseMinutes), id});
    return;
  }

  std::vector<std::string> params;
  for (const auto& p : fn.signature.params) params.push_back(p.name);

  bool repaired = false;
  if (m.reworkFeedback && !defects.empty() && !rng_.chance(w.defect)) {
    defects.clear();  // the feedback pointed at the broken behavior
    repaired = true;
  }
  if (!repaired && (missing.empty() || done >= w.threshold)) {
    sub.payload.kind = PayloadKind::MarkComplete;
    pending.kind = PayloadKind::MarkComplete;
    pending.claimCorrect = missing.empty() && defects.empty();
  } else {
    const int take = repaired ? 0 : std::min<int>(static_cast<int>(missing.size()), rng_.between(1, 2));
    for (int i = 0; i < take; ++i) {
      const std::size_t pick = static_cast<std::size_t>(rng_.between(0, static_cast<int>(missing.size()) - 1));
      const std::string behavior = missing[pick];
      missing.erase(missing.begin() + static_cast<std::ptrdiff_t>(pick));
      implemented.push_back(behavior);
      if (rng_.chance(w.defect)) {
        defects["d" + std::to_string(++defectCounter_)] = {behavior};
        pending.newDefect = behavior;
      } else {
        auto b = std::find_if(fixture_.catalog.begin(), fixture_.catalog.end(),
                              [&](const fixtures::Behavior& x) { return x.id == behavior; });
        auto t = fixtures::behavior_test(*b, w.id);
        t.id.clear();
        sub.payload.testsAdded.push_back(t);
      }
      for (const auto& b : fixture_.catalog) {
        if (b.id != behavior) continue;
        for (const auto& [helper, spec] : fixture_.helpers) {
          if (b.snippet.find(helper + "(") == std::string::npos) continue;
          const bool exists = project_->state().find_function_by_name(helper) != nullptr;
          const bool requested = std::any_of(sub.payload.newFunctions.begin(), sub.payload.newFunctions.end(),
                                             [&](const NewFunctionSpec& s) { return s.name == helper; });
          if (!exists && !requested) sub.payload.newFunctions.push_back(spec);
        }
      }
    }
    sub.payload.code = fixtures::function_source(fixture_.catalog, fn.name, params, implemented, defects);
  }
  pending_[project_->submit(sub, now)] = pending;
}

void Simulation::submit_review(SimWorker& w, const Microtask& m) {
  const Timestamp now = w.nextAt;
  auto it = pending_.find(*m.submissionId);
  const PendingReview pending = it == pending_.end() ? PendingReview{} : it->second;
  if (it != pending_.end()) pending_.erase(it);

  ReviewSubmission rs;
  rs.assignmentId = *m.assignmentId;
  rs.workerId = w.id;
  const bool flawed = pending.newDefect.has_value() || !pending.claimCorrect;
  if (flawed && rng_.chance(w.strictness)) {
    rs.stars = rng_.between(1, 3);
    rs.feedback = pending.newDefect ? "behavior " + *pending.newDefect + " does not work"
                                    : "not every behavior is implemented yet";
  } else if (flawed) {
    rs.stars = 4;
  } else {
    rs.stars = rng_.chance(0.7) ? 5 : 4;
  }
  project_->review(rs, now);
}

SimulationMetrics compute_metrics(const SimulationResult& run, const ReplayReport& replay, const Fixture& fixture) {
  SimulationMetrics m;
  const auto& state = run.state;
  std::map<MicrotaskId, Timestamp> assignedAt;
  std::map<std::string, std::vector<double>> durations;
  auto kind_of = [&](const MicrotaskId& id) { return kind_name(state.microtasks.at(id).kind); };
  for (const auto& e : run.events) {
    switch (e.type) {
      case EventType::MicrotaskAssigned: {
        const auto id = e.payload.at("microtaskId").get<std::string>();
        ++m.fetchedByKind[kind_of(id)];
        assignedAt[id] = e.timestamp;
        break;
      }
      case EventType::MicrotaskSkipped:
        ++m.skippedByKind[kind_of(e.payload.at("microtaskId").get<std::string>())];
        break;
      case EventType::MicrotaskExpired: {
        const auto k = kind_of(e.payload.at("microtaskId").get<std::string>());
        ++m.skippedByKind[k];
        ++m.expiredByKind[k];
        break;
      }
      case EventType::SubmissionReceived: {
        const auto id = e.payload.at("submission").at("microtaskId").get<std::string>();
        ++m.completedByKind[kind_of(id)];
        durations[kind_of(id)].push_back(static_cast<double>(e.timestamp - assignedAt[id]) / 60.0);
        if (e.payload.at("submission").at("payload").at("kind") == "IssueReport")
          ++m.issuesReported;
        else
          ++m.ifbSubmissions;
        break;
      }
      case EventType::ReviewRecorded: {
        const auto id = e.payload.at("microtaskId").get<std::string>();
        ++m.completedByKind[kind_of(id)];
        durations[kind_of(id)].push_back(static_cast<double>(e.timestamp - assignedAt[id]) / 60.0);
        ++m.reviewsRecorded;
        if (e.payload.at("decision").at("stars").get<int>() >= 4) ++m.reviewsAccepted;
        break;
      }
      case EventType::MicrotaskGenerated:
        if (e.payload.at("microtask").at("kind") == "Review") ++m.reviewsCreated;
        break;
      default:
        break;
    }
  }
  for (const auto& [worker, microtask] : state.activeAssignments) ++m.inFlightByKind[kind_of(microtask)];
  for (const char* k : {"ImplementFunctionBehavior", "Review"}) {
    m.fetchedByKind[k] += 0;
    m.completedByKind[k] += 0;
    m.skippedByKind[k] += 0;
    m.expiredByKind[k] += 0;
    m.inFlightByKind[k] += 0;
    m.medianSimulatedMinutesByKind[k] = median(durations[k]);
  }
  for (const auto& [id, f] : state.functions) {
    ++m.functionsTotal;
    if (f.state == FunctionState::Completed) ++m.functionsImplemented;
    m.testsWritten += static_cast<std::int64_t>(f.tests.size());
  }
  for (const auto& b : fixture.catalog) {
    ++m.behaviorsTotal;
    if (const auto* f = state.find_function_by_name(b.function); f && labels::behavior_passes(f->code, b.id))
      ++m.behaviorsPassing;
  }
  m.maxConcurrentAssignments = replay.counts.maxConcurrentAssignments;
  m.projectComplete = project_status(state).complete;
  m.invariantViolations = replay.violations;
  return m;
}

Value range_value(const Range& r) { return Value::array({r.lo, r.hi}); }

Range range_from(const Value& j) {
  if (j.is_number()) return {j.get<double>(), j.get<double>()};
  return {j.at(0).get<double>(), j.at(1).get<double>()};
}

}  // namespace

void to_json(Value& j, const SimulationConfig& c) {
  Value sessions = Value::array();
  for (const auto& s : c.sessions) sessions.push_back({{"durationMinutes", s.durationMinutes}, {"workers", s.workers}});
  const auto& p = c.perWorker;
  Value policy;
  to_json(policy, c.policy);
  j = Value{{"seed", c.seed},
            {"workerCount", c.workerCount},
            {"sessions", sessions},
            {"sessionGapMinutes", c.sessionGapMinutes},
            {"clientResponseMinutes", c.clientResponseMinutes},
            {"perWorker",
             {{"skipProbability", range_value(p.skipProbability)},
              {"reviewSkipProbability", range_value(p.reviewSkipProbability)},
              {"defectProbability", range_value(p.defectProbability)},
              {"markCompleteThreshold", range_value(p.markCompleteThreshold)},
              {"issueProbability", range_value(p.issueProbability)},
              {"abandonProbability", range_value(p.abandonProbability)},
              {"reviewStrictness", range_value(p.reviewStrictness)}}},
            {"clientRequestFixture", c.clientRequestFixture},
            {"policy", policy}};
}

void from_json(const Value& j, SimulationConfig& c) {
  c = SimulationConfig{};
  if (!j.is_object()) throw WorkflowError(ErrorCode::Validation, "simulation config must be an object");
  try {
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("workerCount")) c.workerCount = j.at("workerCount").get<int>();
    if (j.contains("sessions")) {
      c.sessions.clear();
      for (const auto& s : j.at("sessions")) {
        SimulationSession session;
        session.durationMinutes = s.at("durationMinutes").get<int>();
        if (s.contains("workers")) session.workers = s.at("workers").get<std::vector<int>>();
        c.sessions.push_back(session);
      }
    }
    if (j.contains("sessionGapMinutes")) c.sessionGapMinutes = j.at("sessionGapMinutes").get<int>();
    if (j.contains("clientResponseMinutes")) c.clientResponseMinutes = j.at("clientResponseMinutes").get<int>();
    if (j.contains("perWorker")) {
      const auto& p = j.at("perWorker");
      auto read = [&](const char* key, Range& r) {
        if (p.contains(key)) r = range_from(p.at(key));
      };
      read("skipProbability", c.perWorker.skipProbability);
      read("reviewSkipProbability", c.perWorker.reviewSkipProbability);
      read("defectProbability", c.perWorker.defectProbability);
      read("markCompleteThreshold", c.perWorker.markCompleteThreshold);
      read("issueProbability", c.perWorker.issueProbability);
      read("abandonProbability", c.perWorker.abandonProbability);
      read("reviewStrictness", c.perWorker.reviewStrictness);
    }
    if (j.contains("clientRequestFixture")) c.clientRequestFixture = j.at("clientRequestFixture").get<std::string>();
    if (j.contains("policy")) from_json(j.at("policy"), c.policy);
    if (j.contains("assignment")) c.policy = policy_from_config(j);
  } catch (const Value::exception& e) {
    throw WorkflowError(ErrorCode::Validation, std::string("malformed simulation config: ") + e.what());
  }
}

void validate_config(const SimulationConfig& c) {
  ValidationResult out;
  if (c.workerCount < 1) out.add("workerCount", "must be at least 1");
  if (c.sessions.empty()) out.add("sessions", "at least one session required");
  for (std::size_t i = 0; i < c.sessions.size(); ++i) {
    const auto& s = c.sessions[i];
    const std::string path = "sessions[" + std::to_string(i) + "]";
    if (s.durationMinutes <= 0) out.add(path + ".durationMinutes", "must be positive");
    for (int w : s.workers)
      if (w < 1 || w > c.workerCount) out.add(path + ".workers", "worker " + std::to_string(w) + " out of range");
  }
  if (c.sessionGapMinutes < 0) out.add("sessionGapMinutes", "must be non-negative");
  if (c.clientResponseMinutes < 0) out.add("clientResponseMinutes", "must be non-negative");
  auto prob = [&](const char* name, const Range& r) {
    const std::string path = std::string("perWorker.") + name;
    if (!(r.lo >= 0 && r.hi <= 1)) out.add(path, "must lie in [0,1]");
    if (r.lo > r.hi) out.add(path, "lower bound exceeds upper bound");
  };
  const auto& p = c.perWorker;
  prob("skipProbability", p.skipProbability);
  prob("reviewSkipProbability", p.reviewSkipProbability);
  prob("defectProbability", p.defectProbability);
  prob("markCompleteThreshold", p.markCompleteThreshold);
  prob("issueProbability", p.issueProbability);
  prob("abandonProbability", p.abandonProbability);
  prob("reviewStrictness", p.reviewStrictness);
  if (!out.ok()) throw WorkflowError(ErrorCode::Validation, "invalid simulation config", std::move(out.violations));
  validate_policy(c.policy);
}

void to_json(Value& j, const SimulationMetrics& m) {
  Value violations = Value::array();
  for (const auto& v : m.invariantViolations) {
    Value x;
    to_json(x, v);
    violations.push_back(x);
  }
  j = Value{{"fetchedByKind", m.fetchedByKind},
            {"completedByKind", m.completedByKind},
            {"skippedByKind", m.skippedByKind},
            {"expiredByKind", m.expiredByKind},
            {"inFlightByKind", m.inFlightByKind},
            {"medianSimulatedMinutesByKind", m.medianSimulatedMinutesByKind},
            {"functionsImplemented", m.functionsImplemented},
            {"functionsTotal", m.functionsTotal},
            {"testsWritten", m.testsWritten},
            {"reviewsCreated", m.reviewsCreated},
            {"ifbSubmissions", m.ifbSubmissions},
            {"issuesReported", m.issuesReported},
            {"reviewsRecorded", m.reviewsRecorded},
            {"reviewsAccepted", m.reviewsAccepted},
            {"maxConcurrentAssignments", m.maxConcurrentAssignments},
            {"behaviorsPassing", m.behaviorsPassing},
            {"behaviorsTotal", m.behaviorsTotal},
            {"projectComplete", m.projectComplete},
            {"invariantViolations", violations}};
}

SimulationResult run_simulation(const SimulationConfig& config) {
  validate_config(config);
  Simulation sim(config);
  auto result = sim.run();
  const auto replay = replay_events(result.events);
  result.metrics = compute_metrics(result, replay, load_fixture(config.clientRequestFixture));
  return result;
}

ReplayReport replay_log(const std::filesystem::path& path) { return replay_events(load_log(path)); }

}  // namespace crowdms
