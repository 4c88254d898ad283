#include <chrono>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "crowdms/assembler.hpp"
#include "crowdms/event_log.hpp"
#include "crowdms/fixtures.hpp"
#include "crowdms/mock_executor.hpp"
#include "crowdms/simulator.hpp"

using namespace crowdms;

namespace {

constexpr int kSeeds = 100;
constexpr double kRuntimeBudgetSeconds = 60.0;

struct Outcome {
  bool pass = true;
  std::string detail;
};

class Suite {
 public:
  void run(const std::string& name, const std::function<Outcome()>& check) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s  %-22s %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
    std::fflush(stdout);
    failures_ += o.pass ? 0 : 1;
  }
  int failures() const { return failures_; }

 private:
  int failures_ = 0;
};

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// One simulator run per seed, shared by the log-based criteria.
struct SeedRuns {
  std::vector<SimulationResult> results;
  double seconds = 0;
};

const SeedRuns& seed_runs() {
  static const SeedRuns runs = [] {
    SeedRuns r;
    const auto start = std::chrono::steady_clock::now();
    for (int seed = 1; seed <= kSeeds; ++seed) {
      SimulationConfig c;
      c.seed = static_cast<std::uint64_t>(seed);
      r.results.push_back(run_simulation(c));
    }
    r.seconds = seconds_since(start);
    return r;
  }();
  return runs;
}

Outcome conservation() {
  const auto& runs = seed_runs();
  std::int64_t reviews = 0, submissions = 0;
  for (std::size_t i = 0; i < runs.results.size(); ++i) {
    std::int64_t r = 0, s = 0;
    for (const auto& e : runs.results[i].events) {
      if (e.type == EventType::MicrotaskGenerated && e.payload.at("microtask").at("kind") == "Review") ++r;
      if (e.type == EventType::SubmissionReceived &&
          e.payload.at("submission").at("payload").at("kind") != "IssueReport")
        ++s;
    }
    if (r != s)
      return {false, "seed " + std::to_string(i + 1) + ": " + std::to_string(r) + " reviews vs " + std::to_string(s) +
                         " submissions"};
    reviews += r;
    submissions += s;
  }
  char buf[160];
  std::snprintf(buf, sizeof buf, "%d seeds, %lld reviews = %lld submissions, %.2f s", kSeeds,
                static_cast<long long>(reviews), static_cast<long long>(submissions), runs.seconds);
  return {runs.seconds < kRuntimeBudgetSeconds, buf};
}

Outcome locking() {
  std::size_t events = 0;
  for (std::size_t i = 0; i < seed_runs().results.size(); ++i) {
    ProjectState state;
    for (const auto& e : seed_runs().results[i].events) {
      apply_event(state, e);
      ++events;
      std::map<FunctionId, int> live;
      for (const auto& id : state.live)
        if (++live[state.microtasks.at(id).functionId] > 1)
          return {false, "seed " + std::to_string(i + 1) + " sequence " + std::to_string(e.sequence) + ": function " +
                             state.microtasks.at(id).functionId + " has two live microtasks"};
    }
    const auto report = replay_events(seed_runs().results[i].events);
    if (!report.violations.empty())
      return {false, "seed " + std::to_string(i + 1) + ": " + report.violations[0].invariant + " " +
                         report.violations[0].message};
  }
  return {true, std::to_string(kSeeds) + " logs, " + std::to_string(events) + " prefixes, 0 violations"};
}

Outcome scoring_ranges() {
  const std::set<int> accepted{8, 10}, rejected{2, 4, 6}, review{5};
  std::map<std::string, std::int64_t> seen;
  for (const auto& run : seed_runs().results) {
    std::map<std::int64_t, bool> batchAccepted;
    for (const auto& e : run.events)
      if (e.type == EventType::ReviewRecorded) batchAccepted[e.batch] = e.payload.at("outcome") == "Accepted";
    for (const auto& e : run.events) {
      if (e.type != EventType::ScoreAwarded) continue;
      const int points = e.payload.at("points").get<int>();
      const auto reason = e.payload.at("reason").get<std::string>();
      bool ok = false;
      if (reason == "ReviewerAward") {
        ok = review.count(points) > 0;
        ++seen["review"];
      } else if (batchAccepted.at(e.batch)) {
        ok = accepted.count(points) > 0;
        ++seen["accepted"];
      } else {
        ok = rejected.count(points) > 0;
        ++seen["rejected"];
      }
      if (!ok) return {false, reason + " of " + std::to_string(points) + " at sequence " + std::to_string(e.sequence)};
    }
  }
  if (seen["accepted"] == 0 || seen["rejected"] == 0 || seen["review"] == 0)
    return {false, "a category was never exercised"};
  return {true, std::to_string(seen["accepted"]) + " accepted, " + std::to_string(seen["rejected"]) + " rejected, " +
                    std::to_string(seen["review"]) + " review awards"};
}

Outcome timeout() {
  const auto s = fixtures::run_timeout_scenario();
  struct Row {
    std::int64_t sequence, batch;
    Timestamp t;
    EventType type;
  };
  const std::vector<Row> expected{
      {1, 1, 0, EventType::ProjectCreated},      {2, 1, 0, EventType::FunctionCreated},
      {3, 1, 0, EventType::MicrotaskGenerated},  {4, 2, 60, EventType::MicrotaskAssigned},
      {5, 3, 900, EventType::NotificationEmitted}, {6, 4, 960, EventType::MicrotaskExpired},
      {7, 5, 1080, EventType::MicrotaskAssigned}, {8, 6, 1320, EventType::SubmissionReceived},
      {9, 6, 1320, EventType::MicrotaskGenerated},
  };
  const auto& log = s.project.log();
  if (log.size() != expected.size())
    return {false, "expected " + std::to_string(expected.size()) + " events, got " + std::to_string(log.size())};
  for (std::size_t i = 0; i < log.size(); ++i) {
    const auto& e = log[i];
    const auto& x = expected[i];
    if (e.sequence != x.sequence || e.batch != x.batch || e.timestamp != x.t || e.type != x.type)
      return {false, "event " + std::to_string(i + 1) + " is " + std::string(to_string(e.type)) + " at " +
                         std::to_string(e.timestamp)};
  }
  const auto idle = log[3].payload.at("workerId").get<std::string>();
  const bool warning = log[4].payload.at("notification").at("kind") == "TimeWarning" &&
                       log[4].payload.at("notification").at("recipient") == idle &&
                       log[4].timestamp - log[3].timestamp == minutes(14);
  const bool expiry = log[5].payload.at("workerId") == idle && log[5].timestamp - log[3].timestamp == minutes(15);
  const auto other = log[6].payload.at("workerId").get<std::string>();
  const bool redone = log[6].payload.at("microtaskId") == log[3].payload.at("microtaskId") && other != idle &&
                      log[7].payload.at("submission").at("workerId") == other;
  if (!warning || !expiry || !redone) return {false, "warning/expiry/re-assignment payloads do not match"};
  return {true, "warning at +14:00, expiry at +15:00, completed by " + other + "; 9 events pinned"};
}

Outcome end_to_end() {
  const auto start = std::chrono::steady_clock::now();
  MockExecutor defectiveExec, correctedExec;
  auto defective = fixtures::run_todo_scenario(fixtures::Variant::Defective, defectiveExec);
  auto corrected = fixtures::run_todo_scenario(fixtures::Variant::Corrected, correctedExec);
  std::ostringstream why;
  bool ok = true;
  for (const auto* p : {&defective.project, &corrected.project}) {
    const auto& st = p->state();
    int crowd = 0;
    for (const auto& [id, f] : st.functions) crowd += f.is_endpoint() ? 0 : 1;
    if (st.request.endpoints.size() != 12 || st.functions.size() != 13 || crowd != 1 || !project_status(st).complete) {
      ok = false;
      why << "project shape wrong; ";
    }
  }
  const auto tree = assemble_project(corrected.project.state());
  std::size_t functionFiles = 0;
  for (const auto& [path, content] : tree.files) functionFiles += path.rfind("functions/", 0) == 0 ? 1 : 0;
  const auto manifest = parse_value(tree.files.at("manifest.json"));
  if (tree.routeManifest.size() != 12 || manifest.at("routes").size() != 12 || functionFiles != 13 ||
      manifest.at("functions").size() != 13) {
    ok = false;
    why << "tree has " << tree.routeManifest.size() << " routes and " << functionFiles << " function files; ";
  }
  MockExecutor oracle;
  const auto bad = fixtures::score_oracle(defective.project.state(), oracle);
  const auto good = fixtures::score_oracle(corrected.project.state(), oracle);
  if (bad.total != 34 || bad.passed != 27 || good.total != 34 || good.passed != 34) ok = false;
  const double secs = seconds_since(start);
  if (secs >= kRuntimeBudgetSeconds) ok = false;
  char buf[200];
  std::snprintf(buf, sizeof buf, "12 routes, %zu function files, defective %d/%d, corrected %d/%d, %.2f s",
                functionFiles, bad.passed, bad.total, good.passed, good.total, secs);
  return {ok, why.str() + buf};
}

Outcome stub_semantics() {
  std::mt19937_64 rng(2024);
  auto pick = [&](std::size_t n) { return static_cast<std::size_t>(rng() % n); };
  const std::vector<std::string> callees{"checkTodoDateFormat", "loadUser", "sendMail"};
  const std::vector<Value> args{Value::array({"2020-13-45"}), Value::array({"2020-01-02"}), Value::array({1, 2}),
                                parse_value(R"([{"a":1,"b":[true,null]}])"), Value::array()};
  int trials = 0;
  for (; trials < 2000; ++trials) {
    std::vector<Stub> stubs;
    std::set<std::pair<std::string, std::string>> keys;
    const auto n = pick(5);
    for (std::size_t i = 0; i < n; ++i) {
      Stub s{callees[pick(3)], args[pick(args.size())], static_cast<std::int64_t>(pick(100)), "w"};
      if (keys.insert({s.calleeName, canonicalize(s.argumentTuple)}).second) stubs.push_back(s);
    }
    std::set<std::string> implemented;
    for (const auto& c : callees)
      if (pick(2)) implemented.insert(c);
    const auto callee = callees[pick(3)];
    const auto arg = args[pick(args.size())];
    const auto r = resolve_call(callee, arg, stubs, implemented);
    const Stub* hit = nullptr;
    for (const auto& s : stubs)
      if (s.calleeName == callee && canonicalize(s.argumentTuple) == canonicalize(arg)) hit = &s;
    const auto want = hit ? CallResolution::Kind::UseStub
                          : implemented.count(callee) ? CallResolution::Kind::CallReal : CallResolution::Kind::MissError;
    if (r.kind != want || (hit && r.returnValue != hit->returnValue))
      return {false, "resolve_call disagrees on trial " + std::to_string(trials)};
  }
  const auto sc = fixtures::date_format_stub_scenario();
  const auto& miss = sc.withoutStub.perTest.at(0);
  const auto& pass = sc.withStub.perTest.at(0);
  const bool missOk = miss.status == TestStatus::Errored && miss.stubMisses.size() == 1 &&
                      miss.stubMisses[0].calleeName == "checkTodoDateFormat" &&
                      miss.stubMisses[0].argumentTuple == Value::array({"2020-13-45"});
  const bool passOk = pass.status == TestStatus::Passed && pass.stubHits.size() == 1 && pass.stubMisses.empty();
  if (!missOk || !passOk)
    return {false, "checkTodoDateFormat: without stub " + std::string(to_string(miss.status)) + ", with stub " +
                       std::string(to_string(pass.status))};
  return {true, std::to_string(trials) + " random triples; checkTodoDateFormat miss -> Errored, stub -> Passed"};
}

std::string encode(const SimulationResult& r) {
  std::ostringstream out;
  write_events(out, r.events);
  Value m;
  to_json(m, r.metrics);
  return out.str() + "\n" + canonicalize(m);
}

Outcome determinism() {
  SimulationConfig c;
  c.seed = 20240601;
  const auto a = encode(run_simulation(c));
  const auto b = encode(run_simulation(c));
  c.policy.mode = AssignmentMode::Random;
  c.policy.seed = 7;
  const auto x = encode(run_simulation(c));
  const auto y = encode(run_simulation(c));
  if (a != b || x != y) return {false, "two runs of one config differ"};
  return {true, "fifo and random configs, " + std::to_string(a.size() + x.size()) + " bytes identical"};
}

Outcome persistence_isolation() {
  ExecutionBundle b;
  b.bundleId = "isolation";
  b.functions = {{"createTodo", {"todo"}, "function createTodo(todo) { return save('todos', todo.id, todo); }", 1}};
  b.entryFunction = "createTodo";
  b.persistenceSeed = {{"todos", "seed-1", {{"id", "seed-1"}, {"title", "seeded"}}}};
  for (const char* id : {"writes", "observes"}) {
    TestCase t;
    t.id = id;
    t.kind = TestCase::Kind::CodeTest;
    t.source = std::string("// ") + id;
    b.tests.push_back(t);
  }
  MockExecutor ex;
  MockScript writer;
  writer.steps.push_back(MockStep::save("todos", "new-1", {{"id", "new-1"}, {"title", "written"}}));
  writer.steps.push_back(MockStep::list("todos", parse_value(
      R"([{"id":"seed-1","title":"seeded"},{"id":"new-1","title":"written"}])")));
  ex.script("createTodo", 1, "writes", writer);
  MockScript observer;
  observer.steps.push_back(MockStep::list("todos", parse_value(R"([{"id":"seed-1","title":"seeded"}])")));
  observer.steps.push_back(MockStep::get("todos", "new-1", Value()));
  ex.script("createTodo", 1, "observes", observer);
  const auto report = run_tests(b, ex);
  const bool ok = report.perTest.size() == 2 && report.count(TestStatus::Passed) == 2 &&
                  report.persistenceFinalState ==
                      parse_value(R"({"todos":[{"id":"seed-1","value":{"id":"seed-1","title":"seeded"}}]})");
  std::string detail = "writer sees 2 documents, next test sees only the seed";
  if (!ok)
    for (const auto& r : report.perTest) detail = r.testId + ": " + std::string(to_string(r.status)) + " " + r.message;
  return {ok, detail};
}

}  // namespace

int main() {
  Suite suite;
  suite.run("conservation", conservation);
  suite.run("locking", locking);
  suite.run("scoring-ranges", scoring_ranges);
  suite.run("timeout", timeout);
  suite.run("end-to-end-todo", end_to_end);
  suite.run("stub-semantics", stub_semantics);
  suite.run("determinism", determinism);
  suite.run("persistence-isolation", persistence_isolation);
  std::printf("%s: %d failing\n", suite.failures() == 0 ? "ACCEPTED" : "REJECTED", suite.failures());
  return suite.failures() == 0 ? 0 : 1;
}
