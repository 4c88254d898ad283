#include <gtest/gtest.h>

#include <fstream>

#include "crowdms/simulator.hpp"
#include "support.hpp"

using namespace crowdms;

namespace {

std::string dump(const SimulationResult& r) {
  std::ostringstream out;
  write_events(out, r.events);
  Value m;
  to_json(m, r.metrics);
  return out.str() + canonicalize(m);
}

void expect_conservation(const SimulationMetrics& m) {
  for (const auto& [kind, fetched] : m.fetchedByKind) {
    auto get = [&](const std::map<std::string, std::int64_t>& x) {
      auto it = x.find(kind);
      return it == x.end() ? 0 : it->second;
    };
    EXPECT_EQ(get(m.completedByKind) + get(m.skippedByKind) + get(m.inFlightByKind), fetched) << kind;
  }
  EXPECT_EQ(m.reviewsCreated, m.ifbSubmissions);
}

}  // namespace

TEST(Simulator, DefaultConfigSeedOne) {
  SimulationConfig c;
  const auto r = run_simulation(c);
  EXPECT_TRUE(r.metrics.invariantViolations.empty());
  EXPECT_GT(r.metrics.fetchedByKind.at("ImplementFunctionBehavior"), 0);
  EXPECT_GT(r.metrics.reviewsRecorded, 0);
  EXPECT_GE(r.metrics.functionsTotal, 12);
  EXPECT_LE(r.metrics.maxConcurrentAssignments, 9);
  EXPECT_EQ(r.metrics.behaviorsTotal, 34);
  expect_conservation(r.metrics);
  EXPECT_EQ(fold(r.events), r.state);
}

TEST(Simulator, SingleWorker) {
  SimulationConfig c;
  c.workerCount = 1;
  c.policy.selfReviewAllowed = true;
  const auto r = run_simulation(c);
  EXPECT_TRUE(r.metrics.invariantViolations.empty());
  EXPECT_EQ(r.metrics.maxConcurrentAssignments, 1);
  EXPECT_GT(r.metrics.reviewsRecorded, 0);
  expect_conservation(r.metrics);
}

TEST(Simulator, CleanWorkersAreAlwaysAccepted) {
  SimulationConfig c;
  c.seed = 5;
  c.perWorker.defectProbability = {0, 0};
  c.perWorker.issueProbability = {0, 0};
  c.perWorker.reviewStrictness = {1, 1};
  const auto r = run_simulation(c);
  ASSERT_GT(r.metrics.reviewsRecorded, 0);
  EXPECT_EQ(r.metrics.reviewsAccepted, r.metrics.reviewsRecorded);
  EXPECT_EQ(r.metrics.issuesReported, 0);
}

TEST(Simulator, Deterministic) {
  SimulationConfig c;
  c.seed = 77;
  EXPECT_EQ(dump(run_simulation(c)), dump(run_simulation(c)));
  SimulationConfig d = c;
  d.seed = 78;
  EXPECT_NE(dump(run_simulation(c)), dump(run_simulation(d)));
}

TEST(Simulator, ConfigValidation) {
  SimulationConfig c;
  c.workerCount = 0;
  EXPECT_THROW(validate_config(c), WorkflowError);
  c = {};
  c.perWorker.skipProbability = {0.5, 0.2};
  EXPECT_THROW(validate_config(c), WorkflowError);
  c = {};
  c.perWorker.defectProbability = {0, 1.5};
  EXPECT_THROW(validate_config(c), WorkflowError);
  c = {};
  c.sessions = {};
  EXPECT_THROW(validate_config(c), WorkflowError);
  c = {};
  c.sessions = {{60, {10}}};
  EXPECT_THROW(validate_config(c), WorkflowError);
  EXPECT_NO_THROW(validate_config(SimulationConfig{}));
}

TEST(Simulator, ConfigCodec) {
  SimulationConfig c;
  c.seed = 9;
  c.sessions = {{30, {1, 2}}};
  c.perWorker.abandonProbability = {0.1, 0.2};
  c.policy.mode = AssignmentMode::Random;
  Value j = c;
  EXPECT_EQ(parse_value(canonicalize(j)).get<SimulationConfig>(), c);

  auto scalar = parse_value(R"({"perWorker": {"skipProbability": 0.1}})").get<SimulationConfig>();
  EXPECT_EQ(scalar.perWorker.skipProbability, (Range{0.1, 0.1}));
  EXPECT_THROW(parse_value(R"({"policy": {"mode": "Random"}})").get<SimulationConfig>(), WorkflowError);
}

TEST(Simulator, ReadsShippedConfig) {
  std::ifstream in(std::string(CROWDMS_SOURCE_DIR) + "/configs/todo-study.json");
  ASSERT_TRUE(in);
  std::stringstream s;
  s << in.rdbuf();
  const auto c = parse_value(s.str()).get<SimulationConfig>();
  EXPECT_EQ(c, SimulationConfig{});
}

TEST(Simulator, MissingFixtureFails) {
  SimulationConfig c;
  c.clientRequestFixture = "/nonexistent/request.json";
  EXPECT_THROW(run_simulation(c), WorkflowError);
}

TEST(Simulator, CustomFixtureFile) {
  support::TempDir dir("crowdms-sim");
  const auto path = dir.path() / "request.json";
  Value req = support::small_request(2);
  std::ofstream(path) << canonicalize(req);
  SimulationConfig c;
  c.clientRequestFixture = path.string();
  c.workerCount = 3;
  const auto r = run_simulation(c);
  EXPECT_TRUE(r.metrics.invariantViolations.empty());
  EXPECT_GE(r.metrics.functionsTotal, 2);
}

TEST(Simulator, ReplayLogFromDisk) {
  SimulationConfig c;
  c.seed = 3;
  const auto r = run_simulation(c);
  support::TempDir dir("crowdms-sim");
  save_log(dir.path() / "events.ndjson", r.events);
  const auto report = replay_log(dir.path() / "events.ndjson");
  EXPECT_TRUE(report.violations.empty());
  EXPECT_EQ(report.state, r.state);
}
