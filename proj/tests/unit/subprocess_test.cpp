#include <gtest/gtest.h>

#include <chrono>

#include "crowdms/subprocess_executor.hpp"

using namespace crowdms;

namespace {

ExecutionBundle bundle() {
  ExecutionBundle b;
  b.bundleId = "p:f1:v2";
  b.functions = {{"f", {"x"}, "function f(x) { return x; }", 2}};
  b.entryFunction = "f";
  for (const char* id : {"t1", "t2"}) {
    TestCase t;
    t.id = id;
    t.inputs = Value::array({1});
    t.expectedOutput = 1;
    b.tests.push_back(t);
  }
  b.persistenceSeed = {{"todos", "a", {{"n", 1}}}};
  return b;
}

TestRunReport run(const std::string& mode, int wallTimeMs = 5000, int graceMs = 2000) {
  SubprocessExecutor ex({FAKE_HARNESS_PATH, mode}, graceMs);
  auto b = bundle();
  b.limits.wallTimeMs = wallTimeMs;
  return run_tests(b, ex);
}

}  // namespace

TEST(Subprocess, PassingHarness) {
  const auto r = run("pass");
  ASSERT_EQ(r.perTest.size(), 2u);
  EXPECT_EQ(r.count(TestStatus::Passed), 2u);
  EXPECT_EQ(r.bundleId, "p:f1:v2");
  EXPECT_EQ(r.persistenceFinalState.at("todos").at(0).at("id"), "a");
  EXPECT_EQ(r.perTest[0].traces.at(0).expression, "f(...)");
}

TEST(Subprocess, FailingHarness) {
  const auto r = run("fail");
  EXPECT_EQ(r.count(TestStatus::Failed), 2u);
  EXPECT_EQ(r.perTest[1].message, "expected true but got false");
}

TEST(Subprocess, TimeoutKillsHarness) {
  const auto start = std::chrono::steady_clock::now();
  const auto r = run("sleep", 200, 200);
  const auto elapsed = std::chrono::steady_clock::now() - start;
  EXPECT_EQ(r.count(TestStatus::Errored), 2u);
  EXPECT_NE(r.perTest[0].message.find("timeout"), std::string::npos);
  EXPECT_LT(elapsed, std::chrono::seconds(5));
}

TEST(Subprocess, GarbageResponse) {
  const auto r = run("garbage");
  EXPECT_EQ(r.count(TestStatus::Errored), 2u);
  EXPECT_NE(r.perTest[0].message.find("protocol error"), std::string::npos);
}

TEST(Subprocess, NonzeroExit) {
  const auto r = run("exit");
  EXPECT_EQ(r.count(TestStatus::Errored), 2u);
  EXPECT_NE(r.perTest[0].message.find("status 4"), std::string::npos);
}

TEST(Subprocess, MissingBinary) {
  SubprocessExecutor ex({"/nonexistent/harness"});
  const auto r = run_tests(bundle(), ex);
  EXPECT_EQ(r.count(TestStatus::Errored), 2u);
  SubprocessExecutor none({});
  EXPECT_EQ(run_tests(bundle(), none).perTest[0].message, "no harness command configured");
}
