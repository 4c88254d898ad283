#pragma once

#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "crowdms/document_store.hpp"
#include "crowdms/sandbox.hpp"

namespace crowdms {

/// One scripted action of a simulated test run.
struct MockStep {
  enum class Kind {
    Call,    // callee(args) through resolve_call; trace the result
    Save,    // persistence calls against the per-test store
    Get,
    Update,
    Remove,
    List,
    Return,  // the entry function's output (IoPair comparison)
    Throw,   // authored code raised `message`
  };
  Kind kind = Kind::Call;
  std::string callee;
  Value args = Value::array();
  std::string collection;
  std::string id;
  Value value;
  std::optional<Value> expect;  // compared canonically; mismatch fails the test
  std::string message;

  static MockStep call(std::string callee, Value args, std::optional<Value> expect = {});
  static MockStep save(std::string collection, std::string id, Value value);
  static MockStep get(std::string collection, std::string id, std::optional<Value> expect = {});
  static MockStep update(std::string collection, std::string id, Value value, std::optional<Value> expect = {});
  static MockStep remove(std::string collection, std::string id, std::optional<Value> expect = {});
  static MockStep list(std::string collection, std::optional<Value> expect = {});
  static MockStep returns(Value value);
  static MockStep raise(std::string message);
};

struct MockScript {
  std::vector<MockStep> steps;
  /// Forces the final status when set (a stub miss still errors); otherwise
  /// derived from the steps.
  std::optional<TestStatus> status;
  std::string message;
};

/// Deterministic executor for hermetic runs. Lookup order per test:
///   1. scripted entry keyed by (entryFunction, entry version, testId);
///   2. `@checks <behavior>` code tests: ground-truth labels in the entry source;
///   3. IoPair against a blank entry function: output is null (undefined);
///   4. otherwise Errored, "no scripted outcome".
/// Every test starts from a fresh store built from the bundle seed.
class MockExecutor final : public ExecutorPort {
 public:
  void script(const std::string& entryFunction, int version, const std::string& testId, MockScript script);
  /// Result of running `callee` for real with `args` (CallReal); null when absent.
  void real_result(const std::string& callee, const Value& args, Value result);

  TestRunReport execute(const ExecutionBundle& bundle) override;

  std::size_t executions() const { return executions_; }

 private:
  TestResult run_one(const ExecutionBundle& bundle, const TestCase& test, DocumentStore& store);

  std::map<std::tuple<std::string, int, std::string>, MockScript> scripts_;
  std::map<std::string, Value> realResults_;
  std::size_t executions_ = 0;
};

}  // namespace crowdms
