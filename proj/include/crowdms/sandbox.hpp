#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "crowdms/model.hpp"
#include "crowdms/state.hpp"

namespace crowdms {

struct BundleFunction {
  std::string name;
  std::vector<std::string> params;
  std::string source;
  int version = 0;
  bool operator==(const BundleFunction&) const = default;
};

struct SeedDocument {
  std::string collection;
  std::string id;
  Value value;
  bool operator==(const SeedDocument&) const = default;
};

struct ExecutionLimits {
  int wallTimeMs = 5000;
  std::size_t outputBytes = 1 << 20;
  bool operator==(const ExecutionLimits&) const = default;
};

/// Everything an executor needs for one run: the project's functions, the
/// function under test, its tests and stubs, and the store seed.
struct ExecutionBundle {
  std::string bundleId;
  std::vector<BundleFunction> functions;
  std::string entryFunction;
  std::vector<TestCase> tests;
  std::vector<Stub> stubs;
  std::vector<SeedDocument> persistenceSeed;
  ExecutionLimits limits;

  const BundleFunction* find(std::string_view name) const;
  /// Names of functions whose source is not blank.
  std::set<std::string> implemented_set() const;
  bool operator==(const ExecutionBundle&) const = default;
};

enum class TestStatus { Passed, Failed, Errored };
std::string_view to_string(TestStatus s);

struct Trace {
  std::string expression;
  std::vector<Value> values;
  bool operator==(const Trace&) const = default;
};

struct CallRecord {
  std::string calleeName;
  Value argumentTuple = Value::array();
  bool operator==(const CallRecord&) const = default;
};

struct TestResult {
  std::string testId;
  TestStatus status = TestStatus::Errored;
  std::string message;
  std::vector<Trace> traces;
  std::vector<CallRecord> stubHits;
  std::vector<CallRecord> stubMisses;
  bool operator==(const TestResult&) const = default;
};

struct TestRunReport {
  std::string bundleId;
  std::vector<TestResult> perTest;
  Value persistenceFinalState = Value::object();

  std::size_t count(TestStatus s) const;
  const TestResult* find(std::string_view testId) const;
  bool operator==(const TestRunReport&) const = default;
};

/// Runs a bundle. Implementations must not let store state leak between calls.
class ExecutorPort {
 public:
  virtual ~ExecutorPort() = default;
  virtual TestRunReport execute(const ExecutionBundle& bundle) = 0;
};

struct CallResolution {
  enum class Kind { UseStub, CallReal, MissError };
  Kind kind = Kind::MissError;
  Value returnValue;  // UseStub only
};

/// Stubs always win on an exact (callee, canonical arguments) match, even over
/// implemented callees; otherwise implemented callees run for real and
/// unimplemented ones are a miss.
CallResolution resolve_call(std::string_view callee, const Value& argumentTuple, std::span<const Stub> stubs,
                            const std::set<std::string>& implemented);

ValidationResult validate_bundle(const ExecutionBundle& bundle);

/// Dispatches to the executor and normalizes the report: exactly one result
/// per bundle test in bundle order. Executor failures become Errored results.
/// Throws WorkflowError(Validation) when the bundle itself is invalid.
TestRunReport run_tests(const ExecutionBundle& bundle, ExecutorPort& executor);

struct BundleOverrides {
  std::optional<std::string> code;
  std::vector<TestCase> extraTests;
  std::vector<Stub> extraStubs;
};

/// Builds the bundle for a function of a project: all project functions at
/// their current code, the function's tests and stubs plus any overrides.
ExecutionBundle make_bundle(const ProjectState& state, const FunctionId& function, const BundleOverrides& overrides = {},
                            std::vector<SeedDocument> seed = {});

// Wire protocol -------------------------------------------------------------

void to_json(Value& j, const ExecutionBundle& b);
void from_json(const Value& j, ExecutionBundle& b);
void to_json(Value& j, const TestResult& r);
void from_json(const Value& j, TestResult& r);
void to_json(Value& j, const TestRunReport& r);
void from_json(const Value& j, TestRunReport& r);

/// Frame: ASCII decimal payload length, '\n', payload bytes.
std::string frame_record(std::string_view payload);
void write_record(std::ostream& out, std::string_view payload);
/// nullopt on clean EOF before a header; throws WorkflowError(Corrupt) on a malformed frame.
std::optional<std::string> read_record(std::istream& in, std::size_t maxBytes = 64u << 20);

}  // namespace crowdms
