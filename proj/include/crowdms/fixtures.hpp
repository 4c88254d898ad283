#pragma once

#include <map>
#include <string>
#include <vector>

#include "crowdms/engine.hpp"
#include "crowdms/mock_executor.hpp"
#include "crowdms/sandbox.hpp"

namespace crowdms::fixtures {

// The ToDo reference project: twelve client endpoints over Todo and Reminder
// ADTs, plus a helper (checkTodoDateFormat) the crowd creates along the way.

/// setReminder is deliberately requested without a userId; the scripted
/// crowd reports that as an issue and the client adds the parameter.
ClientRequest todo_request();

struct Behavior {
  std::string id;  // "<function>.<slug>"
  std::string function;
  std::string description;
  std::string snippet;  // source lines implementing it
};

/// All 34 checkable behaviors in a fixed order.
const std::vector<Behavior>& todo_behaviors();
std::vector<const Behavior*> behaviors_of(const std::string& function);

/// Signature and description of the crowd-created date helper.
NewFunctionSpec date_helper_spec();

/// Synthesizes labelled source text: `implemented` behaviors in catalog
/// order, with `defects` (defect id -> affected behaviors) annotated.
std::string function_source(const std::string& name, const std::vector<std::string>& params,
                            const std::vector<std::string>& implemented,
                            const std::map<std::string, std::vector<std::string>>& defects = {});
/// Same, ordering behaviors by an arbitrary catalog.
std::string function_source(const std::vector<Behavior>& catalog, const std::string& name,
                            const std::vector<std::string>& params, const std::vector<std::string>& implemented,
                            const std::map<std::string, std::vector<std::string>>& defects);

/// A code test checking one behavior through the label rule.
TestCase behavior_test(const Behavior& behavior, const WorkerId& author = "oracle");

struct OracleScore {
  int passed = 0;
  int total = 0;
  std::vector<std::string> failing;
};

/// Runs one `@checks` test per catalog behavior against each function's
/// current source, through `executor`.
OracleScore score_oracle(const ProjectState& state, ExecutorPort& executor);

enum class Variant { Defective, Corrected };

struct TodoScenarioResult {
  Project project;
  TestRunReport dateCheckWithoutStub;  // createTodo run before the stub exists
  TestRunReport dateCheckWithStub;
  int rounds = 0;
};

/// Drives the ToDo request to completion with nine scripted workers. The
/// defective variant lets four defects through review (seven failing
/// behaviors); the corrected variant implements everything cleanly.
TodoScenarioResult run_todo_scenario(Variant variant, MockExecutor& executor);

/// The date helper stub scenario in isolation: createTodo calls
/// checkTodoDateFormat("2020-13-45") before the helper exists.
struct StubScenario {
  TestRunReport withoutStub;
  TestRunReport withStub;
};
StubScenario date_format_stub_scenario();

/// An idle worker holds an IFB past the warning and the time limit; the
/// microtask is re-queued and a second worker completes it.
struct TimeoutScenario {
  Project project;
  Timestamp assignedAt = 0;
  Timestamp warnedAt = 0;
  Timestamp expiredAt = 0;
};
TimeoutScenario run_timeout_scenario();

}  // namespace crowdms::fixtures
