#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "crowdms/event_log.hpp"
#include "crowdms/fixtures.hpp"
#include "crowdms/policy.hpp"

namespace crowdms {

/// Closed interval each simulated worker samples its own parameter from.
struct Range {
  double lo = 0;
  double hi = 0;
  bool operator==(const Range&) const = default;
};

struct WorkerProfileRanges {
  Range skipProbability{0.05, 0.15};
  Range reviewSkipProbability{0.0, 0.02};
  Range defectProbability{0.05, 0.25};
  /// Fraction of a function's behaviors implemented before claiming completion.
  Range markCompleteThreshold{1.0, 1.0};
  Range issueProbability{0.0, 0.02};
  /// Chance a worker walks away from an assignment and lets it expire.
  Range abandonProbability{0.0, 0.02};
  /// Chance a reviewer notices a defect or an early completion claim.
  Range reviewStrictness{0.3, 0.9};
  bool operator==(const WorkerProfileRanges&) const = default;
};

struct SimulationSession {
  int durationMinutes = 120;
  std::vector<int> workers;  // 1-based worker numbers; empty means everyone
  bool operator==(const SimulationSession&) const = default;
};

struct SimulationConfig {
  std::uint64_t seed = 1;
  int workerCount = 9;
  std::vector<SimulationSession> sessions{{150, {}}, {150, {}}};
  int sessionGapMinutes = 24 * 60;
  int clientResponseMinutes = 10;
  WorkerProfileRanges perWorker;
  /// "todo" for the built-in ToDo request, otherwise a path to a ClientRequest file.
  std::string clientRequestFixture = "todo";
  AssignmentPolicy policy;
  bool operator==(const SimulationConfig&) const = default;
};

void to_json(Value& j, const SimulationConfig& c);
void from_json(const Value& j, SimulationConfig& c);

/// Throws WorkflowError(Validation) listing every bad field.
void validate_config(const SimulationConfig& config);

struct SimulationMetrics {
  std::map<std::string, std::int64_t> fetchedByKind;
  std::map<std::string, std::int64_t> completedByKind;
  std::map<std::string, std::int64_t> skippedByKind;  // includes expiries
  std::map<std::string, std::int64_t> expiredByKind;
  std::map<std::string, std::int64_t> inFlightByKind;
  std::map<std::string, double> medianSimulatedMinutesByKind;
  std::int64_t functionsImplemented = 0;
  std::int64_t functionsTotal = 0;
  std::int64_t testsWritten = 0;
  std::int64_t reviewsCreated = 0;
  std::int64_t ifbSubmissions = 0;  // excluding issue reports
  std::int64_t issuesReported = 0;
  std::int64_t reviewsRecorded = 0;
  std::int64_t reviewsAccepted = 0;
  std::int64_t maxConcurrentAssignments = 0;
  std::int64_t behaviorsPassing = 0;
  std::int64_t behaviorsTotal = 0;
  bool projectComplete = false;
  std::vector<InvariantViolation> invariantViolations;
};

void to_json(Value& j, const SimulationMetrics& m);

struct SimulationResult {
  SimulationMetrics metrics;
  std::vector<ProjectEvent> events;
  ProjectState state;
};

/// Seeded, single-threaded and wall-clock free: identical configs produce
/// byte-identical logs and metrics.
SimulationResult run_simulation(const SimulationConfig& config);

/// Reads a log and re-checks every invariant at every prefix.
ReplayReport replay_log(const std::filesystem::path& path);

}  // namespace crowdms
