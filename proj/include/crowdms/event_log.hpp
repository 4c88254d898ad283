#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "crowdms/events.hpp"
#include "crowdms/state.hpp"

namespace crowdms {

/// Raised when a newline-delimited log cannot be decoded.
class LogCorruptError : public WorkflowError {
 public:
  LogCorruptError(std::int64_t sequence, const std::string& message)
      : WorkflowError(ErrorCode::Corrupt, "corrupt event log at sequence " + std::to_string(sequence) + ": " + message),
        sequence_(sequence) {}
  std::int64_t sequence() const noexcept { return sequence_; }

 private:
  std::int64_t sequence_;
};

void write_events(std::ostream& out, const std::vector<ProjectEvent>& events);
std::vector<ProjectEvent> read_events(std::istream& in);

void save_log(const std::filesystem::path& path, const std::vector<ProjectEvent>& events);
std::vector<ProjectEvent> load_log(const std::filesystem::path& path);

struct InvariantViolation {
  std::int64_t sequence = 0;
  std::string invariant;
  std::string message;
  bool operator==(const InvariantViolation&) const = default;
};

void to_json(Value& j, const InvariantViolation& v);

/// Folds events one at a time and checks the workflow invariants after every
/// prefix (and the batch-level ones at every batch boundary).
class InvariantChecker {
 public:
  /// Throws LogCorruptError if the event cannot be folded.
  void observe(const ProjectEvent& event);
  /// Closes the final batch.
  void finish();

  const ProjectState& state() const { return state_; }
  const std::vector<InvariantViolation>& violations() const { return violations_; }
  std::size_t events() const { return events_; }

  /// Running totals used by the conservation checks.
  struct Counts {
    std::int64_t reviewsGenerated = 0;
    std::int64_t nonIssueIfbSubmissions = 0;
    std::int64_t issueSubmissions = 0;
    std::int64_t reviewsRecorded = 0;
    std::int64_t contributionsApplied = 0;
    std::int64_t reviewerAwards = 0;
    std::int64_t maxConcurrentAssignments = 0;
  };
  const Counts& counts() const { return counts_; }

 private:
  void violation(std::int64_t seq, std::string invariant, std::string message);
  void check_prefix(const ProjectEvent& e);
  void close_batch();

  struct BatchTally {
    std::int64_t batch = -1;
    std::int64_t lastSequence = 0;
    int reviewsRecorded = 0;
    int contributionsApplied = 0;
    int reviewerAwards = 0;
    std::optional<FunctionId> acceptedContinuation;  // accepted non-MarkComplete review
    std::map<FunctionId, int> ifbGenerated;
  };

  ProjectState state_;
  std::vector<InvariantViolation> violations_;
  Counts counts_;
  BatchTally tally_;
  std::int64_t lastSequence_ = 0;
  std::size_t events_ = 0;
};

struct ReplayReport {
  ProjectState state;
  std::vector<InvariantViolation> violations;
  InvariantChecker::Counts counts;
  std::size_t events = 0;
};

ReplayReport replay_events(const std::vector<ProjectEvent>& events);

}  // namespace crowdms
