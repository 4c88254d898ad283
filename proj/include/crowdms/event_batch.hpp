#pragma once

#include <string>
#include <vector>

#include "crowdms/state.hpp"

namespace crowdms {

/// Accumulates the events of one command against a fixed base state,
/// assigning dense sequence numbers, the batch number and fresh ids.
class EventBatch {
 public:
  EventBatch(const ProjectState& base, Timestamp now)
      : sequence_(base.lastSequence), batch_(base.lastBatch + 1), now_(now), counters_(base.counters) {}

  void emit(EventType type, Value payload) {
    events_.push_back({++sequence_, now_, batch_, type, std::move(payload)});
  }

  std::string function_id() { return "f" + std::to_string(++counters_.functions); }
  std::string microtask_id() { return "m" + std::to_string(++counters_.microtasks); }
  std::string submission_id() { return "s" + std::to_string(++counters_.submissions); }
  std::string assignment_id() { return "a" + std::to_string(++counters_.assignments); }
  std::string issue_id() { return "i" + std::to_string(++counters_.issues); }
  std::string question_id() { return "q" + std::to_string(++counters_.questions); }
  std::string answer_id() { return "ans" + std::to_string(++counters_.answers); }
  std::string notification_id() { return "n" + std::to_string(++counters_.notifications); }

  Timestamp now() const { return now_; }
  std::int64_t next_sequence() const { return sequence_ + 1; }
  std::vector<ProjectEvent> take() { return std::move(events_); }

 private:
  std::int64_t sequence_;
  std::int64_t batch_;
  Timestamp now_;
  IdCounters counters_;
  std::vector<ProjectEvent> events_;
};

}  // namespace crowdms
