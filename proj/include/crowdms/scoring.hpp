#pragma once

#include <cstdint>
#include <map>
#include <string_view>
#include <vector>

#include "crowdms/model.hpp"

namespace crowdms {

enum class AwardReason { ImplementerAward, ReviewerAward };

std::string_view to_string(AwardReason r);

struct Award {
  AwardReason reason = AwardReason::ReviewerAward;
  int stars = 0;  // ImplementerAward only
};

/// 2 points per star for the implementer, a flat 5 for the reviewer.
/// Throws WorkflowError(Validation) for stars outside [1,5].
int points_for(const Award& award);

constexpr int kReviewerPoints = 5;
constexpr int kPointsPerStar = 2;

struct LedgerEntry {
  std::int64_t sequence = 0;
  int points = 0;
  AwardReason reason = AwardReason::ReviewerAward;
  int stars = 0;
  bool operator==(const LedgerEntry&) const = default;
};

/// Append-only per-worker award history for one project.
class ScoreLedger {
 public:
  void record(const WorkerId& worker, LedgerEntry entry);
  int total(const WorkerId& worker) const;
  const std::map<WorkerId, std::vector<LedgerEntry>>& entries() const { return perWorker_; }
  bool empty() const { return perWorker_.empty(); }

  bool operator==(const ScoreLedger&) const = default;

 private:
  std::map<WorkerId, std::vector<LedgerEntry>> perWorker_;
};

struct LeaderboardRow {
  WorkerId workerId;
  int total = 0;
  bool operator==(const LeaderboardRow&) const = default;
};

/// Descending by total; ties go to the worker whose first award came earliest.
std::vector<LeaderboardRow> leaderboard(const ScoreLedger& ledger);

void to_json(Value& j, const ScoreLedger& l);
void from_json(const Value& j, ScoreLedger& l);

}  // namespace crowdms
