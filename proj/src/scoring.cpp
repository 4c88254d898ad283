#include "crowdms/scoring.hpp"

#include <algorithm>
#include <numeric>

namespace crowdms {

std::string_view to_string(AwardReason r) {
  return r == AwardReason::ImplementerAward ? "ImplementerAward" : "ReviewerAward";
}

int points_for(const Award& award) {
  if (award.reason == AwardReason::ReviewerAward) return kReviewerPoints;
  if (award.stars < 1 || award.stars > 5)
    throw WorkflowError(ErrorCode::Validation, "stars must be in [1,5], got " + std::to_string(award.stars));
  return kPointsPerStar * award.stars;
}

void ScoreLedger::record(const WorkerId& worker, LedgerEntry entry) {
  perWorker_[worker].push_back(entry);
}

int ScoreLedger::total(const WorkerId& worker) const {
  auto it = perWorker_.find(worker);
  if (it == perWorker_.end()) return 0;
  return std::accumulate(it->second.begin(), it->second.end(), 0,
                         [](int acc, const LedgerEntry& e) { return acc + e.points; });
}

std::vector<LeaderboardRow> leaderboard(const ScoreLedger& ledger) {
  struct Ranked {
    LeaderboardRow row;
    std::int64_t firstSequence;
  };
  std::vector<Ranked> ranked;
  for (const auto& [worker, entries] : ledger.entries()) {
    if (entries.empty()) continue;
    ranked.push_back({{worker, ledger.total(worker)}, entries.front().sequence});
  }
  std::sort(ranked.begin(), ranked.end(), [](const Ranked& a, const Ranked& b) {
    if (a.row.total != b.row.total) return a.row.total > b.row.total;
    return a.firstSequence < b.firstSequence;
  });
  std::vector<LeaderboardRow> rows;
  rows.reserve(ranked.size());
  for (auto& r : ranked) rows.push_back(std::move(r.row));
  return rows;
}

void to_json(Value& j, const ScoreLedger& l) {
  j = Value::object();
  for (const auto& [worker, entries] : l.entries()) {
    Value arr = Value::array();
    for (const auto& e : entries)
      arr.push_back({{"sequence", e.sequence}, {"points", e.points}, {"reason", to_string(e.reason)}, {"stars", e.stars}});
    j[worker] = std::move(arr);
  }
}

void from_json(const Value& j, ScoreLedger& l) {
  l = ScoreLedger{};
  for (auto it = j.begin(); it != j.end(); ++it) {
    for (const auto& e : it.value()) {
      l.record(it.key(), {e.at("sequence").get<std::int64_t>(), e.at("points").get<int>(),
                          e.at("reason") == "ImplementerAward" ? AwardReason::ImplementerAward
                                                               : AwardReason::ReviewerAward,
                          e.value("stars", 0)});
    }
  }
}

}  // namespace crowdms
