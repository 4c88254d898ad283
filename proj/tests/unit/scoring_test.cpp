#include <gtest/gtest.h>

#include "crowdms/scoring.hpp"

using namespace crowdms;

TEST(PointsFor, ImplementerTwoPerStar) {
  EXPECT_EQ(points_for({AwardReason::ImplementerAward, 5}), 10);
  EXPECT_EQ(points_for({AwardReason::ImplementerAward, 1}), 2);
  EXPECT_EQ(points_for({AwardReason::ImplementerAward, 4}), 8);
}

TEST(PointsFor, ReviewerFlatFive) { EXPECT_EQ(points_for({AwardReason::ReviewerAward, 0}), 5); }

TEST(PointsFor, StarsOutOfRange) {
  EXPECT_THROW(points_for({AwardReason::ImplementerAward, 0}), WorkflowError);
  EXPECT_THROW(points_for({AwardReason::ImplementerAward, 6}), WorkflowError);
}

TEST(Leaderboard, DescendingByTotal) {
  ScoreLedger ledger;
  ledger.record("low", {1, 54, AwardReason::ReviewerAward, 0});
  ledger.record("high", {2, 241, AwardReason::ReviewerAward, 0});
  const auto rows = leaderboard(ledger);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0], (LeaderboardRow{"high", 241}));
  EXPECT_EQ(rows[1], (LeaderboardRow{"low", 54}));
}

TEST(Leaderboard, EmptyLedger) { EXPECT_TRUE(leaderboard(ScoreLedger{}).empty()); }

TEST(Leaderboard, TiesGoToEarliestFirstAward) {
  ScoreLedger ledger;
  ledger.record("zed", {3, 10, AwardReason::ImplementerAward, 5});
  ledger.record("amy", {7, 5, AwardReason::ReviewerAward, 0});
  ledger.record("amy", {9, 5, AwardReason::ReviewerAward, 0});
  const auto rows = leaderboard(ledger);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].workerId, "zed");
  EXPECT_EQ(rows[1].workerId, "amy");
}

TEST(Leaderboard, TotalsEqualLedgerSums) {
  ScoreLedger ledger;
  int expected = 0;
  for (int i = 1; i <= 5; ++i) {
    const int pts = points_for({AwardReason::ImplementerAward, i});
    ledger.record("w", {i, pts, AwardReason::ImplementerAward, i});
    expected += pts;
  }
  EXPECT_EQ(ledger.total("w"), expected);
  EXPECT_EQ(leaderboard(ledger).front().total, expected);
}

TEST(ScoreLedgerCodec, RoundTrip) {
  ScoreLedger ledger;
  ledger.record("w", {4, 8, AwardReason::ImplementerAward, 4});
  ledger.record("r", {5, 5, AwardReason::ReviewerAward, 0});
  Value j = ledger;
  EXPECT_EQ(j.get<ScoreLedger>(), ledger);
}
