#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "crowdms/event_log.hpp"
#include "support.hpp"

using namespace crowdms;
using support::contribution;
using support::fetch_and_review;
using support::fetch_and_submit;

namespace {

Project reviewed_project() {
  auto p = Project::create("p", "client", support::small_request(1), {}, 0);
  fetch_and_submit(p, "w1", contribution("function fn1(x) { return x; }"), 0);
  fetch_and_review(p, "w2", 4, "", 200);
  fetch_and_submit(p, "w3", contribution("function fn1(x) { return x + x; }"), 400);
  fetch_and_review(p, "w1", 2, "wrong output", 600);
  return p;
}

bool has(const std::vector<InvariantViolation>& vs, const std::string& invariant) {
  return std::any_of(vs.begin(), vs.end(), [&](const InvariantViolation& v) { return v.invariant == invariant; });
}

}  // namespace

TEST(EventLog, RoundTripThroughFile) {
  auto p = reviewed_project();
  support::TempDir dir("crowdms-log");
  const auto path = dir.path() / "events.ndjson";
  save_log(path, p.log());
  const auto loaded = load_log(path);
  EXPECT_EQ(loaded, p.log());
  EXPECT_EQ(fold(loaded), p.state());
  const auto report = replay_events(loaded);
  EXPECT_TRUE(report.violations.empty());
  EXPECT_EQ(report.events, p.log().size());
  EXPECT_EQ(report.counts.reviewsRecorded, 2);
  EXPECT_EQ(report.counts.reviewsGenerated, 2);
}

TEST(EventLog, EncodingIsCanonical) {
  auto p = reviewed_project();
  std::ostringstream a, b;
  write_events(a, p.log());
  std::istringstream in(a.str());
  write_events(b, read_events(in));
  EXPECT_EQ(a.str(), b.str());
}

TEST(EventLog, CorruptLineNamesSequence) {
  auto p = reviewed_project();
  std::ostringstream out;
  write_events(out, p.log());
  std::string text = out.str();
  // Truncate the fourth line.
  std::size_t pos = 0;
  for (int i = 0; i < 3; ++i) pos = text.find('\n', pos) + 1;
  text.insert(pos + 10, "\n");
  std::istringstream in(text);
  try {
    read_events(in);
    FAIL() << "expected corrupt log";
  } catch (const LogCorruptError& e) {
    EXPECT_EQ(e.sequence(), 4);
    EXPECT_EQ(e.code(), ErrorCode::Corrupt);
    EXPECT_NE(std::string(e.what()).find("sequence 4"), std::string::npos);
  }
}

TEST(EventLog, DeletedReviewBreaksConservation) {
  auto p = reviewed_project();
  auto log = p.log();
  auto it = std::find_if(log.rbegin(), log.rend(),
                         [](const ProjectEvent& e) { return e.type == EventType::ReviewRecorded; });
  ASSERT_NE(it, log.rend());
  const auto batch = it->batch;
  log.erase(std::next(it).base());
  // Keep the log well formed up to the tampered batch.
  log.erase(std::remove_if(log.begin(), log.end(), [&](const ProjectEvent& e) { return e.batch > batch; }), log.end());
  for (std::size_t i = 0; i < log.size(); ++i) log[i].sequence = static_cast<std::int64_t>(i + 1);
  const auto report = replay_events(log);
  EXPECT_TRUE(has(report.violations, "conservation"));
}

TEST(EventLog, EmptyLog) {
  std::istringstream in("");
  EXPECT_TRUE(read_events(in).empty());
  const auto report = replay_events({});
  EXPECT_TRUE(report.violations.empty());
  EXPECT_EQ(report.events, 0u);
  EXPECT_FALSE(report.state.created);
}

TEST(EventLog, SequenceGapIsReported) {
  auto log = reviewed_project().log();
  log.erase(log.begin() + 30);
  std::vector<ProjectEvent> prefix(log.begin(), log.begin() + 31);
  try {
    const auto report = replay_events(prefix);
    EXPECT_TRUE(has(report.violations, "sequence"));
  } catch (const LogCorruptError&) {
    SUCCEED();
  }
}

TEST(EventLog, MissingFileIsIoError) {
  try {
    load_log("/nonexistent/crowdms/events.ndjson");
    FAIL();
  } catch (const WorkflowError& e) {
    EXPECT_EQ(e.code(), ErrorCode::Io);
  }
}
