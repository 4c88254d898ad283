#include <gtest/gtest.h>

#include <httplib.h>

#include <atomic>
#include <thread>

#include "crowdms/event_log.hpp"
#include "crowdms/fixtures.hpp"
#include "crowdms/service.hpp"
#include "support.hpp"

using namespace crowdms;

namespace {

struct Harness {
  std::shared_ptr<std::atomic<Timestamp>> clock = std::make_shared<std::atomic<Timestamp>>(1000);
  std::unique_ptr<Service> service;

  explicit Harness(std::filesystem::path dataDir = {}) { reset(std::move(dataDir)); }

  void reset(std::filesystem::path dataDir) {
    ServiceConfig c;
    c.dataDir = std::move(dataDir);
    c.authenticator = std::make_shared<StaticTokenAuthenticator>(std::map<std::string, Principal>{
        {"client-token", {Role::Client, "alice"}},
        {"other-client", {Role::Client, "bob"}},
        {"w1-token", {Role::Worker, "w1"}},
        {"w2-token", {Role::Worker, "w2"}},
    });
    auto clk = clock;
    c.clock = [clk] { return clk->load(); };
    service = std::make_unique<Service>(std::move(c));
  }

  ServiceResponse call(const std::string& method, const std::string& path, const std::string& token,
                       const Value& body = Value()) {
    return service->handle(method, path, token.empty() ? "" : "Bearer " + token,
                           body.is_null() ? "" : canonicalize(body));
  }

  std::string create(const ClientRequest& request) {
    auto r = call("POST", "/projects", "client-token", {{"request", request}});
    EXPECT_EQ(r.status, 201) << canonicalize(r.body);
    return r.body.at("projectId").get<std::string>();
  }

  Value fetch(const std::string& pid, const std::string& token) {
    auto r = call("POST", "/projects/" + pid + "/microtasks/fetch", token);
    EXPECT_EQ(r.status, 200) << canonicalize(r.body);
    return r.body;
  }
};

Value payload(const SubmissionPayload& p) {
  Value v = p;
  return v;
}

}  // namespace

TEST(Service, RouteTable) {
  EXPECT_EQ(route_table().size(), 13u);
  EXPECT_EQ(http_status(ErrorCode::Validation), 400);
  EXPECT_EQ(http_status(ErrorCode::Unauthorized), 401);
  EXPECT_EQ(http_status(ErrorCode::Forbidden), 403);
  EXPECT_EQ(http_status(ErrorCode::NotFound), 404);
  EXPECT_EQ(http_status(ErrorCode::StaleAssignment), 409);
  EXPECT_EQ(http_status(ErrorCode::Incomplete), 409);
  EXPECT_EQ(http_status(ErrorCode::Corrupt), 500);
}

TEST(Service, CreateAndDashboard) {
  Harness h;
  const auto pid = h.create(fixtures::todo_request());
  EXPECT_EQ(pid, "p1");
  auto dash = h.call("GET", "/projects/p1/dashboard", "w1-token");
  ASSERT_EQ(dash.status, 200);
  EXPECT_EQ(dash.body.at("availableMicrotasks"), 12);
  EXPECT_EQ(dash.body.at("functions").size(), 12u);
  auto got = h.fetch(pid, "w1-token");
  EXPECT_EQ(got.at("status"), "Assigned");
  EXPECT_EQ(got.at("assignment").at("assignmentId"), "p1-a1");
  EXPECT_EQ(got.at("assignment").at("deadline"), 1000 + 900);
  EXPECT_EQ(got.at("assignment").at("warningAt"), 1000 + 840);
  dash = h.call("GET", "/projects/p1/dashboard", "w1-token");
  EXPECT_EQ(dash.body.at("availableMicrotasks"), 11);
}

TEST(Service, CreateValidation) {
  Harness h;
  auto bad = fixtures::todo_request();
  bad.endpoints.clear();
  auto r = h.call("POST", "/projects", "client-token", {{"request", bad}});
  EXPECT_EQ(r.status, 400);
  EXPECT_EQ(r.body.at("code"), "validation");
  EXPECT_FALSE(r.body.at("violations").empty());
  EXPECT_EQ(h.call("POST", "/projects", "w1-token", {{"request", fixtures::todo_request()}}).status, 403);
  EXPECT_EQ(h.service->handle("POST", "/projects", "Bearer client-token", "{not json").status, 400);
}

TEST(Service, Auth) {
  Harness h;
  h.create(support::small_request(1));
  EXPECT_EQ(h.call("GET", "/projects/p1/dashboard", "").status, 401);
  EXPECT_EQ(h.call("GET", "/projects/p1/dashboard", "nope").status, 401);
  EXPECT_EQ(h.call("POST", "/projects/p1/microtasks/fetch", "client-token").status, 403);
  EXPECT_EQ(h.call("GET", "/workers/w2/notifications", "w1-token").status, 403);
  EXPECT_EQ(h.call("GET", "/projects/p9/dashboard", "w1-token").status, 404);
  EXPECT_EQ(h.call("GET", "/nowhere", "w1-token").status, 404);
}

TEST(Service, EmptyQueue) {
  Harness h;
  const auto pid = h.create(support::small_request(1));
  h.fetch(pid, "w1-token");
  EXPECT_EQ(h.fetch(pid, "w2-token").at("status"), "NoneAvailable");
}

TEST(Service, SubmitAfterExpiryIsStale) {
  Harness h;
  const auto pid = h.create(support::small_request(1));
  const auto a = h.fetch(pid, "w1-token").at("assignment").at("assignmentId").get<std::string>();
  *h.clock += minutes(15) + 1;
  auto r = h.call("POST", "/assignments/" + a + "/submit", "w1-token",
                  {{"payload", payload(support::contribution("function fn1(x) { return x; }"))}});
  EXPECT_EQ(r.status, 409);
  EXPECT_EQ(r.body.at("code"), "stale-assignment");
  auto dash = h.call("GET", "/projects/" + pid + "/dashboard", "w1-token");
  EXPECT_EQ(dash.body.at("availableMicrotasks"), 1);
  auto notes = h.call("GET", "/workers/w1/notifications", "w1-token");
  ASSERT_EQ(notes.body.at("notifications").size(), 1u);
  EXPECT_EQ(notes.body.at("notifications").at(0).at("kind"), "TimeWarning");
  EXPECT_EQ(notes.body.at("notifications").at(0).at("assignmentId"), a);
}

TEST(Service, SubmitReviewAndIdempotency) {
  Harness h;
  const auto pid = h.create(support::small_request(1));
  const auto a = h.fetch(pid, "w1-token").at("assignment").at("assignmentId").get<std::string>();
  const Value body{{"payload", payload(support::contribution("function fn1(x) { return x; }"))}, {"clientToken", "tok-1"}};
  auto first = h.call("POST", "/assignments/" + a + "/submit", "w1-token", body);
  ASSERT_EQ(first.status, 200) << canonicalize(first.body);
  auto again = h.call("POST", "/assignments/" + a + "/submit", "w1-token", body);
  EXPECT_EQ(again.status, 200);
  EXPECT_EQ(again.body, first.body);

  auto review = h.fetch(pid, "w2-token").at("assignment");
  EXPECT_EQ(review.at("kind"), "Review");
  EXPECT_EQ(review.at("submission").at("id"), first.body.at("submissionId"));
  const auto ra = review.at("assignmentId").get<std::string>();
  EXPECT_EQ(h.call("POST", "/assignments/" + ra + "/submit", "w2-token", {{"stars", 2}}).status, 400);
  const Value rb{{"stars", 2}, {"feedback", "empty input breaks"}, {"clientToken", "tok-2"}};
  auto rr = h.call("POST", "/assignments/" + ra + "/submit", "w2-token", rb);
  ASSERT_EQ(rr.status, 200) << canonicalize(rr.body);
  EXPECT_EQ(rr.body.at("accepted"), false);
  EXPECT_EQ(h.call("POST", "/assignments/" + ra + "/submit", "w2-token", rb).body, rr.body);

  auto board = h.call("GET", "/projects/" + pid + "/leaderboard", "w1-token");
  EXPECT_EQ(board.body.at("leaderboard").at(0).at("workerId"), "w2");
  EXPECT_EQ(board.body.at("leaderboard").at(0).at("total"), 5);
  auto rework = h.fetch(pid, "w1-token").at("assignment");
  EXPECT_EQ(rework.at("reworkFeedback"), "empty input breaks");
}

TEST(Service, SkipAndRunTests) {
  Harness h;
  const auto pid = h.create(support::small_request(2));
  const auto a = h.fetch(pid, "w1-token").at("assignment").at("assignmentId").get<std::string>();
  TestCase t;
  t.id = "t1";
  t.inputs = Value::array({"a"});
  t.expectedOutput = "a";
  auto run = h.call("POST", "/assignments/" + a + "/run-tests", "w1-token",
                    {{"code", ""}, {"tests", Value::array({t})}});
  ASSERT_EQ(run.status, 200) << canonicalize(run.body);
  EXPECT_EQ(run.body.at("perTest").at(0).at("status"), "Failed");
  EXPECT_EQ(h.call("POST", "/assignments/" + a + "/run-tests", "w2-token", Value::object()).status, 409);
  auto sk = h.call("POST", "/assignments/" + a + "/skip", "w1-token");
  EXPECT_EQ(sk.status, 200);
  EXPECT_EQ(sk.body.at("availableMicrotasks"), 2);
  EXPECT_EQ(h.call("POST", "/assignments/" + a + "/skip", "w1-token").status, 409);
}

TEST(Service, QuestionsAndAnswers) {
  Harness h;
  const auto pid = h.create(support::small_request(1));
  auto q1 = h.call("POST", "/projects/" + pid + "/questions", "w1-token",
                   {{"text", "How can I store a todo object in the database?"}});
  ASSERT_EQ(q1.status, 201);
  EXPECT_EQ(q1.body.at("id"), "p1-q1");
  *h.clock += 60;
  h.call("POST", "/projects/" + pid + "/questions", "w2-token", {{"text", "Second?"}});
  *h.clock += 60;
  auto ans = h.call("POST", "/questions/p1-q1/answers", "w2-token", {{"text", "Call save()."}});
  ASSERT_EQ(ans.status, 201) << canonicalize(ans.body);
  EXPECT_EQ(h.call("POST", "/questions/p1-q9/answers", "w2-token", {{"text", "?"}}).status, 404);
  EXPECT_EQ(h.call("POST", "/projects/" + pid + "/questions", "w2-token", {{"text", " "}}).status, 400);

  auto list = h.call("GET", "/projects/" + pid + "/questions", "client-token");
  const auto& threads = list.body.at("threads");
  ASSERT_EQ(threads.size(), 2u);
  EXPECT_EQ(threads.at(0).at("question").at("text"), "How can I store a todo object in the database?");
  EXPECT_EQ(threads.at(0).at("answers").size(), 1u);
  EXPECT_EQ(threads.at(1).at("answers").size(), 0u);
}

TEST(Service, ResolveIssue) {
  Harness h;
  const auto pid = h.create(support::small_request(1));
  const auto a = h.fetch(pid, "w1-token").at("assignment").at("assignmentId").get<std::string>();
  ASSERT_EQ(h.call("POST", "/assignments/" + a + "/submit", "w1-token",
                   {{"payload", payload(support::issue_report("what is x?"))}})
                .status,
            200);
  const std::string url = "/projects/" + pid + "/issues/i1/resolve";
  EXPECT_EQ(h.call("POST", url, "w1-token", {{"description", "x is a name"}}).status, 403);
  EXPECT_EQ(h.call("POST", url, "other-client", {{"description", "x is a name"}}).status, 403);
  EXPECT_EQ(h.call("POST", url, "client-token", {{"description", "x is a name"}}).status, 200);
  EXPECT_EQ(h.call("POST", url, "client-token", {{"description", "x is a name"}}).status, 409);
  EXPECT_EQ(h.fetch(pid, "w2-token").at("assignment").at("function").at("description"), "x is a name");
  auto notes = h.call("GET", "/workers/w1/notifications", "w1-token");
  EXPECT_EQ(notes.body.at("notifications").back().at("kind"), "IssueResolved");
}

TEST(Service, PublishRequiresComplete) {
  support::TempDir dir("crowdms-svc");
  Harness h(dir.path());
  const auto pid = h.create(support::small_request(1));
  auto r = h.call("POST", "/projects/" + pid + "/publish", "client-token", Value::object());
  EXPECT_EQ(r.status, 409);
  EXPECT_EQ(r.body.at("code"), "incomplete");
  EXPECT_EQ(h.call("POST", "/projects/" + pid + "/publish", "other-client", Value::object()).status, 403);
  auto forced = h.call("POST", "/projects/" + pid + "/publish", "client-token", {{"force", true}});
  ASSERT_EQ(forced.status, 200) << canonicalize(forced.body);
  EXPECT_TRUE(std::filesystem::exists(std::filesystem::path(forced.body.at("location").get<std::string>()) /
                                      "manifest.json"));
}

TEST(Service, PersistsAcrossRestart) {
  support::TempDir dir("crowdms-svc");
  Harness h(dir.path());
  const auto p1 = h.create(support::small_request(2));
  const auto p2 = h.create(support::small_request(1));
  const auto a = h.fetch(p1, "w1-token").at("assignment").at("assignmentId").get<std::string>();
  h.call("POST", "/assignments/" + a + "/submit", "w1-token",
         {{"payload", payload(support::contribution("function fn1(x) { return x; }"))}});
  h.call("POST", "/projects/" + p1 + "/questions", "w2-token", {{"text", "Where is the spec?"}});
  const auto dashBefore = h.call("GET", "/projects/" + p1 + "/dashboard", "w1-token").body;

  h.reset(dir.path());
  EXPECT_EQ(h.call("GET", "/projects/" + p1 + "/dashboard", "w1-token").body, dashBefore);
  EXPECT_EQ(h.call("GET", "/projects/" + p2 + "/dashboard", "w1-token").body.at("availableMicrotasks"), 1);
  EXPECT_EQ(h.call("GET", "/projects/" + p1 + "/questions", "w1-token").body.at("threads").size(), 1u);
  EXPECT_EQ(h.create(support::small_request(1)), "p3");

  EventStore store(dir.path());
  EXPECT_EQ(store.project_ids(), (std::vector<std::string>{"p1", "p2", "p3"}));
  EXPECT_TRUE(replay_events(store.events(p1)).violations.empty());
  EXPECT_EQ(store.load(p2).log(), store.events(p2));
}

TEST(Service, SnapshotResumeMatchesReplay) {
  support::TempDir dir("crowdms-store");
  EventStore store(dir.path(), 4);
  auto p = Project::create("p1", "client", support::small_request(3), {}, 0);
  store.append("p1", p.log(), p.state());
  std::size_t before = p.log().size();
  support::fetch_and_submit(p, "w1", support::contribution("function fn1(x) { return x; }"), 0);
  p.fetch("w8", 100);
  p.fetch("w9", 100);
  support::fetch_and_review(p, "w2", 4, "", 200);
  store.append("p1", std::vector<ProjectEvent>(p.log().begin() + static_cast<long>(before), p.log().end()), p.state());
  before = p.log().size();
  p.fetch("w3", 400);
  store.append("p1", std::vector<ProjectEvent>(p.log().begin() + static_cast<long>(before), p.log().end()), p.state());
  EXPECT_TRUE(std::filesystem::exists(store.project_dir("p1") / "snapshot.json"));
  const auto loaded = store.load("p1");
  EXPECT_EQ(loaded.state(), p.state());
  EXPECT_EQ(loaded.log(), p.log());
}

TEST(Service, HttpRoundTrip) {
  Harness h;
  httplib::Server server;
  h.service->mount(server);
  const int port = server.bind_to_any_port("127.0.0.1");
  ASSERT_GT(port, 0);
  std::thread t([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  httplib::Client client("127.0.0.1", port);
  httplib::Headers auth{{"Authorization", "Bearer client-token"}};
  const Value body{{"request", support::small_request(1)}};
  auto res = client.Post("/projects", auth, canonicalize(body), "application/json");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 201);
  EXPECT_EQ(parse_value(res->body).at("projectId"), "p1");
  auto dash = client.Get("/projects/p1/dashboard", httplib::Headers{{"Authorization", "Bearer w1-token"}});
  ASSERT_TRUE(dash);
  EXPECT_EQ(dash->status, 200);
  EXPECT_EQ(parse_value(dash->body).at("availableMicrotasks"), 1);
  auto denied = client.Get("/projects/p1/dashboard");
  ASSERT_TRUE(denied);
  EXPECT_EQ(denied->status, 401);

  server.stop();
  t.join();
}
