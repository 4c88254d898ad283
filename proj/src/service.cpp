#include "crowdms/service.hpp"

#include <httplib.h>

#include <chrono>
#include <fstream>
#include <sstream>

#include "crowdms/event_log.hpp"
#include "crowdms/mock_executor.hpp"

namespace crowdms {
namespace {

std::vector<std::string> split_path(const std::string& path) {
  std::vector<std::string> out;
  std::string cur;
  const auto end = path.find('?');
  for (char c : path.substr(0, end)) {
    if (c == '/') {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

/// "p1-a3" -> ("p1", "a3")
std::pair<std::string, std::string> split_external(const std::string& id) {
  const auto dash = id.find('-');
  if (dash == std::string::npos || dash == 0 || dash + 1 == id.size())
    throw WorkflowError(ErrorCode::NotFound, "unknown id " + id);
  return {id.substr(0, dash), id.substr(dash + 1)};
}

std::string external(const std::string& projectId, const std::string& id) { return projectId + "-" + id; }

void require_role(const Principal& who, Role role) {
  if (who.role != role)
    throw WorkflowError(ErrorCode::Forbidden,
                        role == Role::Client ? "client principal required" : "worker principal required");
}

std::string text_field(const Value& body, const char* key) {
  if (!body.is_object() || !body.contains(key) || !body.at(key).is_string()) return {};
  return body.at(key).get<std::string>();
}

ServiceResponse ok(Value body, int status = 200) { return {status, std::move(body)}; }

Value question_value(const std::string& pid, const Question& q) {
  return {{"id", external(pid, q.id)},
          {"projectId", pid},
          {"authorWorkerId", q.authorWorkerId},
          {"text", q.text},
          {"timestamp", q.timestamp}};
}

Value answer_value(const std::string& pid, const Answer& a) {
  return {{"id", external(pid, a.id)},
          {"questionId", external(pid, a.questionId)},
          {"authorWorkerId", a.authorWorkerId},
          {"text", a.text},
          {"timestamp", a.timestamp}};
}

Value leaderboard_value(const ProjectState& s) {
  Value rows = Value::array();
  for (const auto& r : leaderboard(s.scores)) rows.push_back({{"workerId", r.workerId}, {"total", r.total}});
  return rows;
}

template <typename T>
T decode(const Value& v, const char* what) {
  try {
    return v.get<T>();
  } catch (const Value::exception& e) {
    throw WorkflowError(ErrorCode::Validation, std::string("malformed ") + what, {{what, e.what()}});
  }
}

}  // namespace

int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::Validation: return 400;
    case ErrorCode::Unauthorized: return 401;
    case ErrorCode::Forbidden: return 403;
    case ErrorCode::NotFound: return 404;
    case ErrorCode::StaleAssignment:
    case ErrorCode::Conflict:
    case ErrorCode::Incomplete: return 409;
    case ErrorCode::Corrupt:
    case ErrorCode::Io: return 500;
  }
  return 500;
}

Value error_body(const WorkflowError& e) {
  Value violations = Value::array();
  for (const auto& v : e.violations()) violations.push_back({{"path", v.path}, {"message", v.message}});
  return {{"code", to_string(e.code())}, {"message", e.what()}, {"violations", violations}};
}

// ---------------------------------------------------------------------------

StaticTokenAuthenticator StaticTokenAuthenticator::from_value(const Value& value) {
  if (!value.is_object()) throw WorkflowError(ErrorCode::Validation, "token file must map tokens to principals");
  std::map<std::string, Principal> tokens;
  for (const auto& [token, p] : value.items()) {
    const auto role = p.value("role", "");
    if (role != "client" && role != "worker")
      throw WorkflowError(ErrorCode::Validation, "token " + token + " has role '" + role + "'");
    tokens[token] = {role == "client" ? Role::Client : Role::Worker, p.value("id", "")};
    if (tokens[token].id.empty()) throw WorkflowError(ErrorCode::Validation, "token " + token + " has no id");
  }
  return StaticTokenAuthenticator(std::move(tokens));
}

StaticTokenAuthenticator StaticTokenAuthenticator::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw WorkflowError(ErrorCode::Io, "cannot read token file " + path.string());
  try {
    return from_value(Value::parse(in));
  } catch (const Value::exception& e) {
    throw WorkflowError(ErrorCode::Validation, "token file " + path.string() + ": " + e.what());
  }
}

std::optional<Principal> StaticTokenAuthenticator::authenticate(const std::string& token) const {
  auto it = tokens_.find(token);
  if (it == tokens_.end()) return std::nullopt;
  return it->second;
}

// ---------------------------------------------------------------------------

EventStore::EventStore(std::filesystem::path dataDir, int snapshotEvery)
    : dir_(std::move(dataDir)), snapshotEvery_(snapshotEvery) {
  std::error_code ec;
  std::filesystem::create_directories(dir_ / "projects", ec);
  if (ec) throw WorkflowError(ErrorCode::Io, "cannot create " + (dir_ / "projects").string() + ": " + ec.message());
}

std::filesystem::path EventStore::project_dir(const std::string& projectId) const {
  return dir_ / "projects" / projectId;
}

std::vector<std::string> EventStore::project_ids() const {
  std::vector<std::string> ids;
  for (const auto& entry : std::filesystem::directory_iterator(dir_ / "projects"))
    if (entry.is_directory() && std::filesystem::exists(entry.path() / "events.ndjson"))
      ids.push_back(entry.path().filename().string());
  std::sort(ids.begin(), ids.end());
  return ids;
}

bool EventStore::exists(const std::string& projectId) const {
  return std::filesystem::exists(project_dir(projectId) / "events.ndjson");
}

std::vector<ProjectEvent> EventStore::events(const std::string& projectId) const {
  if (!exists(projectId)) throw WorkflowError(ErrorCode::NotFound, "unknown project " + projectId);
  return load_log(project_dir(projectId) / "events.ndjson");
}

Project EventStore::load(const std::string& projectId) const {
  auto log = events(projectId);
  const auto snapshotPath = project_dir(projectId) / "snapshot.json";
  if (std::filesystem::exists(snapshotPath)) {
    std::ifstream in(snapshotPath);
    try {
      ProjectState snapshot = Value::parse(in).get<ProjectState>();
      if (snapshot.lastSequence <= static_cast<std::int64_t>(log.size()))
        return Project::resume(std::move(snapshot), std::move(log));
    } catch (const std::exception&) {
      // An unreadable snapshot is only a cache; fall back to the full log.
    }
  }
  return Project::replay(std::move(log));
}

void EventStore::append(const std::string& projectId, const std::vector<ProjectEvent>& events,
                        const ProjectState& state) {
  if (events.empty()) return;
  const auto dir = project_dir(projectId);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  {
    std::ofstream out(dir / "events.ndjson", std::ios::app | std::ios::binary);
    write_events(out, events);
    out.flush();
    if (!out) throw WorkflowError(ErrorCode::Io, "cannot append to " + (dir / "events.ndjson").string());
  }
  const auto before = events.front().sequence - 1;
  if (snapshotEvery_ > 0 && before / snapshotEvery_ != state.lastSequence / snapshotEvery_) {
    Value snapshot;
    to_json(snapshot, state);
    const auto tmp = dir / "snapshot.json.tmp";
    {
      std::ofstream out(tmp, std::ios::trunc | std::ios::binary);
      out << canonicalize(snapshot) << "\n";
      if (!out) throw WorkflowError(ErrorCode::Io, "cannot write " + tmp.string());
    }
    std::filesystem::rename(tmp, dir / "snapshot.json", ec);
    if (ec) throw WorkflowError(ErrorCode::Io, "cannot replace snapshot: " + ec.message());
  }
}

// ---------------------------------------------------------------------------

const std::vector<RouteSpec>& route_table() {
  static const std::vector<RouteSpec> routes = {
      {"POST", "/projects"},
      {"GET", "/projects/{id}/dashboard"},
      {"POST", "/projects/{id}/microtasks/fetch"},
      {"POST", "/assignments/{id}/submit"},
      {"POST", "/assignments/{id}/skip"},
      {"POST", "/assignments/{id}/run-tests"},
      {"GET", "/projects/{id}/leaderboard"},
      {"POST", "/projects/{id}/questions"},
      {"POST", "/questions/{id}/answers"},
      {"GET", "/projects/{id}/questions"},
      {"GET", "/workers/{id}/notifications"},
      {"POST", "/projects/{id}/issues/{issueId}/resolve"},
      {"POST", "/projects/{id}/publish"},
  };
  return routes;
}

Service::Service(ServiceConfig config) : config_(std::move(config)) {
  if (!config_.authenticator) config_.authenticator = std::make_shared<StaticTokenAuthenticator>();
  if (!config_.executor) config_.executor = std::make_shared<MockExecutor>();
  if (!config_.dataDir.empty()) {
    store_.emplace(config_.dataDir, config_.snapshotEvery);
    for (const auto& id : store_->project_ids()) {
      auto s = std::make_shared<Slot>();
      s->project = store_->load(id);
      projects_[id] = s;
      if (id.size() > 1 && id[0] == 'p' && std::all_of(id.begin() + 1, id.end(), ::isdigit))
        nextProjectNumber_ = std::max(nextProjectNumber_, std::stoi(id.substr(1)) + 1);
    }
  }
  if (!config_.publishTarget && !config_.dataDir.empty()) {
    const auto root = config_.dataDir / "published";
    config_.publishTarget = [root](const std::string& id) -> std::unique_ptr<DeployTarget> {
      return std::make_unique<LocalDirectoryTarget>(root / id);
    };
  }
}

Timestamp Service::now() const {
  if (config_.clock) return config_.clock();
  return std::chrono::duration_cast<std::chrono::seconds>(std::chrono::system_clock::now().time_since_epoch()).count();
}

std::shared_ptr<Service::Slot> Service::slot(const std::string& projectId) {
  std::lock_guard lock(registryMutex_);
  auto it = projects_.find(projectId);
  if (it == projects_.end()) throw WorkflowError(ErrorCode::NotFound, "unknown project " + projectId);
  return it->second;
}

std::string Service::new_project_id() {
  std::lock_guard lock(registryMutex_);
  return "p" + std::to_string(nextProjectNumber_++);
}

void Service::persist(const std::string& projectId, Project& project, std::int64_t before) {
  if (!store_) return;
  try {
    store_->append(projectId, project.events_after(before), project.state());
  } catch (const WorkflowError&) {
    // Keep memory consistent with what reached disk.
    project = store_->load(projectId);
    throw;
  }
}

void Service::command(const std::string& projectId, Project& project, const std::function<void()>& fn) {
  const auto before = project.state().lastSequence;
  try {
    fn();
  } catch (const WorkflowError&) {
    persist(projectId, project, before);
    throw;
  }
  persist(projectId, project, before);
}

ServiceResponse Service::handle(const std::string& method, const std::string& path, const std::string& authorization,
                                const std::string& body) {
  try {
    const std::string prefix = "Bearer ";
    if (authorization.rfind(prefix, 0) != 0)
      throw WorkflowError(ErrorCode::Unauthorized, "missing bearer token");
    const auto who = config_.authenticator->authenticate(authorization.substr(prefix.size()));
    if (!who) throw WorkflowError(ErrorCode::Unauthorized, "unknown bearer token");
    Value parsed = Value::object();
    if (!body.empty()) {
      parsed = Value::parse(body, nullptr, false);
      if (parsed.is_discarded()) throw WorkflowError(ErrorCode::Validation, "request body is not a valid value");
    }
    return dispatch(method, split_path(path), *who, parsed);
  } catch (const WorkflowError& e) {
    return {http_status(e.code()), error_body(e)};
  } catch (const std::exception& e) {
    return {500, error_body(WorkflowError(ErrorCode::Io, e.what()))};
  }
}

ServiceResponse Service::dispatch(const std::string& method, const std::vector<std::string>& seg,
                                  const Principal& who, const Value& body) {
  const auto n = seg.size();
  auto route = [&](const char* m, std::initializer_list<const char*> pattern) {
    if (method != m || n != pattern.size()) return false;
    std::size_t i = 0;
    for (const char* part : pattern) {
      if (part[0] != '{' && seg[i] != part) return false;
      ++i;
    }
    return true;
  };
  auto with_project = [&](const std::string& pid, auto&& fn) {
    auto s = slot(pid);
    std::lock_guard lock(s->mutex);
    return fn(*s->project);
  };

  if (route("POST", {"projects"})) return create_project(who, body);
  if (route("GET", {"projects", "{}", "dashboard"}))
    return with_project(seg[1], [&](Project& p) { return dashboard(p); });
  if (route("POST", {"projects", "{}", "microtasks", "fetch"}))
    return with_project(seg[1], [&](Project& p) { return fetch(seg[1], p, who); });
  if (route("GET", {"projects", "{}", "leaderboard"}))
    return with_project(seg[1], [&](Project& p) { return ok({{"leaderboard", leaderboard_value(p.state())}}); });
  if (route("POST", {"projects", "{}", "questions"}))
    return with_project(seg[1], [&](Project& p) { return post_question_route(seg[1], p, who, body); });
  if (route("GET", {"projects", "{}", "questions"}))
    return with_project(seg[1], [&](Project& p) { return questions(seg[1], p); });
  if (route("POST", {"projects", "{}", "issues", "{}", "resolve"}))
    return with_project(seg[1], [&](Project& p) { return resolve(seg[1], p, seg[3], who, body); });
  if (route("POST", {"projects", "{}", "publish"}))
    return with_project(seg[1], [&](Project& p) { return publish_route(seg[1], p, who, body); });
  if (route("GET", {"workers", "{}", "notifications"})) return notifications(seg[1], who);
  if (n == 3 && method == "POST" && seg[0] == "assignments") {
    const auto [pid, aid] = split_external(seg[1]);
    if (seg[2] == "submit") return with_project(pid, [&](Project& p) { return submit(pid, p, aid, who, body); });
    if (seg[2] == "skip") return with_project(pid, [&](Project& p) { return skip(pid, p, aid, who); });
    if (seg[2] == "run-tests") return with_project(pid, [&](Project& p) { return run_tests_route(p, aid, who, body); });
  }
  if (route("POST", {"questions", "{}", "answers"})) {
    const auto [pid, qid] = split_external(seg[1]);
    return with_project(pid, [&](Project& p) { return post_answer_route(pid, p, qid, who, body); });
  }
  std::string path;
  for (const auto& s : seg) path += "/" + s;
  throw WorkflowError(ErrorCode::NotFound, "no route " + method + " " + (path.empty() ? "/" : path));
}

ServiceResponse Service::create_project(const Principal& who, const Value& body) {
  require_role(who, Role::Client);
  if (!body.is_object() || !body.contains("request"))
    throw WorkflowError(ErrorCode::Validation, "body must carry a request", {{"request", "missing"}});
  const auto request = decode<ClientRequest>(body.at("request"), "request");
  AssignmentPolicy policy;
  if (body.contains("policy"))
    policy = decode<AssignmentPolicy>(body.at("policy"), "policy");
  else if (body.contains("assignment"))
    policy = policy_from_config(body);

  const auto pid = new_project_id();
  auto s = std::make_shared<Slot>();
  s->project = Project::create(pid, who.id, request, policy, now());
  if (store_) store_->append(pid, s->project->log(), s->project->state());
  {
    std::lock_guard lock(registryMutex_);
    projects_[pid] = s;
  }
  return ok({{"projectId", pid}}, 201);
}

ServiceResponse Service::dashboard(Project& p) {
  const auto& s = p.state();
  const auto status = project_status(s);
  Value functions = Value::array();
  for (const auto& id : s.functionOrder) {
    const auto& f = s.functions.at(id);
    functions.push_back({{"id", f.id},
                         {"name", f.name},
                         {"description", f.description},
                         {"state", to_string(f.state)},
                         {"origin", f.is_endpoint() ? "ClientEndpoint" : "CrowdCreated"}});
  }
  return ok({{"projectId", s.projectId},
             {"projectName", s.request.projectName},
             {"projectDescription", s.request.projectDescription},
             {"functions", functions},
             {"availableMicrotasks", s.queue.items().size()},
             {"liveMicrotasks", status.liveMicrotasks},
             {"complete", status.complete},
             {"leaderboard", leaderboard_value(s)}});
}

ServiceResponse Service::fetch(const std::string& pid, Project& p, const Principal& who) {
  require_role(who, Role::Worker);
  std::optional<AssignmentView> view;
  command(pid, p, [&] { view = p.fetch(who.id, now()); });
  if (!view) return ok({{"status", "NoneAvailable"}});

  const auto& s = p.state();
  const auto& m = s.microtasks.at(view->microtaskId);
  const auto& fn = s.functions.at(m.functionId);
  Value assignment{{"assignmentId", external(pid, view->assignmentId)},
                   {"microtaskId", m.id},
                   {"kind", to_string(m.kind)},
                   {"deadline", view->deadline},
                   {"warningAt", m.assignedAt + s.policy.warningAt},
                   {"function", fn}};
  if (m.reworkFeedback) assignment["reworkFeedback"] = *m.reworkFeedback;
  if (m.submissionId) assignment["submission"] = s.submissions.at(*m.submissionId);
  return ok({{"status", "Assigned"}, {"assignment", assignment}});
}

ServiceResponse Service::submit(const std::string& pid, Project& p, const AssignmentId& a, const Principal& who,
                                const Value& body) {
  require_role(who, Role::Worker);
  const std::string token = text_field(body, "clientToken");
  const auto& s = p.state();
  if (!token.empty()) {
    for (const auto& [id, sub] : s.submissions)
      if (sub.clientToken == token && sub.workerId == who.id) return ok({{"submissionId", id}, {"kind", "Submission"}});
    for (const auto& r : s.reviews)
      if (r.clientToken == token && r.decision.reviewerWorkerId == who.id)
        return ok({{"submissionId", r.decision.submissionId}, {"kind", "Review"}, {"stars", r.decision.stars},
                   {"accepted", r.decision.accepted()}});
  }
  const auto* m = s.find_assignment(a);
  if (!m) throw WorkflowError(ErrorCode::StaleAssignment, "assignment " + external(pid, a) + " is not live");
  if (m->kind == MicrotaskKind::Review) {
    ReviewSubmission r;
    r.assignmentId = a;
    r.workerId = who.id;
    if (!body.contains("stars") || !body.at("stars").is_number_integer())
      throw WorkflowError(ErrorCode::Validation, "stars must be an integer", {{"stars", "required"}});
    r.stars = body.at("stars").get<int>();
    r.feedback = text_field(body, "feedback");
    r.clientToken = token;
    const SubmissionId reviewed = *m->submissionId;
    command(pid, p, [&] { p.review(r, now()); });
    return ok({{"submissionId", reviewed}, {"kind", "Review"}, {"stars", r.stars}, {"accepted", r.stars >= 4}});
  }
  IfbSubmission in;
  in.assignmentId = a;
  in.workerId = who.id;
  if (!body.contains("payload")) throw WorkflowError(ErrorCode::Validation, "payload required", {{"payload", "missing"}});
  in.payload = decode<SubmissionPayload>(body.at("payload"), "payload");
  if (body.contains("testReport")) in.testReport = body.at("testReport");
  in.clientToken = token;
  SubmissionId id;
  command(pid, p, [&] { id = p.submit(in, now()); });
  return ok({{"submissionId", id}, {"kind", "Submission"}});
}

ServiceResponse Service::skip(const std::string& pid, Project& p, const AssignmentId& a, const Principal& who) {
  require_role(who, Role::Worker);
  command(pid, p, [&] { p.skip(a, who.id, now()); });
  return ok({{"skipped", true}, {"availableMicrotasks", p.state().queue.items().size()}});
}

ServiceResponse Service::run_tests_route(Project& p, const AssignmentId& a, const Principal& who, const Value& body) {
  require_role(who, Role::Worker);
  const auto& m = require_held(p.state(), a, who.id, now());
  if (m.kind != MicrotaskKind::ImplementFunctionBehavior)
    throw WorkflowError(ErrorCode::Conflict, "tests run only inside implementation microtasks");
  BundleOverrides o;
  if (body.contains("code")) o.code = decode<std::string>(body.at("code"), "code");
  if (body.contains("tests")) o.extraTests = decode<std::vector<TestCase>>(body.at("tests"), "tests");
  if (body.contains("stubs")) o.extraStubs = decode<std::vector<Stub>>(body.at("stubs"), "stubs");
  std::vector<SeedDocument> seed;
  if (body.contains("seed")) {
    for (const auto& d : body.at("seed"))
      seed.push_back({decode<std::string>(d.at("collection"), "seed.collection"),
                      decode<std::string>(d.at("id"), "seed.id"), d.value("value", Value())});
  }
  const auto bundle = make_bundle(p.state(), m.functionId, o, std::move(seed));
  TestRunReport report;
  {
    std::lock_guard lock(executorMutex_);
    report = run_tests(bundle, *config_.executor);
  }
  Value out;
  to_json(out, report);
  return ok(out);
}

ServiceResponse Service::post_question_route(const std::string& pid, Project& p, const Principal& who,
                                             const Value& body) {
  require_role(who, Role::Worker);
  command(pid, p, [&] {
    p.advance(now());
    p.commit(post_question(p.state(), who.id, text_field(body, "text"), now()));
  });
  return ok(question_value(pid, p.state().questions.back()), 201);
}

ServiceResponse Service::post_answer_route(const std::string& pid, Project& p, const std::string& q,
                                           const Principal& who, const Value& body) {
  require_role(who, Role::Worker);
  command(pid, p, [&] {
    p.advance(now());
    p.commit(post_answer(p.state(), q, who.id, text_field(body, "text"), now()));
  });
  return ok(answer_value(pid, p.state().answers.back()), 201);
}

ServiceResponse Service::questions(const std::string& pid, Project& p) {
  const auto& s = p.state();
  std::vector<Question> qs = s.questions;
  std::stable_sort(qs.begin(), qs.end(), [](const Question& a, const Question& b) { return a.timestamp < b.timestamp; });
  Value threads = Value::array();
  for (const auto& q : qs) {
    std::vector<Answer> as;
    for (const auto& a : s.answers)
      if (a.questionId == q.id) as.push_back(a);
    std::stable_sort(as.begin(), as.end(), [](const Answer& a, const Answer& b) { return a.timestamp < b.timestamp; });
    Value answers = Value::array();
    for (const auto& a : as) answers.push_back(answer_value(pid, a));
    threads.push_back({{"question", question_value(pid, q)}, {"answers", answers}});
  }
  return ok({{"threads", threads}});
}

ServiceResponse Service::notifications(const std::string& workerId, const Principal& who) {
  if (who.role != Role::Worker || who.id != workerId)
    throw WorkflowError(ErrorCode::Forbidden, "workers may only read their own notifications");
  std::vector<std::pair<std::string, std::shared_ptr<Slot>>> all;
  {
    std::lock_guard lock(registryMutex_);
    all.assign(projects_.begin(), projects_.end());
  }
  Value out = Value::array();
  for (const auto& [pid, s] : all) {
    std::lock_guard lock(s->mutex);
    for (const auto& n : s->project->state().notifications) {
      if (n.recipient != workerId) continue;
      Value v = n;
      if (!n.assignmentId.empty()) v["assignmentId"] = external(pid, n.assignmentId);
      v["projectId"] = pid;
      out.push_back(v);
    }
  }
  return ok({{"notifications", out}});
}

ServiceResponse Service::resolve(const std::string& pid, Project& p, const IssueId& issue, const Principal& who,
                                 const Value& body) {
  IssueResolution r;
  if (body.contains("description")) r.description = decode<std::string>(body.at("description"), "description");
  if (body.contains("signature")) r.signature = decode<Signature>(body.at("signature"), "signature");
  command(pid, p, [&] { p.resolve(issue, who, r, now()); });
  return ok({{"issueId", issue}, {"resolved", true}});
}

ServiceResponse Service::publish_route(const std::string& pid, Project& p, const Principal& who, const Value& body) {
  require_role(who, Role::Client);
  if (who.id != p.state().clientId) throw WorkflowError(ErrorCode::Forbidden, "only the project client may publish");
  if (!config_.publishTarget) throw WorkflowError(ErrorCode::Conflict, "no publish target configured");
  AssemblerOptions options;
  if (body.contains("force")) options.force = decode<bool>(body.at("force"), "force");
  if (body.contains("httpMethod")) options.httpMethod = decode<std::string>(body.at("httpMethod"), "httpMethod");
  auto target = config_.publishTarget(pid);
  PublicationRecord record;
  command(pid, p, [&] { record = publish_project(p, *target, options, now()); });
  return ok({{"location", record.location},
             {"contentHash", record.contentHash},
             {"target", record.target},
             {"timestamp", record.timestamp}});
}

void Service::mount(httplib::Server& server) {
  auto handler = [this](const httplib::Request& req, httplib::Response& res) {
    const auto r = handle(req.method, req.path, req.get_header_value("Authorization"), req.body);
    res.status = r.status;
    res.set_content(canonicalize(r.body), "application/json");
  };
  server.Get(".*", handler);
  server.Post(".*", handler);
}

}  // namespace crowdms
