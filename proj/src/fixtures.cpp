#include "crowdms/fixtures.hpp"

#include <algorithm>
#include <deque>
#include <set>
#include <sstream>

#include "crowdms/labels.hpp"

namespace crowdms::fixtures {
namespace {

Param param(std::string name, std::string type) { return {std::move(name), TypeRef::parse(type)}; }

EndpointSpec endpoint(std::string name, std::string description, std::vector<Param> params,
                      std::optional<std::string> ret) {
  EndpointSpec e;
  e.functionName = std::move(name);
  e.description = std::move(description);
  e.signature.params = std::move(params);
  if (ret) e.signature.returnType = TypeRef::parse(*ret);
  return e;
}

std::vector<Behavior> make_catalog() {
  std::vector<Behavior> out;
  auto add = [&](const std::string& fn, const std::string& slug, const std::string& description,
                 const std::string& snippet) { out.push_back({fn + "." + slug, fn, description, snippet}); };

  add("createTodo", "rejects-missing-title", "throws when the todo has no title",
      "if (!todo.title) throw new TypeError('Illegal Argument Exception');");
  add("createTodo", "rejects-bad-due-date", "throws when dueDate is not a valid YYYY-MM-DD date",
      "if (!checkTodoDateFormat(todo.dueDate)) throw new TypeError('Illegal Argument Exception');");
  add("createTodo", "assigns-id", "assigns a fresh id when none is given",
      "const id = todo.id || String(Date.now());");
  add("createTodo", "stores-todo", "saves the todo under the user and returns it",
      "return save('todos', id, Object.assign({}, todo, { id, userId, status: 'pending', archived: false }));");

  add("fetchTodo", "rejects-unknown-id", "throws when the todo does not exist",
      "const todo = get('todos', todoId);\n  if (!todo || todo.userId !== userId) throw new Error('not found');");
  add("fetchTodo", "returns-todo", "returns the stored todo", "return todo;");

  add("fetchAllTodos", "lists-user-todos", "returns every todo of the user",
      "const all = list('todos');");
  add("fetchAllTodos", "excludes-other-users", "leaves out other users' todos",
      "return all.filter((t) => t.userId === userId);");

  add("fetchTodosBasedOnStatus", "rejects-unknown-status", "throws for a status other than pending or completed",
      "if (status !== 'pending' && status !== 'completed') throw new TypeError('Illegal Argument Exception');");
  add("fetchTodosBasedOnStatus", "filters-pending", "returns pending todos for status pending",
      "const mine = list('todos').filter((t) => t.userId === userId);");
  add("fetchTodosBasedOnStatus", "filters-completed", "returns completed todos for status completed",
      "const matching = mine.filter((t) => t.status === status);");
  add("fetchTodosBasedOnStatus", "excludes-archived", "never returns archived todos",
      "return matching.filter((t) => !t.archived);");

  add("updateTodo", "rejects-unknown-id", "throws when the todo does not exist",
      "const existing = get('todos', todo.id);\n  if (!existing) throw new Error('not found');");
  add("updateTodo", "rejects-other-user", "throws when the todo belongs to another user",
      "if (existing.userId !== userId) throw new Error('forbidden');");
  add("updateTodo", "validates-due-date", "throws when the new dueDate is malformed",
      "if (!checkTodoDateFormat(todo.dueDate)) throw new TypeError('Illegal Argument Exception');");
  add("updateTodo", "keeps-id", "never changes the todo id or owner",
      "const next = Object.assign({}, existing, todo, { id: existing.id, userId: existing.userId });");
  add("updateTodo", "updates-fields", "stores and returns the updated fields",
      "return update('todos', existing.id, next);");

  add("deleteTodo", "reports-missing", "returns false when the todo does not exist",
      "const existing = get('todos', todoId);\n  if (!existing) return false;");
  add("deleteTodo", "rejects-other-user", "throws when the todo belongs to another user",
      "if (existing.userId !== userId) throw new Error('forbidden');");
  add("deleteTodo", "removes-todo", "removes the todo and returns true", "return remove('todos', todoId);");

  add("completeTodo", "rejects-unknown-id", "throws when the todo does not exist",
      "const existing = get('todos', todoId);\n  if (!existing || existing.userId !== userId) throw new Error('not found');");
  add("completeTodo", "marks-completed", "sets status to completed",
      "return update('todos', todoId, Object.assign({}, existing, { status: 'completed' }));");

  add("archiveTodo", "rejects-unknown-id", "throws when the todo does not exist",
      "const existing = get('todos', todoId);\n  if (!existing || existing.userId !== userId) throw new Error('not found');");
  add("archiveTodo", "sets-archived", "sets archived to true",
      "return update('todos', todoId, Object.assign({}, existing, { archived: true }));");

  add("unarchiveTodo", "clears-archived", "sets archived back to false",
      "const existing = get('todos', todoId);\n  return update('todos', todoId, Object.assign({}, existing, { archived: false }));");

  add("fetchArchivedTodos", "lists-archived", "returns the user's archived todos",
      "return list('todos').filter((t) => t.userId === userId && t.archived);");

  add("setReminder", "rejects-unknown-todo", "throws when the todo does not exist",
      "const todo = get('todos', todoId);\n  if (!todo || todo.userId !== userId) throw new Error('not found');");
  add("setReminder", "validates-remind-at", "throws when remindAt is malformed",
      "if (!checkTodoDateFormat(remindAt)) throw new TypeError('Illegal Argument Exception');");
  add("setReminder", "stores-reminder", "saves and returns the reminder",
      "return save('reminders', todoId, { todoId, userId, remindAt });");

  add("fetchReminders", "lists-user-reminders", "returns the user's reminders",
      "const mine = list('reminders').filter((r) => r.userId === userId);");
  add("fetchReminders", "orders-by-time", "orders reminders by remindAt",
      "return mine.sort((a, b) => (a.remindAt < b.remindAt ? -1 : 1));");

  add("checkTodoDateFormat", "rejects-bad-format", "returns false unless the text is YYYY-MM-DD",
      "if (!/^\\d{4}-\\d{2}-\\d{2}$/.test(date)) return false;");
  add("checkTodoDateFormat", "rejects-invalid-date", "returns false for impossible dates such as 2020-13-45",
      "const [y, m, d] = date.split('-').map(Number);\n  const parsed = new Date(Date.UTC(y, m - 1, d));\n"
      "  if (parsed.getUTCMonth() !== m - 1 || parsed.getUTCDate() !== d) return false;");
  add("checkTodoDateFormat", "accepts-iso-date", "returns true for a valid date", "return true;");
  return out;
}

// ---------------------------------------------------------------------------
// Scripted crowd

struct Contribution {
  enum class Kind { Implement, MarkComplete, Issue };
  Kind kind = Kind::Implement;
  std::vector<std::string> behaviors;  // slugs
  std::map<std::string, std::vector<std::string>> defects;
  int stars = 5;
  std::string feedback;
  bool createsDateHelper = false;
  std::string issueText;
};

using Plan = std::map<std::string, std::deque<Contribution>>;

Contribution implement(std::vector<std::string> slugs, int stars = 5, std::string feedback = {}) {
  Contribution c;
  c.behaviors = std::move(slugs);
  c.stars = stars;
  c.feedback = std::move(feedback);
  return c;
}

Contribution mark_complete() {
  Contribution c;
  c.kind = Contribution::Kind::MarkComplete;
  return c;
}

Plan make_plan(Variant variant) {
  const bool defective = variant == Variant::Defective;
  Plan p;

  auto helper = implement({"rejects-bad-due-date"});
  helper.createsDateHelper = true;
  p["createTodo"] = {implement({"stores-todo", "assigns-id"}), implement({"rejects-missing-title"}), helper,
                     mark_complete()};

  p["fetchTodo"] = {implement({"returns-todo", "rejects-unknown-id"}), mark_complete()};
  p["fetchAllTodos"] = {implement({"lists-user-todos"}), implement({"excludes-other-users"}), mark_complete()};

  auto status = implement({"filters-pending", "filters-completed"});
  if (defective) {
    status.stars = 4;
    status.defects["missing-archived-conditional"] = {
        "fetchTodosBasedOnStatus.filters-pending", "fetchTodosBasedOnStatus.filters-completed",
        "fetchTodosBasedOnStatus.excludes-archived", "fetchTodosBasedOnStatus.rejects-unknown-status"};
  }
  p["fetchTodosBasedOnStatus"] = {status, implement({"excludes-archived", "rejects-unknown-status"}, defective ? 4 : 5),
                                  mark_complete()};

  auto due = implement({"validates-due-date"});
  if (defective) {
    due.stars = 4;
    due.defects["due-date-not-checked"] = {"updateTodo.validates-due-date"};
  }
  p["updateTodo"] = {implement({"updates-fields", "keeps-id"}), implement({"rejects-unknown-id", "rejects-other-user"}),
                     due, mark_complete()};

  if (defective)
    p["deleteTodo"] = {implement({"removes-todo", "reports-missing"}), mark_complete()};
  else
    p["deleteTodo"] = {implement({"removes-todo", "reports-missing"}), implement({"rejects-other-user"}),
                       mark_complete()};

  p["completeTodo"] = {implement({"marks-completed", "rejects-unknown-id"}), mark_complete()};
  p["archiveTodo"] = {implement({"sets-archived", "rejects-unknown-id"}), mark_complete()};
  p["unarchiveTodo"] = {implement({"clears-archived"}), mark_complete()};
  p["fetchArchivedTodos"] = {implement({"lists-archived"}), mark_complete()};

  Contribution issue;
  issue.kind = Contribution::Kind::Issue;
  issue.issueText = "setReminder has no userId parameter, so it cannot tell who owns the reminder";
  auto remind = implement({"validates-remind-at"});
  if (defective) {
    remind.stars = 4;
    remind.defects["remind-at-not-checked"] = {"setReminder.validates-remind-at"};
  }
  p["setReminder"] = {issue, implement({"stores-reminder", "rejects-unknown-todo"}), remind, mark_complete()};

  p["fetchReminders"] = {implement({"lists-user-reminders"}), implement({"orders-by-time"}), mark_complete()};

  p["checkTodoDateFormat"] = {implement({"accepts-iso-date", "rejects-invalid-date"}, 2, "only checked date validity"),
                              implement({"rejects-bad-format"}), mark_complete()};
  return p;
}

struct FunctionProgress {
  std::vector<std::string> implemented;  // behavior ids
  std::map<std::string, std::vector<std::string>> defects;
};

std::vector<std::string> param_names(const Signature& sig) {
  std::vector<std::string> out;
  for (const auto& p : sig.params) out.push_back(p.name);
  return out;
}

const std::string kBadDate = "2020-13-45";

MockScript date_check_script() {
  MockScript s;
  s.steps.push_back(MockStep::call("checkTodoDateFormat", Value::array({kBadDate}), Value(false)));
  return s;
}

TestCase date_check_draft() {
  TestCase t;
  t.id = "draft-bad-date";
  t.kind = TestCase::Kind::CodeTest;
  t.description = "createTodo rejects " + kBadDate;
  t.source = "expect(() => createTodo('u1', { title: 'x', dueDate: '" + kBadDate + "' })).toThrow();";
  return t;
}

Stub bad_date_stub(const WorkerId& author) { return {"checkTodoDateFormat", Value::array({kBadDate}), false, author}; }

}  // namespace

ClientRequest todo_request() {
  ClientRequest r;
  r.projectName = "todo-service";
  r.projectDescription =
      "A ToDo application backend. Users create todos with a title, description and due date, mark them "
      "completed, archive them, and set reminders.";
  r.adts = {
      {"Todo",
       {param("id", "string"), param("userId", "string"), param("title", "string"), param("description", "string"),
        param("dueDate", "string"), param("status", "string"), param("archived", "boolean")}},
      {"Reminder", {param("todoId", "string"), param("userId", "string"), param("remindAt", "string")}},
  };
  const auto user = param("userId", "string");
  const auto todoId = param("todoId", "string");
  r.endpoints = {
      endpoint("createTodo", "Creates a todo for the user. Rejects a missing title or a malformed due date.",
               {user, param("todo", "Todo")}, "Todo"),
      endpoint("fetchTodo", "Returns one of the user's todos.", {user, todoId}, "Todo"),
      endpoint("fetchAllTodos", "Returns all of the user's todos.", {user}, "Todo[]"),
      endpoint("fetchTodosBasedOnStatus",
               "Returns the user's non-archived todos whose status is 'pending' or 'completed'.",
               {user, param("status", "string")}, "Todo[]"),
      endpoint("updateTodo", "Updates a todo the user owns and returns it.", {user, param("todo", "Todo")}, "Todo"),
      endpoint("deleteTodo", "Deletes a todo the user owns. Returns false if it does not exist.", {user, todoId},
               "boolean"),
      endpoint("completeTodo", "Marks a todo completed.", {user, todoId}, "Todo"),
      endpoint("archiveTodo", "Archives a todo.", {user, todoId}, "Todo"),
      endpoint("unarchiveTodo", "Moves a todo out of the archive.", {user, todoId}, "Todo"),
      endpoint("fetchArchivedTodos", "Returns the user's archived todos.", {user}, "Todo[]"),
      endpoint("setReminder", "Sets a reminder for a todo at the given YYYY-MM-DD date.",
               {todoId, param("remindAt", "string")}, "Reminder"),
      endpoint("fetchReminders", "Returns the user's reminders ordered by date.", {user}, "Reminder[]"),
  };
  return r;
}

const std::vector<Behavior>& todo_behaviors() {
  static const std::vector<Behavior> catalog = make_catalog();
  return catalog;
}

std::vector<const Behavior*> behaviors_of(const std::string& function) {
  std::vector<const Behavior*> out;
  for (const auto& b : todo_behaviors())
    if (b.function == function) out.push_back(&b);
  return out;
}

NewFunctionSpec date_helper_spec() {
  NewFunctionSpec s;
  s.name = "checkTodoDateFormat";
  s.description = "Returns true iff the text is a real calendar date written as YYYY-MM-DD.";
  s.signature.params = {param("date", "string")};
  s.signature.returnType = TypeRef::parse("boolean");
  return s;
}

std::string function_source(const std::string& name, const std::vector<std::string>& params,
                            const std::vector<std::string>& implemented,
                            const std::map<std::string, std::vector<std::string>>& defects) {
  return function_source(todo_behaviors(), name, params, implemented, defects);
}

std::string function_source(const std::vector<Behavior>& catalog, const std::string& name,
                            const std::vector<std::string>& params, const std::vector<std::string>& implemented,
                            const std::map<std::string, std::vector<std::string>>& defects) {
  std::ostringstream out;
  out << "function " << name << "(";
  for (std::size_t i = 0; i < params.size(); ++i) out << (i ? ", " : "") << params[i];
  out << ") {\n";
  for (const auto& [id, affected] : defects) {
    out << "  // @defect " << id << " affects";
    for (const auto& b : affected) out << " " << b;
    out << "\n";
  }
  for (const auto& b : catalog) {
    if (b.function != name) continue;
    if (std::find(implemented.begin(), implemented.end(), b.id) == implemented.end()) continue;
    out << "  // @behavior " << b.id << "\n  " << b.snippet << "\n";
  }
  out << "}\n";
  return out.str();
}

TestCase behavior_test(const Behavior& behavior, const WorkerId& author) {
  TestCase t;
  t.id = "check." + behavior.id;
  t.kind = TestCase::Kind::CodeTest;
  t.description = behavior.description;
  t.source = "// @checks " + behavior.id + "\n// " + behavior.description + "\n";
  t.authorWorkerId = author;
  return t;
}

OracleScore score_oracle(const ProjectState& state, ExecutorPort& executor) {
  OracleScore score;
  std::map<std::string, std::vector<TestCase>> byFunction;
  for (const auto& b : todo_behaviors()) byFunction[b.function].push_back(behavior_test(b));
  for (const auto& [name, tests] : byFunction) {
    score.total += static_cast<int>(tests.size());
    const auto* fn = state.find_function_by_name(name);
    if (!fn) {
      for (const auto& t : tests) score.failing.push_back(t.id.substr(6));
      continue;
    }
    auto bundle = make_bundle(state, fn->id);
    bundle.bundleId += ":oracle";
    bundle.tests = tests;
    bundle.stubs.clear();
    const auto report = run_tests(bundle, executor);
    for (const auto& r : report.perTest) {
      if (r.status == TestStatus::Passed)
        ++score.passed;
      else
        score.failing.push_back(r.testId.substr(6));
    }
  }
  std::sort(score.failing.begin(), score.failing.end());
  return score;
}

TodoScenarioResult run_todo_scenario(Variant variant, MockExecutor& executor) {
  const std::string client = "client";
  AssignmentPolicy policy;
  Timestamp now = 1'700'000'000;
  TodoScenarioResult result{Project::create("todo", client, todo_request(), policy, now), {}, {}, 0};
  Project& project = result.project;

  std::vector<WorkerId> workers;
  for (int i = 1; i <= 9; ++i) workers.push_back("worker-" + std::to_string(i));

  now += minutes(2);
  project.commit(post_question(project.state(), workers[2], "How can I store a todo object in the database?", now));
  now += minutes(1);
  project.commit(post_answer(project.state(), project.state().questions.back().id, workers[0],
                             "Call save('todos', id, todo); get, update, remove and list work the same way.", now));

  Plan plan = make_plan(variant);
  std::map<std::string, FunctionProgress> progress;
  std::map<SubmissionId, Contribution> pendingReviews;
  std::vector<IssueId> openIssues;
  int testCounter = 0;

  const int maxRounds = 5000;
  std::size_t turn = 0;
  int idleTurns = 0;
  while (!project_status(project.state()).complete) {
    if (++result.rounds > maxRounds) throw WorkflowError(ErrorCode::Conflict, "scripted crowd did not converge");
    now += minutes(1);

    for (const auto& issueId : openIssues) {
      const auto& issue = project.state().issues.at(issueId);
      const auto& fn = project.state().functions.at(issue.functionId);
      IssueResolution res;
      res.signature = fn.signature;
      res.signature->params.insert(res.signature->params.begin(), param("userId", "string"));
      res.description = fn.description + " The reminder belongs to userId.";
      project.resolve(issueId, {Role::Client, client}, res, now);
    }
    openIssues.clear();

    const WorkerId& worker = workers[turn++ % workers.size()];
    auto view = project.fetch(worker, now);
    if (!view) {
      if (++idleTurns > static_cast<int>(workers.size()) * 4)
        throw WorkflowError(ErrorCode::Conflict, "scripted crowd stalled");
      continue;
    }
    idleTurns = 0;
    const Microtask& m = project.state().microtasks.at(view->microtaskId);
    const FunctionArtifact& fn = project.state().functions.at(m.functionId);
    now += minutes(3);

    if (m.kind == MicrotaskKind::Review) {
      const auto& contribution = pendingReviews.at(*m.submissionId);
      ReviewSubmission rs{view->assignmentId, worker, contribution.stars, contribution.feedback, {}};
      if (rs.stars <= 3 && rs.feedback.empty()) rs.feedback = "needs work";
      pendingReviews.erase(*m.submissionId);
      project.review(rs, now);
      continue;
    }

    auto& queue = plan.at(fn.name);
    if (queue.empty()) throw WorkflowError(ErrorCode::Conflict, "no scripted contribution left for " + fn.name);
    Contribution c = queue.front();
    queue.pop_front();

    IfbSubmission sub;
    sub.assignmentId = view->assignmentId;
    sub.workerId = worker;
    auto& prog = progress[fn.name];

    if (c.kind == Contribution::Kind::Issue) {
      sub.payload.kind = PayloadKind::IssueReport;
      sub.payload.issueText = c.issueText;
      project.submit(sub, now);
      for (const auto& [id, issue] : project.state().issues)
        if (!issue.resolved) openIssues.push_back(id);
      continue;
    }
    if (c.kind == Contribution::Kind::MarkComplete) {
      sub.payload.kind = PayloadKind::MarkComplete;
    } else {
      for (const auto& slug : c.behaviors) prog.implemented.push_back(fn.name + "." + slug);
      for (const auto& [id, affected] : c.defects) prog.defects[id] = affected;
      sub.payload.kind = PayloadKind::BehaviorContribution;
      sub.payload.code = function_source(fn.name, param_names(fn.signature), prog.implemented, prog.defects);
      for (const auto& slug : c.behaviors) {
        const std::string id = fn.name + "." + slug;
        if (!labels::behavior_passes(sub.payload.code, id)) continue;  // the defect went untested
        auto b = std::find_if(todo_behaviors().begin(), todo_behaviors().end(),
                              [&](const Behavior& x) { return x.id == id; });
        auto t = behavior_test(*b, worker);
        t.id = "draft-" + std::to_string(++testCounter);
        sub.payload.testsAdded.push_back(t);
      }
      if (c.createsDateHelper) {
        sub.payload.newFunctions.push_back(date_helper_spec());
        executor.script(fn.name, fn.version, "draft-bad-date", date_check_script());
        BundleOverrides o;
        o.code = sub.payload.code;
        o.extraTests = {date_check_draft()};
        result.dateCheckWithoutStub = run_tests(make_bundle(project.state(), fn.id, o), executor);
        o.extraStubs = {bad_date_stub(worker)};
        result.dateCheckWithStub = run_tests(make_bundle(project.state(), fn.id, o), executor);
        sub.payload.stubsAdded = o.extraStubs;
      }
      BundleOverrides o;
      o.code = sub.payload.code;
      o.extraTests = sub.payload.testsAdded;
      o.extraStubs = sub.payload.stubsAdded;
      Value report;
      to_json(report, run_tests(make_bundle(project.state(), fn.id, o), executor));
      sub.testReport = report;
    }
    const auto submissionId = project.submit(sub, now);
    pendingReviews[submissionId] = c;
  }
  return result;
}

StubScenario date_format_stub_scenario() {
  MockExecutor executor;
  ProjectState state;
  state.projectId = "todo";
  FunctionArtifact createTodo;
  createTodo.id = "f1";
  createTodo.name = "createTodo";
  createTodo.signature.params = {param("userId", "string"), param("todo", "Todo")};
  createTodo.code = function_source("createTodo", {"userId", "todo"}, {"createTodo.rejects-bad-due-date"});
  createTodo.version = 1;
  state.functions[createTodo.id] = createTodo;
  state.functionOrder = {createTodo.id};

  executor.script("createTodo", 1, "draft-bad-date", date_check_script());
  BundleOverrides o;
  o.extraTests = {date_check_draft()};
  StubScenario s;
  s.withoutStub = run_tests(make_bundle(state, "f1", o), executor);
  o.extraStubs = {bad_date_stub("worker-1")};
  s.withStub = run_tests(make_bundle(state, "f1", o), executor);
  return s;
}

TimeoutScenario run_timeout_scenario() {
  AssignmentPolicy policy;
  ClientRequest request;
  request.projectName = "ping";
  request.projectDescription = "Health check service.";
  request.endpoints = {endpoint("ping", "Returns pong.", {}, "string")};
  TimeoutScenario s{Project::create("ping", "client", request, policy, 0), 0, 0, 0};
  Project& project = s.project;

  s.assignedAt = minutes(1);
  auto idle = project.fetch("idle-worker", s.assignedAt);
  if (!idle) throw WorkflowError(ErrorCode::Conflict, "nothing to assign");

  // The idle worker never acts; the clock is polled every simulated minute.
  for (Timestamp t = s.assignedAt + minutes(1); t <= s.assignedAt + minutes(16); t += minutes(1)) {
    for (const auto& e : project.advance(t)) {
      if (e.type == EventType::NotificationEmitted) s.warnedAt = t;
      if (e.type == EventType::MicrotaskExpired) s.expiredAt = t;
    }
  }

  const Timestamp later = s.assignedAt + minutes(17);
  auto taken = project.fetch("worker-2", later);
  if (!taken) throw WorkflowError(ErrorCode::Conflict, "microtask was not re-queued");
  IfbSubmission sub;
  sub.assignmentId = taken->assignmentId;
  sub.workerId = "worker-2";
  sub.payload.code = "function ping() {\n  return 'pong';\n}\n";
  project.submit(sub, later + minutes(4));
  return s;
}

}  // namespace crowdms::fixtures
