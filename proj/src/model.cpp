#include "crowdms/model.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <set>

namespace crowdms {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::Validation: return "validation";
    case ErrorCode::NotFound: return "not-found";
    case ErrorCode::StaleAssignment: return "stale-assignment";
    case ErrorCode::Conflict: return "conflict";
    case ErrorCode::Unauthorized: return "unauthorized";
    case ErrorCode::Forbidden: return "forbidden";
    case ErrorCode::Incomplete: return "incomplete";
    case ErrorCode::Corrupt: return "corrupt";
    case ErrorCode::Io: return "io";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------
// TypeRef

TypeRef TypeRef::parse(std::string_view text) {
  TypeRef t;
  while (text.size() >= 2 && text.substr(text.size() - 2) == "[]") {
    ++t.listDepth;
    text.remove_suffix(2);
  }
  t.base = std::string(text);
  return t;
}

std::string TypeRef::str() const {
  std::string s = base;
  for (int i = 0; i < listDepth; ++i) s += "[]";
  return s;
}

bool TypeRef::is_primitive() const {
  return base == "string" || base == "number" || base == "boolean";
}

bool is_identifier(std::string_view s) {
  if (s.empty()) return false;
  auto head = [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_' || c == '$';
  };
  if (!head(s.front())) return false;
  return std::all_of(s.begin() + 1, s.end(),
                     [&](char c) { return head(c) || (c >= '0' && c <= '9'); });
}

AdtRegistry make_registry(const std::vector<Adt>& adts) {
  AdtRegistry r;
  for (const auto& a : adts) r.emplace(a.name, a);
  return r;
}

std::string Stub::key() const { return calleeName + "|" + canonicalize(argumentTuple); }

// ---------------------------------------------------------------------------
// Validation

namespace {

bool resolves(const TypeRef& t, const AdtRegistry& adts) {
  return t.listDepth >= 0 && (t.is_primitive() || adts.count(t.base) > 0);
}

void check_type(const TypeRef& t, const AdtRegistry& adts, const std::string& path,
                ValidationResult& out) {
  if (!resolves(t, adts)) out.add(path, "unresolved type '" + t.str() + "'");
}

}  // namespace

void validate_signature(const Signature& sig, const AdtRegistry& adts, const std::string& path,
                        ValidationResult& out) {
  std::set<std::string> seen;
  for (std::size_t i = 0; i < sig.params.size(); ++i) {
    const auto& p = sig.params[i];
    const std::string ppath = path + ".params[" + std::to_string(i) + "]";
    if (!is_identifier(p.name)) out.add(ppath, "parameter name '" + p.name + "' is not an identifier");
    if (!seen.insert(p.name).second) out.add(ppath, "duplicate parameter '" + p.name + "'");
    check_type(p.type, adts, ppath, out);
  }
  if (sig.returnType) check_type(*sig.returnType, adts, path + ".returnType", out);
}

namespace {

bool is_blank(const std::string& s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); });
}

}  // namespace

ValidationResult validate_client_request(const ClientRequest& request) {
  ValidationResult out;
  if (is_blank(request.projectName)) out.add("projectName", "project name required");
  if (request.endpoints.empty()) out.add("endpoints", "at least one endpoint required");

  AdtRegistry adts;
  for (std::size_t i = 0; i < request.adts.size(); ++i) {
    const auto& adt = request.adts[i];
    const std::string path = "adts[" + std::to_string(i) + "]";
    if (!is_identifier(adt.name)) out.add(path, "ADT name '" + adt.name + "' is not an identifier");
    if (TypeRef{adt.name, 0}.is_primitive()) out.add(path, "ADT name '" + adt.name + "' shadows a primitive");
    if (!adts.emplace(adt.name, adt).second) out.add(path, "duplicate ADT '" + adt.name + "'");
  }
  for (std::size_t i = 0; i < request.adts.size(); ++i) {
    const auto& adt = request.adts[i];
    std::set<std::string> seen;
    for (std::size_t f = 0; f < adt.fields.size(); ++f) {
      const auto& field = adt.fields[f];
      const std::string path = "adts[" + std::to_string(i) + "](" + adt.name + ").fields[" +
                               std::to_string(f) + "]";
      if (!is_identifier(field.name)) out.add(path, "field name '" + field.name + "' is not an identifier");
      if (!seen.insert(field.name).second) out.add(path, "duplicate field '" + field.name + "'");
      check_type(field.type, adts, path, out);
    }
  }

  // Containment by value (listDepth 0) must be acyclic.
  enum class Mark { None, Active, Done };
  std::map<std::string, Mark> marks;
  std::function<bool(const std::string&)> cyclic = [&](const std::string& name) {
    auto& m = marks[name];
    if (m == Mark::Active) return true;
    if (m == Mark::Done) return false;
    m = Mark::Active;
    for (const auto& field : adts.at(name).fields) {
      if (field.type.listDepth == 0 && adts.count(field.type.base) && cyclic(field.type.base)) {
        marks[name] = Mark::Done;
        return true;
      }
    }
    marks[name] = Mark::Done;
    return false;
  };
  for (const auto& [name, adt] : adts) {
    marks.clear();
    if (cyclic(name)) out.add("adts(" + name + ")", "ADT '" + name + "' contains itself by value");
  }

  std::set<std::string> names;
  for (std::size_t i = 0; i < request.endpoints.size(); ++i) {
    const auto& ep = request.endpoints[i];
    const std::string path = "endpoints[" + std::to_string(i) + "](" + ep.functionName + ")";
    if (!is_identifier(ep.functionName)) out.add(path, "function name '" + ep.functionName + "' is not an identifier");
    if (!names.insert(ep.functionName).second) out.add(path, "duplicate function name '" + ep.functionName + "'");
    if (is_blank(ep.description)) out.add(path, "description required");
    validate_signature(ep.signature, adts, path, out);
  }
  return out;
}

namespace {

void validate_into(const Value& v, const TypeRef& t, const AdtRegistry& adts, const std::string& path,
                   ValidationResult& out) {
  const std::string where = path.empty() ? "$" : path;
  if (t.listDepth > 0) {
    if (!v.is_array()) {
      out.add(where, "expected " + t.str());
      return;
    }
    for (std::size_t i = 0; i < v.size(); ++i)
      validate_into(v[i], t.element(), adts, path + "[" + std::to_string(i) + "]", out);
    return;
  }
  if (t.base == "string") {
    if (!v.is_string()) out.add(where, "expected string");
    return;
  }
  if (t.base == "number") {
    if (!v.is_number()) out.add(where, "expected number");
    return;
  }
  if (t.base == "boolean") {
    if (!v.is_boolean()) out.add(where, "expected boolean");
    return;
  }
  const auto& adt = adts.at(t.base);
  if (!v.is_object()) {
    out.add(where, "expected " + adt.name + " object");
    return;
  }
  for (const auto& field : adt.fields) {
    auto it = v.find(field.name);
    if (it == v.end()) {
      out.add(where, "missing field " + field.name);
      continue;
    }
    validate_into(*it, field.type, adts, path + "." + field.name, out);
  }
  for (auto it = v.begin(); it != v.end(); ++it) {
    bool declared = std::any_of(adt.fields.begin(), adt.fields.end(),
                                [&](const Field& f) { return f.name == it.key(); });
    if (!declared) out.add(where, "unexpected field " + it.key());
  }
}

void require_resolvable(const TypeRef& t, const AdtRegistry& adts, std::set<std::string>& visiting) {
  if (t.is_primitive()) return;
  auto it = adts.find(t.base);
  if (it == adts.end())
    throw WorkflowError(ErrorCode::Validation, "unresolved type '" + t.str() + "'");
  if (!visiting.insert(t.base).second) return;
  for (const auto& f : it->second.fields) require_resolvable(f.type, adts, visiting);
}

}  // namespace

ValidationResult validate_value(const Value& value, const TypeRef& type, const AdtRegistry& adts) {
  std::set<std::string> visiting;
  require_resolvable(type, adts, visiting);
  ValidationResult out;
  validate_into(value, type, adts, "", out);
  return out;
}

// ---------------------------------------------------------------------------
// Enum names

std::string_view to_string(FunctionState s) {
  switch (s) {
    case FunctionState::AwaitingWork: return "AwaitingWork";
    case FunctionState::Halted: return "Halted";
    case FunctionState::Completed: return "Completed";
  }
  return "";
}

std::string_view to_string(MicrotaskKind k) {
  return k == MicrotaskKind::Review ? "Review" : "ImplementFunctionBehavior";
}

std::string_view to_string(MicrotaskState s) {
  switch (s) {
    case MicrotaskState::Queued: return "Queued";
    case MicrotaskState::Assigned: return "Assigned";
    case MicrotaskState::Submitted: return "Submitted";
    case MicrotaskState::Retired: return "Retired";
  }
  return "";
}

std::string_view to_string(PayloadKind k) {
  switch (k) {
    case PayloadKind::BehaviorContribution: return "BehaviorContribution";
    case PayloadKind::MarkComplete: return "MarkComplete";
    case PayloadKind::IssueReport: return "IssueReport";
  }
  return "";
}

std::string_view to_string(NotificationKind k) {
  switch (k) {
    case NotificationKind::ReviewReceived: return "ReviewReceived";
    case NotificationKind::TimeWarning: return "TimeWarning";
    case NotificationKind::IssueResolved: return "IssueResolved";
  }
  return "";
}

namespace {

template <typename Enum, std::size_t N>
Enum enum_from(const Value& j, const Enum (&all)[N], const char* what) {
  const auto& s = j.get_ref<const std::string&>();
  for (Enum e : all)
    if (to_string(e) == s) return e;
  throw WorkflowError(ErrorCode::Validation, std::string("unknown ") + what + " '" + s + "'");
}

constexpr FunctionState kFunctionStates[] = {FunctionState::AwaitingWork, FunctionState::Halted,
                                             FunctionState::Completed};
constexpr MicrotaskKind kMicrotaskKinds[] = {MicrotaskKind::ImplementFunctionBehavior,
                                             MicrotaskKind::Review};
constexpr MicrotaskState kMicrotaskStates[] = {MicrotaskState::Queued, MicrotaskState::Assigned,
                                               MicrotaskState::Submitted, MicrotaskState::Retired};
constexpr PayloadKind kPayloadKinds[] = {PayloadKind::BehaviorContribution, PayloadKind::MarkComplete,
                                         PayloadKind::IssueReport};
constexpr NotificationKind kNotificationKinds[] = {
    NotificationKind::ReviewReceived, NotificationKind::TimeWarning, NotificationKind::IssueResolved};

template <typename T>
void get_opt(const Value& j, const char* key, T& out) {
  if (auto it = j.find(key); it != j.end() && !it->is_null()) it->get_to(out);
}

template <typename T>
void get_opt(const Value& j, const char* key, std::optional<T>& out) {
  if (auto it = j.find(key); it != j.end() && !it->is_null())
    out = it->get<T>();
  else
    out.reset();
}

template <typename T>
Value opt(const std::optional<T>& o) {
  return o ? Value(*o) : Value();
}

}  // namespace

// ---------------------------------------------------------------------------
// Codecs

void to_json(Value& j, const TypeRef& t) { j = t.str(); }
void from_json(const Value& j, TypeRef& t) { t = TypeRef::parse(j.get_ref<const std::string&>()); }

void to_json(Value& j, const Field& f) { j = Value{{"name", f.name}, {"type", f.type}}; }
void from_json(const Value& j, Field& f) {
  j.at("name").get_to(f.name);
  j.at("type").get_to(f.type);
}

void to_json(Value& j, const Adt& a) { j = Value{{"name", a.name}, {"fields", a.fields}}; }
void from_json(const Value& j, Adt& a) {
  j.at("name").get_to(a.name);
  a.fields.clear();
  get_opt(j, "fields", a.fields);
}

void to_json(Value& j, const Signature& s) {
  j = Value{{"params", s.params}, {"returnType", opt(s.returnType)}};
}
void from_json(const Value& j, Signature& s) {
  s.params.clear();
  get_opt(j, "params", s.params);
  s.returnType.reset();
  if (auto it = j.find("returnType"); it != j.end() && !it->is_null() && *it != "void")
    s.returnType = it->get<TypeRef>();
}

void to_json(Value& j, const EndpointSpec& e) {
  j = Value{{"functionName", e.functionName}, {"description", e.description}};
  Value sig = e.signature;
  j["params"] = sig["params"];
  j["returnType"] = sig["returnType"];
}
void from_json(const Value& j, EndpointSpec& e) {
  j.at("functionName").get_to(e.functionName);
  e.description.clear();
  get_opt(j, "description", e.description);
  j.get_to(e.signature);
}

void to_json(Value& j, const ClientRequest& r) {
  j = Value{{"projectName", r.projectName},
            {"projectDescription", r.projectDescription},
            {"endpoints", r.endpoints},
            {"adts", r.adts},
            {"deployTarget", r.deployTarget}};
}
void from_json(const Value& j, ClientRequest& r) {
  r = ClientRequest{};
  get_opt(j, "projectName", r.projectName);
  get_opt(j, "projectDescription", r.projectDescription);
  get_opt(j, "endpoints", r.endpoints);
  get_opt(j, "adts", r.adts);
  if (auto it = j.find("deployTarget"); it != j.end()) r.deployTarget = *it;
}

void to_json(Value& j, const TestCase& t) {
  j = Value{{"id", t.id},
            {"kind", t.kind == TestCase::Kind::IoPair ? "IoPair" : "CodeTest"},
            {"description", t.description},
            {"authorWorkerId", t.authorWorkerId}};
  if (t.kind == TestCase::Kind::IoPair) {
    j["inputs"] = t.inputs;
    j["expectedOutput"] = t.expectedOutput;
  } else {
    j["source"] = t.source;
  }
}
void from_json(const Value& j, TestCase& t) {
  t = TestCase{};
  get_opt(j, "id", t.id);
  const std::string kind = j.value("kind", std::string("IoPair"));
  if (kind == "IoPair") {
    t.kind = TestCase::Kind::IoPair;
  } else if (kind == "CodeTest") {
    t.kind = TestCase::Kind::CodeTest;
  } else {
    throw WorkflowError(ErrorCode::Validation, "unknown test kind '" + kind + "'");
  }
  if (auto it = j.find("inputs"); it != j.end()) t.inputs = *it;
  if (auto it = j.find("expectedOutput"); it != j.end()) t.expectedOutput = *it;
  get_opt(j, "source", t.source);
  get_opt(j, "description", t.description);
  get_opt(j, "authorWorkerId", t.authorWorkerId);
}

void to_json(Value& j, const Stub& s) {
  j = Value{{"calleeName", s.calleeName},
            {"argumentTuple", s.argumentTuple},
            {"returnValue", s.returnValue},
            {"authorWorkerId", s.authorWorkerId}};
}
void from_json(const Value& j, Stub& s) {
  s = Stub{};
  j.at("calleeName").get_to(s.calleeName);
  if (auto it = j.find("argumentTuple"); it != j.end()) s.argumentTuple = *it;
  if (auto it = j.find("returnValue"); it != j.end()) s.returnValue = *it;
  get_opt(j, "authorWorkerId", s.authorWorkerId);
}

void to_json(Value& j, const FunctionArtifact& f) {
  j = Value{{"id", f.id},
            {"name", f.name},
            {"description", f.description},
            {"signature", f.signature},
            {"code", f.code},
            {"tests", f.tests},
            {"stubs", f.stubs},
            {"creator", opt(f.creator)},
            {"state", to_string(f.state)},
            {"haltingIssue", opt(f.haltingIssue)},
            {"version", f.version}};
}
void from_json(const Value& j, FunctionArtifact& f) {
  f = FunctionArtifact{};
  j.at("id").get_to(f.id);
  j.at("name").get_to(f.name);
  get_opt(j, "description", f.description);
  get_opt(j, "signature", f.signature);
  get_opt(j, "code", f.code);
  get_opt(j, "tests", f.tests);
  get_opt(j, "stubs", f.stubs);
  get_opt(j, "creator", f.creator);
  f.state = enum_from(j.at("state"), kFunctionStates, "function state");
  get_opt(j, "haltingIssue", f.haltingIssue);
  get_opt(j, "version", f.version);
}

void to_json(Value& j, const Microtask& m) {
  j = Value{{"id", m.id},
            {"kind", to_string(m.kind)},
            {"functionId", m.functionId},
            {"reworkFeedback", opt(m.reworkFeedback)},
            {"submissionId", opt(m.submissionId)},
            {"state", to_string(m.state)},
            {"assignee", opt(m.assignee)},
            {"assignmentId", opt(m.assignmentId)},
            {"assignedAt", m.assignedAt},
            {"deadline", m.deadline},
            {"warned", m.warned},
            {"createdAt", m.createdAt}};
}
void from_json(const Value& j, Microtask& m) {
  m = Microtask{};
  j.at("id").get_to(m.id);
  m.kind = enum_from(j.at("kind"), kMicrotaskKinds, "microtask kind");
  get_opt(j, "functionId", m.functionId);
  get_opt(j, "reworkFeedback", m.reworkFeedback);
  get_opt(j, "submissionId", m.submissionId);
  m.state = enum_from(j.at("state"), kMicrotaskStates, "microtask state");
  get_opt(j, "assignee", m.assignee);
  get_opt(j, "assignmentId", m.assignmentId);
  get_opt(j, "assignedAt", m.assignedAt);
  get_opt(j, "deadline", m.deadline);
  get_opt(j, "warned", m.warned);
  get_opt(j, "createdAt", m.createdAt);
}

void to_json(Value& j, const NewFunctionSpec& n) {
  j = Value{{"name", n.name}, {"description", n.description}, {"signature", n.signature}};
}
void from_json(const Value& j, NewFunctionSpec& n) {
  n = NewFunctionSpec{};
  j.at("name").get_to(n.name);
  get_opt(j, "description", n.description);
  if (j.contains("signature"))
    j.at("signature").get_to(n.signature);
  else
    j.get_to(n.signature);
}

void to_json(Value& j, const SubmissionPayload& p) {
  j = Value{{"kind", to_string(p.kind)}};
  switch (p.kind) {
    case PayloadKind::BehaviorContribution:
      j["code"] = p.code;
      j["testsAdded"] = p.testsAdded;
      j["stubsAdded"] = p.stubsAdded;
      j["newFunctions"] = p.newFunctions;
      break;
    case PayloadKind::MarkComplete:
      break;
    case PayloadKind::IssueReport:
      j["issueText"] = p.issueText;
      break;
  }
}
void from_json(const Value& j, SubmissionPayload& p) {
  p = SubmissionPayload{};
  p.kind = enum_from(j.at("kind"), kPayloadKinds, "payload kind");
  get_opt(j, "code", p.code);
  get_opt(j, "testsAdded", p.testsAdded);
  get_opt(j, "stubsAdded", p.stubsAdded);
  get_opt(j, "newFunctions", p.newFunctions);
  get_opt(j, "issueText", p.issueText);
}

void to_json(Value& j, const Submission& s) {
  j = Value{{"id", s.id},
            {"microtaskId", s.microtaskId},
            {"workerId", s.workerId},
            {"functionId", s.functionId},
            {"payload", s.payload},
            {"testReport", s.testReport},
            {"baseVersion", s.baseVersion},
            {"baseCode", s.baseCode},
            {"clientToken", s.clientToken},
            {"reviewed", s.reviewed}};
}
void from_json(const Value& j, Submission& s) {
  s = Submission{};
  j.at("id").get_to(s.id);
  get_opt(j, "microtaskId", s.microtaskId);
  get_opt(j, "workerId", s.workerId);
  get_opt(j, "functionId", s.functionId);
  j.at("payload").get_to(s.payload);
  if (auto it = j.find("testReport"); it != j.end()) s.testReport = *it;
  get_opt(j, "baseVersion", s.baseVersion);
  get_opt(j, "baseCode", s.baseCode);
  get_opt(j, "clientToken", s.clientToken);
  get_opt(j, "reviewed", s.reviewed);
}

void to_json(Value& j, const ReviewDecision& d) {
  j = Value{{"submissionId", d.submissionId},
            {"reviewerWorkerId", d.reviewerWorkerId},
            {"stars", d.stars},
            {"feedback", d.feedback}};
}
void from_json(const Value& j, ReviewDecision& d) {
  d = ReviewDecision{};
  get_opt(j, "submissionId", d.submissionId);
  get_opt(j, "reviewerWorkerId", d.reviewerWorkerId);
  get_opt(j, "stars", d.stars);
  get_opt(j, "feedback", d.feedback);
}

void to_json(Value& j, const Issue& i) {
  j = Value{{"id", i.id},
            {"functionId", i.functionId},
            {"reporterWorkerId", i.reporterWorkerId},
            {"text", i.text},
            {"resolved", i.resolved}};
}
void from_json(const Value& j, Issue& i) {
  i = Issue{};
  j.at("id").get_to(i.id);
  get_opt(j, "functionId", i.functionId);
  get_opt(j, "reporterWorkerId", i.reporterWorkerId);
  get_opt(j, "text", i.text);
  get_opt(j, "resolved", i.resolved);
}

void to_json(Value& j, const Question& q) {
  j = Value{{"id", q.id}, {"authorWorkerId", q.authorWorkerId}, {"text", q.text}, {"timestamp", q.timestamp}};
}
void from_json(const Value& j, Question& q) {
  q = Question{};
  j.at("id").get_to(q.id);
  get_opt(j, "authorWorkerId", q.authorWorkerId);
  get_opt(j, "text", q.text);
  get_opt(j, "timestamp", q.timestamp);
}

void to_json(Value& j, const Answer& a) {
  j = Value{{"id", a.id},
            {"questionId", a.questionId},
            {"authorWorkerId", a.authorWorkerId},
            {"text", a.text},
            {"timestamp", a.timestamp}};
}
void from_json(const Value& j, Answer& a) {
  a = Answer{};
  j.at("id").get_to(a.id);
  get_opt(j, "questionId", a.questionId);
  get_opt(j, "authorWorkerId", a.authorWorkerId);
  get_opt(j, "text", a.text);
  get_opt(j, "timestamp", a.timestamp);
}

void to_json(Value& j, const Notification& n) {
  j = Value{{"id", n.id}, {"recipient", n.recipient}, {"kind", to_string(n.kind)}, {"read", n.read}};
  switch (n.kind) {
    case NotificationKind::ReviewReceived:
      j["stars"] = n.stars;
      j["feedback"] = n.feedback;
      j["functionId"] = n.functionId;
      break;
    case NotificationKind::TimeWarning:
      j["assignmentId"] = n.assignmentId;
      break;
    case NotificationKind::IssueResolved:
      j["functionId"] = n.functionId;
      break;
  }
}
void from_json(const Value& j, Notification& n) {
  n = Notification{};
  j.at("id").get_to(n.id);
  get_opt(j, "recipient", n.recipient);
  n.kind = enum_from(j.at("kind"), kNotificationKinds, "notification kind");
  get_opt(j, "stars", n.stars);
  get_opt(j, "feedback", n.feedback);
  get_opt(j, "assignmentId", n.assignmentId);
  get_opt(j, "functionId", n.functionId);
  get_opt(j, "read", n.read);
}

}  // namespace crowdms
