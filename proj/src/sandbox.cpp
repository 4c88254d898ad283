#include "crowdms/sandbox.hpp"

#include <algorithm>
#include <istream>
#include <map>
#include <ostream>

namespace crowdms {

const BundleFunction* ExecutionBundle::find(std::string_view name) const {
  auto it = std::find_if(functions.begin(), functions.end(), [&](const BundleFunction& f) { return f.name == name; });
  return it == functions.end() ? nullptr : &*it;
}

std::set<std::string> ExecutionBundle::implemented_set() const {
  std::set<std::string> out;
  for (const auto& f : functions) {
    bool blank = std::all_of(f.source.begin(), f.source.end(), [](unsigned char c) { return std::isspace(c); });
    if (!blank) out.insert(f.name);
  }
  return out;
}

std::string_view to_string(TestStatus s) {
  switch (s) {
    case TestStatus::Passed: return "Passed";
    case TestStatus::Failed: return "Failed";
    case TestStatus::Errored: return "Errored";
  }
  return "";
}

std::size_t TestRunReport::count(TestStatus s) const {
  return static_cast<std::size_t>(
      std::count_if(perTest.begin(), perTest.end(), [&](const TestResult& r) { return r.status == s; }));
}

const TestResult* TestRunReport::find(std::string_view testId) const {
  auto it = std::find_if(perTest.begin(), perTest.end(), [&](const TestResult& r) { return r.testId == testId; });
  return it == perTest.end() ? nullptr : &*it;
}

CallResolution resolve_call(std::string_view callee, const Value& argumentTuple, std::span<const Stub> stubs,
                            const std::set<std::string>& implemented) {
  const std::string args = canonicalize(argumentTuple);
  for (const auto& stub : stubs) {
    if (stub.calleeName == callee && canonicalize(stub.argumentTuple) == args)
      return {CallResolution::Kind::UseStub, stub.returnValue};
  }
  if (implemented.count(std::string(callee))) return {CallResolution::Kind::CallReal, {}};
  return {CallResolution::Kind::MissError, {}};
}

ValidationResult validate_bundle(const ExecutionBundle& bundle) {
  ValidationResult out;
  if (!bundle.find(bundle.entryFunction))
    out.add("entryFunction", "entry function '" + bundle.entryFunction + "' is not in the bundle");
  std::set<std::string> ids;
  for (std::size_t i = 0; i < bundle.tests.size(); ++i)
    if (!ids.insert(bundle.tests[i].id).second)
      out.add("tests[" + std::to_string(i) + "]", "duplicate test id '" + bundle.tests[i].id + "'");
  std::set<std::string> keys;
  for (std::size_t i = 0; i < bundle.stubs.size(); ++i)
    if (!keys.insert(bundle.stubs[i].key()).second)
      out.add("stubs[" + std::to_string(i) + "]", "duplicate stub for " + bundle.stubs[i].calleeName);
  return out;
}

TestRunReport run_tests(const ExecutionBundle& bundle, ExecutorPort& executor) {
  auto check = validate_bundle(bundle);
  if (!check.ok()) throw WorkflowError(ErrorCode::Validation, "invalid execution bundle", std::move(check.violations));

  TestRunReport raw;
  std::string failure;
  try {
    raw = executor.execute(bundle);
    if (raw.bundleId != bundle.bundleId) failure = "executor answered for bundle '" + raw.bundleId + "'";
  } catch (const std::exception& e) {
    failure = std::string("executor failure: ") + e.what();
  }

  TestRunReport report;
  report.bundleId = bundle.bundleId;
  if (failure.empty()) report.persistenceFinalState = raw.persistenceFinalState;
  for (const auto& test : bundle.tests) {
    const TestResult* r = failure.empty() ? raw.find(test.id) : nullptr;
    if (r) {
      report.perTest.push_back(*r);
    } else {
      report.perTest.push_back(
          {test.id, TestStatus::Errored, failure.empty() ? "executor returned no result for this test" : failure, {}, {}, {}});
    }
  }
  return report;
}

ExecutionBundle make_bundle(const ProjectState& state, const FunctionId& function, const BundleOverrides& overrides,
                            std::vector<SeedDocument> seed) {
  const auto* fn = state.find_function(function);
  if (!fn) throw WorkflowError(ErrorCode::NotFound, "unknown function " + function);
  ExecutionBundle b;
  b.bundleId = state.projectId + ":" + fn->id + ":v" + std::to_string(fn->version);
  for (const auto& id : state.functionOrder) {
    const auto& f = state.functions.at(id);
    BundleFunction bf{f.name, {}, f.code, f.version};
    for (const auto& p : f.signature.params) bf.params.push_back(p.name);
    if (f.id == function && overrides.code) bf.source = *overrides.code;
    b.functions.push_back(std::move(bf));
  }
  b.entryFunction = fn->name;
  b.tests = fn->tests;
  for (const auto& t : overrides.extraTests) {
    auto it = std::find_if(b.tests.begin(), b.tests.end(), [&](const TestCase& x) { return x.id == t.id; });
    if (it != b.tests.end())
      *it = t;
    else
      b.tests.push_back(t);
  }
  b.stubs = fn->stubs;
  for (const auto& s : overrides.extraStubs) {
    auto it = std::find_if(b.stubs.begin(), b.stubs.end(), [&](const Stub& x) { return x.key() == s.key(); });
    if (it != b.stubs.end())
      *it = s;
    else
      b.stubs.push_back(s);
  }
  b.persistenceSeed = std::move(seed);
  return b;
}

// ---------------------------------------------------------------------------

namespace {

Value call_record(const CallRecord& c) { return {{"calleeName", c.calleeName}, {"argumentTuple", c.argumentTuple}}; }

CallRecord call_record_from(const Value& j) {
  return {j.at("calleeName").get<std::string>(), j.value("argumentTuple", Value::array())};
}

}  // namespace

void to_json(Value& j, const ExecutionBundle& b) {
  Value fns = Value::array();
  for (const auto& f : b.functions)
    fns.push_back({{"name", f.name}, {"params", f.params}, {"source", f.source}, {"version", f.version}});
  Value seed = Value::array();
  for (const auto& d : b.persistenceSeed) seed.push_back({{"collection", d.collection}, {"id", d.id}, {"value", d.value}});
  j = Value{{"bundleId", b.bundleId},
            {"functions", fns},
            {"entryFunction", b.entryFunction},
            {"tests", b.tests},
            {"stubs", b.stubs},
            {"persistenceSeed", seed},
            {"limits", {{"wallTimeMs", b.limits.wallTimeMs}, {"outputBytes", b.limits.outputBytes}}}};
}

void from_json(const Value& j, ExecutionBundle& b) {
  b = ExecutionBundle{};
  j.at("bundleId").get_to(b.bundleId);
  for (const auto& f : j.at("functions"))
    b.functions.push_back({f.at("name").get<std::string>(), f.value("params", std::vector<std::string>{}),
                           f.value("source", std::string()), f.value("version", 0)});
  j.at("entryFunction").get_to(b.entryFunction);
  j.at("tests").get_to(b.tests);
  j.at("stubs").get_to(b.stubs);
  for (const auto& d : j.at("persistenceSeed"))
    b.persistenceSeed.push_back({d.at("collection").get<std::string>(), d.at("id").get<std::string>(), d.at("value")});
  if (auto it = j.find("limits"); it != j.end()) {
    b.limits.wallTimeMs = it->value("wallTimeMs", b.limits.wallTimeMs);
    b.limits.outputBytes = it->value("outputBytes", b.limits.outputBytes);
  }
}

void to_json(Value& j, const TestResult& r) {
  Value traces = Value::array();
  for (const auto& t : r.traces) traces.push_back({{"expression", t.expression}, {"values", t.values}});
  Value hits = Value::array(), misses = Value::array();
  for (const auto& c : r.stubHits) hits.push_back(call_record(c));
  for (const auto& c : r.stubMisses) misses.push_back(call_record(c));
  j = Value{{"testId", r.testId},
            {"status", to_string(r.status)},
            {"message", r.message},
            {"traces", traces},
            {"stubHits", hits},
            {"stubMisses", misses}};
}

void from_json(const Value& j, TestResult& r) {
  r = TestResult{};
  j.at("testId").get_to(r.testId);
  const auto status = j.at("status").get<std::string>();
  if (status == "Passed")
    r.status = TestStatus::Passed;
  else if (status == "Failed")
    r.status = TestStatus::Failed;
  else if (status == "Errored")
    r.status = TestStatus::Errored;
  else
    throw WorkflowError(ErrorCode::Corrupt, "unknown test status '" + status + "'");
  r.message = j.value("message", std::string());
  for (const auto& t : j.value("traces", Value::array()))
    r.traces.push_back({t.at("expression").get<std::string>(), t.value("values", std::vector<Value>{})});
  for (const auto& c : j.value("stubHits", Value::array())) r.stubHits.push_back(call_record_from(c));
  for (const auto& c : j.value("stubMisses", Value::array())) r.stubMisses.push_back(call_record_from(c));
}

void to_json(Value& j, const TestRunReport& r) {
  j = Value{{"bundleId", r.bundleId}, {"perTest", r.perTest}, {"persistenceFinalState", r.persistenceFinalState}};
}

void from_json(const Value& j, TestRunReport& r) {
  r = TestRunReport{};
  j.at("bundleId").get_to(r.bundleId);
  j.at("perTest").get_to(r.perTest);
  r.persistenceFinalState = j.value("persistenceFinalState", Value::object());
}

std::string frame_record(std::string_view payload) {
  std::string out = std::to_string(payload.size());
  out += '\n';
  out.append(payload);
  return out;
}

void write_record(std::ostream& out, std::string_view payload) {
  out << frame_record(payload);
  out.flush();
}

std::optional<std::string> read_record(std::istream& in, std::size_t maxBytes) {
  std::string header;
  int c;
  while ((c = in.get()) != std::char_traits<char>::eof() && c != '\n') {
    if (c < '0' || c > '9' || header.size() > 20)
      throw WorkflowError(ErrorCode::Corrupt, "malformed record header");
    header += static_cast<char>(c);
  }
  if (c == std::char_traits<char>::eof()) {
    if (header.empty()) return std::nullopt;
    throw WorkflowError(ErrorCode::Corrupt, "truncated record header");
  }
  if (header.empty()) throw WorkflowError(ErrorCode::Corrupt, "empty record header");
  const auto size = std::stoull(header);
  if (size > maxBytes) throw WorkflowError(ErrorCode::Corrupt, "record exceeds size limit");
  std::string payload(size, '\0');
  in.read(payload.data(), static_cast<std::streamsize>(size));
  if (static_cast<std::size_t>(in.gcount()) != size) throw WorkflowError(ErrorCode::Corrupt, "truncated record");
  return payload;
}

}  // namespace crowdms
