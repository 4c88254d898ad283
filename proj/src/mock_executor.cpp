#include "crowdms/mock_executor.hpp"

#include "crowdms/labels.hpp"

namespace crowdms {

MockStep MockStep::call(std::string callee, Value args, std::optional<Value> expect) {
  MockStep s;
  s.kind = Kind::Call;
  s.callee = std::move(callee);
  s.args = std::move(args);
  s.expect = std::move(expect);
  return s;
}

MockStep MockStep::save(std::string collection, std::string id, Value value) {
  MockStep s;
  s.kind = Kind::Save;
  s.collection = std::move(collection);
  s.id = std::move(id);
  s.value = std::move(value);
  return s;
}

MockStep MockStep::get(std::string collection, std::string id, std::optional<Value> expect) {
  MockStep s;
  s.kind = Kind::Get;
  s.collection = std::move(collection);
  s.id = std::move(id);
  s.expect = std::move(expect);
  return s;
}

MockStep MockStep::update(std::string collection, std::string id, Value value, std::optional<Value> expect) {
  MockStep s = save(std::move(collection), std::move(id), std::move(value));
  s.kind = Kind::Update;
  s.expect = std::move(expect);
  return s;
}

MockStep MockStep::remove(std::string collection, std::string id, std::optional<Value> expect) {
  MockStep s = get(std::move(collection), std::move(id), std::move(expect));
  s.kind = Kind::Remove;
  return s;
}

MockStep MockStep::list(std::string collection, std::optional<Value> expect) {
  MockStep s;
  s.kind = Kind::List;
  s.collection = std::move(collection);
  s.expect = std::move(expect);
  return s;
}

MockStep MockStep::returns(Value value) {
  MockStep s;
  s.kind = Kind::Return;
  s.value = std::move(value);
  return s;
}

MockStep MockStep::raise(std::string message) {
  MockStep s;
  s.kind = Kind::Throw;
  s.message = std::move(message);
  return s;
}

void MockExecutor::script(const std::string& entryFunction, int version, const std::string& testId, MockScript script) {
  scripts_[{entryFunction, version, testId}] = std::move(script);
}

void MockExecutor::real_result(const std::string& callee, const Value& args, Value result) {
  realResults_[callee + "|" + canonicalize(args)] = std::move(result);
}

TestRunReport MockExecutor::execute(const ExecutionBundle& bundle) {
  ++executions_;
  TestRunReport report;
  report.bundleId = bundle.bundleId;
  for (const auto& test : bundle.tests) {
    DocumentStore store;
    for (const auto& doc : bundle.persistenceSeed) store.save(doc.collection, doc.id, doc.value);
    report.perTest.push_back(run_one(bundle, test, store));
    report.persistenceFinalState = store.snapshot();
  }
  return report;
}

namespace {

std::string describe_call(const std::string& callee, const Value& args) {
  std::string a = canonicalize(args);
  if (a.size() >= 2) a = a.substr(1, a.size() - 2);
  return callee + "(" + a + ")";
}

}  // namespace

TestResult MockExecutor::run_one(const ExecutionBundle& bundle, const TestCase& test, DocumentStore& store) {
  TestResult result;
  result.testId = test.id;
  const BundleFunction* entry = bundle.find(bundle.entryFunction);
  const int version = entry ? entry->version : 0;
  const std::string source = entry ? entry->source : std::string();

  auto it = scripts_.find({bundle.entryFunction, version, test.id});
  if (it == scripts_.end()) {
    if (test.kind == TestCase::Kind::CodeTest) {
      if (auto behavior = labels::checked_behavior(test.source)) {
        if (labels::behavior_passes(source, *behavior)) {
          result.status = TestStatus::Passed;
        } else if (labels::behaviors(source).count(*behavior)) {
          result.status = TestStatus::Failed;
          result.message = "behavior " + *behavior + " is defective";
        } else {
          result.status = TestStatus::Failed;
          result.message = "behavior " + *behavior + " is not implemented";
        }
        return result;
      }
    } else if (!bundle.implemented_set().count(bundle.entryFunction)) {
      const Value actual;  // undefined
      result.traces.push_back({bundle.entryFunction + "(...)", {actual}});
      if (canonical_equal(actual, test.expectedOutput)) {
        result.status = TestStatus::Passed;
      } else {
        result.status = TestStatus::Failed;
        result.message = "expected " + canonicalize(test.expectedOutput) + " but got undefined";
      }
      return result;
    }
    result.status = TestStatus::Errored;
    result.message = "no scripted outcome for test " + test.id;
    return result;
  }

  const MockScript& script = it->second;
  const auto implemented = bundle.implemented_set();
  Value output;
  std::optional<std::pair<TestStatus, std::string>> outcome;

  auto check = [&](const std::string& what, const Value& actual, const std::optional<Value>& expect) {
    result.traces.push_back({what, {actual}});
    if (expect && !canonical_equal(actual, *expect) && !outcome)
      outcome = {TestStatus::Failed, what + ": expected " + canonicalize(*expect) + " but got " + canonicalize(actual)};
  };

  for (const auto& step : script.steps) {
    if (outcome && outcome->first == TestStatus::Errored) break;
    switch (step.kind) {
      case MockStep::Kind::Call: {
        const auto res = resolve_call(step.callee, step.args, bundle.stubs, implemented);
        const std::string what = describe_call(step.callee, step.args);
        if (res.kind == CallResolution::Kind::UseStub) {
          result.stubHits.push_back({step.callee, step.args});
          check(what, res.returnValue, step.expect);
        } else if (res.kind == CallResolution::Kind::CallReal) {
          auto r = realResults_.find(step.callee + "|" + canonicalize(step.args));
          check(what, r == realResults_.end() ? Value() : r->second, step.expect);
        } else {
          result.stubMisses.push_back({step.callee, step.args});
          outcome = {TestStatus::Errored, "stub miss: " + what + " is not implemented and has no stub"};
        }
        break;
      }
      case MockStep::Kind::Save:
        check("save(" + step.collection + "," + step.id + ")", store.save(step.collection, step.id, step.value),
              step.expect);
        break;
      case MockStep::Kind::Get: {
        auto v = store.get(step.collection, step.id);
        check("get(" + step.collection + "," + step.id + ")", v ? *v : Value(), step.expect);
        break;
      }
      case MockStep::Kind::Update: {
        auto r = store.update(step.collection, step.id, step.value);
        check("update(" + step.collection + "," + step.id + ")",
              r.ok() ? *r.value : Value{{"error", r.error}}, step.expect);
        break;
      }
      case MockStep::Kind::Remove:
        check("remove(" + step.collection + "," + step.id + ")", store.remove(step.collection, step.id), step.expect);
        break;
      case MockStep::Kind::List: {
        Value arr = Value::array();
        for (auto& v : store.list(step.collection)) arr.push_back(std::move(v));
        check("list(" + step.collection + ")", arr, step.expect);
        break;
      }
      case MockStep::Kind::Return:
        output = step.value;
        result.traces.push_back({"return", {output}});
        break;
      case MockStep::Kind::Throw:
        outcome = {TestStatus::Errored, step.message};
        break;
    }
  }

  if (script.status && result.stubMisses.empty()) {
    result.status = *script.status;
    result.message = script.message;
  } else if (outcome) {
    result.status = outcome->first;
    result.message = outcome->second;
  } else if (test.kind == TestCase::Kind::IoPair) {
    if (canonical_equal(output, test.expectedOutput)) {
      result.status = TestStatus::Passed;
    } else {
      result.status = TestStatus::Failed;
      result.message = "expected " + canonicalize(test.expectedOutput) + " but got " + canonicalize(output);
    }
  } else {
    result.status = TestStatus::Passed;
  }
  return result;
}

}  // namespace crowdms
