#include <gtest/gtest.h>

#include "crowdms/fixtures.hpp"
#include "crowdms/model.hpp"
#include "support.hpp"

using namespace crowdms;

namespace {

AdtRegistry todo_registry() {
  return make_registry({{"Todo",
                         {{"id", TypeRef::parse("string")},
                          {"title", TypeRef::parse("string")},
                          {"status", TypeRef::parse("string")}}}});
}

bool mentions(const ValidationResult& r, const std::string& needle) {
  for (const auto& v : r.violations)
    if (v.path.find(needle) != std::string::npos || v.message.find(needle) != std::string::npos) return true;
  return false;
}

}  // namespace

TEST(TypeRef, ParsesListDepth) {
  const auto t = TypeRef::parse("Todo[][]");
  EXPECT_EQ(t.base, "Todo");
  EXPECT_EQ(t.listDepth, 2);
  EXPECT_EQ(t.str(), "Todo[][]");
  EXPECT_EQ(t.element().str(), "Todo[]");
  EXPECT_TRUE(TypeRef::parse("boolean").is_primitive());
}

TEST(ValidateClientRequest, AcceptsTodoFixture) {
  const auto request = fixtures::todo_request();
  EXPECT_EQ(request.endpoints.size(), 12u);
  const auto r = validate_client_request(request);
  EXPECT_TRUE(r.ok()) << (r.ok() ? "" : r.violations.front().message);
}

TEST(ValidateClientRequest, RequiresAnEndpoint) {
  auto request = fixtures::todo_request();
  request.endpoints.clear();
  const auto r = validate_client_request(request);
  ASSERT_FALSE(r.ok());
  EXPECT_TRUE(mentions(r, "at least one endpoint required"));
}

TEST(ValidateClientRequest, NamesUnresolvedType) {
  auto request = fixtures::todo_request();
  request.endpoints[0].signature.params[1].type = TypeRef::parse("Todoo");
  const auto r = validate_client_request(request);
  ASSERT_FALSE(r.ok());
  EXPECT_TRUE(mentions(r, "Todoo"));
  EXPECT_TRUE(mentions(r, "createTodo"));
}

TEST(ValidateClientRequest, RejectsByValueAdtCycle) {
  ClientRequest r = support::small_request();
  r.adts = {{"A", {{"b", TypeRef::parse("B")}}}, {"B", {{"a", TypeRef::parse("A")}}}};
  EXPECT_FALSE(validate_client_request(r).ok());
  r.adts = {{"A", {{"children", TypeRef::parse("A[]")}}}};
  EXPECT_TRUE(validate_client_request(r).ok());
}

// Every single-field mutation that breaks an invariant is rejected.
TEST(ValidateClientRequestProperty, RejectsBreakingMutations) {
  const auto base = fixtures::todo_request();
  support::ValueGen gen(99);
  using Mutation = std::function<void(ClientRequest&)>;
  const std::vector<std::pair<std::string, Mutation>> mutations = {
      {"empty project name", [](ClientRequest& r) { r.projectName = ""; }},
      {"no endpoints", [](ClientRequest& r) { r.endpoints.clear(); }},
      {"endpoint name not an identifier", [&](ClientRequest& r) { r.endpoints[gen.below(12)].functionName = "9bad"; }},
      {"endpoint name blank", [&](ClientRequest& r) { r.endpoints[gen.below(12)].functionName = ""; }},
      {"duplicate endpoint name",
       [&](ClientRequest& r) {
         const auto i = gen.below(11);
         r.endpoints[i + 1].functionName = r.endpoints[i].functionName;
       }},
      {"blank description", [&](ClientRequest& r) { r.endpoints[gen.below(12)].description = " "; }},
      {"unresolved param type",
       [&](ClientRequest& r) { r.endpoints[gen.below(12)].signature.params[0].type = TypeRef::parse("Missing"); }},
      {"unresolved return type",
       [&](ClientRequest& r) { r.endpoints[gen.below(12)].signature.returnType = TypeRef::parse("Nope[]"); }},
      {"duplicate param name",
       [&](ClientRequest& r) {
         auto& ps = r.endpoints[gen.below(10)].signature.params;
         ps.push_back(ps.front());
       }},
      {"param name not an identifier",
       [&](ClientRequest& r) { r.endpoints[gen.below(12)].signature.params[0].name = "user id"; }},
      {"duplicate adt", [](ClientRequest& r) { r.adts.push_back(r.adts.front()); }},
      {"adt name collides with primitive", [](ClientRequest& r) { r.adts[1].name = "string"; }},
      {"adt field unresolved", [&](ClientRequest& r) { r.adts[0].fields[gen.below(7)].type = TypeRef::parse("Ghost"); }},
      {"adt duplicate field", [](ClientRequest& r) { r.adts[0].fields.push_back(r.adts[0].fields.front()); }},
  };
  for (int round = 0; round < 10; ++round) {
    for (const auto& [name, mutate] : mutations) {
      auto request = base;
      mutate(request);
      EXPECT_FALSE(validate_client_request(request).ok()) << name;
    }
  }
}

TEST(ValidateValue, ExactStructuralMatch) {
  const auto adts = todo_registry();
  const auto todo = TypeRef::parse("Todo");
  EXPECT_TRUE(validate_value(parse_value(R"({"id":"1","title":"buy milk","status":"open"})"), todo, adts).ok());
}

TEST(ValidateValue, MissingField) {
  const auto r = validate_value(parse_value(R"({"id":"1","status":"open"})"), TypeRef::parse("Todo"), todo_registry());
  ASSERT_FALSE(r.ok());
  EXPECT_TRUE(mentions(r, "missing field title"));
}

TEST(ValidateValue, ExtraFieldRejected) {
  const auto r = validate_value(parse_value(R"({"id":"1","title":"t","status":"s","x":1})"), TypeRef::parse("Todo"),
                                todo_registry());
  ASSERT_FALSE(r.ok());
  EXPECT_TRUE(mentions(r, "unexpected field"));
}

TEST(ValidateValue, ListsAndPrimitives) {
  const AdtRegistry none;
  EXPECT_TRUE(validate_value(parse_value(R"(["a","b"])"), TypeRef::parse("string[]"), none).ok());
  EXPECT_FALSE(validate_value(parse_value(R"(["a",1])"), TypeRef::parse("string[]"), none).ok());
  EXPECT_FALSE(validate_value(Value(true), TypeRef::parse("number"), none).ok());
  EXPECT_TRUE(validate_value(Value(2.5), TypeRef::parse("number"), none).ok());
  EXPECT_FALSE(validate_value(Value(), TypeRef::parse("string"), none).ok());
}

TEST(ValidateValue, UnresolvableTypeThrows) {
  EXPECT_THROW(validate_value(Value("x"), TypeRef::parse("Ghost"), todo_registry()), WorkflowError);
}

TEST(ValidateValueProperty, DeterministicAndTotal) {
  support::ValueGen gen(5);
  const auto adts = todo_registry();
  for (const char* type : {"string", "number", "boolean", "Todo", "Todo[]", "string[][]"}) {
    for (int i = 0; i < 300; ++i) {
      const Value v = gen.value();
      const auto a = validate_value(v, TypeRef::parse(type), adts);
      const auto b = validate_value(v, TypeRef::parse(type), adts);
      EXPECT_EQ(a.ok(), b.ok());
      EXPECT_EQ(a.violations.size(), b.violations.size());
    }
  }
}

TEST(ModelCodec, ClientRequestRoundTrip) {
  const auto request = fixtures::todo_request();
  Value j = request;
  EXPECT_EQ(j.get<ClientRequest>(), request);
  EXPECT_EQ(canonicalize(Value(j.get<ClientRequest>())), canonicalize(j));
}

TEST(ModelCodec, SubmissionRoundTrip) {
  Submission s;
  s.id = "s1";
  s.microtaskId = "m1";
  s.workerId = "w";
  s.functionId = "f1";
  s.payload = support::contribution("function f() {}");
  s.payload.stubsAdded.push_back({"g", Value::array({1, "a"}), Value{{"k", 2}}, "w"});
  s.payload.newFunctions.push_back(fixtures::date_helper_spec());
  TestCase t;
  t.id = "s1.t1";
  t.inputs = Value::array({1});
  t.expectedOutput = Value("x");
  s.payload.testsAdded.push_back(t);
  Value j = s;
  EXPECT_EQ(j.get<Submission>(), s);
}
