#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "crowdms/error.hpp"
#include "crowdms/value.hpp"

namespace crowdms {

using WorkerId = std::string;
using FunctionId = std::string;
using MicrotaskId = std::string;
using SubmissionId = std::string;
using AssignmentId = std::string;
using IssueId = std::string;

// ---------------------------------------------------------------------------
// Types

/// A type reference: a primitive (string, number, boolean) or an ADT name,
/// wrapped in `listDepth` levels of list. Written as e.g. "Todo[]".
struct TypeRef {
  std::string base;
  int listDepth = 0;

  static TypeRef parse(std::string_view text);
  std::string str() const;
  bool is_primitive() const;
  TypeRef element() const { return {base, listDepth - 1}; }

  bool operator==(const TypeRef&) const = default;
};

struct Field {
  std::string name;
  TypeRef type;
  bool operator==(const Field&) const = default;
};

struct Adt {
  std::string name;
  std::vector<Field> fields;
  bool operator==(const Adt&) const = default;
};

using Param = Field;

struct Signature {
  std::vector<Param> params;
  std::optional<TypeRef> returnType;  // nullopt is void
  bool operator==(const Signature&) const = default;
};

struct EndpointSpec {
  std::string functionName;
  std::string description;
  Signature signature;
  bool operator==(const EndpointSpec&) const = default;
};

struct ClientRequest {
  std::string projectName;
  std::string projectDescription;
  std::vector<EndpointSpec> endpoints;
  std::vector<Adt> adts;
  Value deployTarget;  // opaque, null when absent
  bool operator==(const ClientRequest&) const = default;
};

using AdtRegistry = std::map<std::string, Adt>;
AdtRegistry make_registry(const std::vector<Adt>& adts);

bool is_identifier(std::string_view s);

// ---------------------------------------------------------------------------
// Artifacts

struct TestCase {
  enum class Kind { IoPair, CodeTest };
  std::string id;
  Kind kind = Kind::IoPair;
  Value inputs = Value::array();  // IoPair
  Value expectedOutput;           // IoPair
  std::string source;             // CodeTest
  std::string description;
  WorkerId authorWorkerId;
  bool operator==(const TestCase&) const = default;
};

struct Stub {
  std::string calleeName;
  Value argumentTuple = Value::array();
  Value returnValue;
  WorkerId authorWorkerId;

  /// callee + canonical argument tuple; unique within a stub set.
  std::string key() const;
  bool operator==(const Stub&) const = default;
};

enum class FunctionState { AwaitingWork, Halted, Completed };

struct FunctionArtifact {
  FunctionId id;
  std::string name;
  std::string description;
  Signature signature;
  std::string code;
  std::vector<TestCase> tests;
  std::vector<Stub> stubs;
  std::optional<WorkerId> creator;  // set for crowd-created functions
  FunctionState state = FunctionState::AwaitingWork;
  std::optional<IssueId> haltingIssue;
  int version = 0;

  bool is_endpoint() const { return !creator.has_value(); }
  bool operator==(const FunctionArtifact&) const = default;
};

enum class MicrotaskKind { ImplementFunctionBehavior, Review };
enum class MicrotaskState { Queued, Assigned, Submitted, Retired };

struct Microtask {
  MicrotaskId id;
  MicrotaskKind kind = MicrotaskKind::ImplementFunctionBehavior;
  FunctionId functionId;
  std::optional<std::string> reworkFeedback;  // IFB only
  std::optional<SubmissionId> submissionId;   // Review only
  MicrotaskState state = MicrotaskState::Queued;
  std::optional<WorkerId> assignee;
  std::optional<AssignmentId> assignmentId;
  Timestamp assignedAt = 0;
  Timestamp deadline = 0;
  bool warned = false;
  Timestamp createdAt = 0;

  bool live() const { return state != MicrotaskState::Retired; }
  bool operator==(const Microtask&) const = default;
};

struct NewFunctionSpec {
  std::string name;
  std::string description;
  Signature signature;
  bool operator==(const NewFunctionSpec&) const = default;
};

enum class PayloadKind { BehaviorContribution, MarkComplete, IssueReport };

struct SubmissionPayload {
  PayloadKind kind = PayloadKind::BehaviorContribution;
  std::string code;  // full post-edit source
  std::vector<TestCase> testsAdded;
  std::vector<Stub> stubsAdded;
  std::vector<NewFunctionSpec> newFunctions;
  std::string issueText;
  bool operator==(const SubmissionPayload&) const = default;
};

struct Submission {
  SubmissionId id;
  MicrotaskId microtaskId;
  WorkerId workerId;
  FunctionId functionId;
  SubmissionPayload payload;
  Value testReport;  // null when the worker did not run tests
  int baseVersion = 0;
  std::string baseCode;
  std::string clientToken;
  bool reviewed = false;
  bool operator==(const Submission&) const = default;
};

struct ReviewDecision {
  SubmissionId submissionId;
  WorkerId reviewerWorkerId;
  int stars = 0;
  std::string feedback;

  bool accepted() const { return stars >= 4; }
  bool operator==(const ReviewDecision&) const = default;
};

struct Issue {
  IssueId id;
  FunctionId functionId;
  WorkerId reporterWorkerId;
  std::string text;
  bool resolved = false;
  bool operator==(const Issue&) const = default;
};

struct Question {
  std::string id;
  std::string authorWorkerId;
  std::string text;
  Timestamp timestamp = 0;
  bool operator==(const Question&) const = default;
};

struct Answer {
  std::string id;
  std::string questionId;
  std::string authorWorkerId;
  std::string text;
  Timestamp timestamp = 0;
  bool operator==(const Answer&) const = default;
};

enum class NotificationKind { ReviewReceived, TimeWarning, IssueResolved };

struct Notification {
  std::string id;
  WorkerId recipient;
  NotificationKind kind = NotificationKind::ReviewReceived;
  int stars = 0;
  std::string feedback;
  AssignmentId assignmentId;
  FunctionId functionId;
  bool read = false;
  bool operator==(const Notification&) const = default;
};

// ---------------------------------------------------------------------------
// Validation

ValidationResult validate_client_request(const ClientRequest& request);

/// Structural check of `value` against `type`. Throws WorkflowError(Validation)
/// when the type itself does not resolve in `adts`.
ValidationResult validate_value(const Value& value, const TypeRef& type, const AdtRegistry& adts);

/// Checks a signature's types resolve; violations are prefixed with `path`.
void validate_signature(const Signature& sig, const AdtRegistry& adts, const std::string& path,
                        ValidationResult& out);

// ---------------------------------------------------------------------------
// Codecs (canonical-form wire representation)

std::string_view to_string(FunctionState s);
std::string_view to_string(MicrotaskKind k);
std::string_view to_string(MicrotaskState s);
std::string_view to_string(PayloadKind k);
std::string_view to_string(NotificationKind k);

void to_json(Value& j, const TypeRef& t);
void from_json(const Value& j, TypeRef& t);
void to_json(Value& j, const Field& f);
void from_json(const Value& j, Field& f);
void to_json(Value& j, const Adt& a);
void from_json(const Value& j, Adt& a);
void to_json(Value& j, const Signature& s);
void from_json(const Value& j, Signature& s);
void to_json(Value& j, const EndpointSpec& e);
void from_json(const Value& j, EndpointSpec& e);
void to_json(Value& j, const ClientRequest& r);
void from_json(const Value& j, ClientRequest& r);
void to_json(Value& j, const TestCase& t);
void from_json(const Value& j, TestCase& t);
void to_json(Value& j, const Stub& s);
void from_json(const Value& j, Stub& s);
void to_json(Value& j, const FunctionArtifact& f);
void from_json(const Value& j, FunctionArtifact& f);
void to_json(Value& j, const Microtask& m);
void from_json(const Value& j, Microtask& m);
void to_json(Value& j, const NewFunctionSpec& n);
void from_json(const Value& j, NewFunctionSpec& n);
void to_json(Value& j, const SubmissionPayload& p);
void from_json(const Value& j, SubmissionPayload& p);
void to_json(Value& j, const Submission& s);
void from_json(const Value& j, Submission& s);
void to_json(Value& j, const ReviewDecision& d);
void from_json(const Value& j, ReviewDecision& d);
void to_json(Value& j, const Issue& i);
void from_json(const Value& j, Issue& i);
void to_json(Value& j, const Question& q);
void from_json(const Value& j, Question& q);
void to_json(Value& j, const Answer& a);
void from_json(const Value& j, Answer& a);
void to_json(Value& j, const Notification& n);
void from_json(const Value& j, Notification& n);

}  // namespace crowdms
