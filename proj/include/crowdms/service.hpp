#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "crowdms/assembler.hpp"
#include "crowdms/engine.hpp"
#include "crowdms/sandbox.hpp"

namespace httplib {
class Server;
}

namespace crowdms {

class Authenticator {
 public:
  virtual ~Authenticator() = default;
  virtual std::optional<Principal> authenticate(const std::string& token) const = 0;
};

/// Opaque bearer tokens from a file: {"<token>": {"role": "client"|"worker", "id": "..."}}.
class StaticTokenAuthenticator final : public Authenticator {
 public:
  StaticTokenAuthenticator() = default;
  explicit StaticTokenAuthenticator(std::map<std::string, Principal> tokens) : tokens_(std::move(tokens)) {}
  static StaticTokenAuthenticator from_file(const std::filesystem::path& path);
  static StaticTokenAuthenticator from_value(const Value& value);

  std::optional<Principal> authenticate(const std::string& token) const override;

 private:
  std::map<std::string, Principal> tokens_;
};

/// Per-project NDJSON event logs under `<dir>/projects/<id>/events.ndjson`,
/// with a state snapshot rewritten every `snapshotEvery` events.
class EventStore {
 public:
  explicit EventStore(std::filesystem::path dataDir, int snapshotEvery = 500);

  std::vector<std::string> project_ids() const;
  bool exists(const std::string& projectId) const;
  Project load(const std::string& projectId) const;
  std::vector<ProjectEvent> events(const std::string& projectId) const;
  void append(const std::string& projectId, const std::vector<ProjectEvent>& events, const ProjectState& state);

  std::filesystem::path project_dir(const std::string& projectId) const;

 private:
  std::filesystem::path dir_;
  int snapshotEvery_;
};

struct RouteSpec {
  std::string method;
  std::string pattern;
};

/// The REST contract, in documentation order.
const std::vector<RouteSpec>& route_table();

struct ServiceConfig {
  /// Empty keeps projects in memory only.
  std::filesystem::path dataDir;
  int snapshotEvery = 500;
  std::shared_ptr<Authenticator> authenticator;
  std::function<Timestamp()> clock;
  /// Runs /run-tests bundles; a MockExecutor when unset.
  std::shared_ptr<ExecutorPort> executor;
  /// Publication target per project; defaults to `<dataDir>/published/<id>`.
  std::function<std::unique_ptr<DeployTarget>(const std::string& projectId)> publishTarget;
};

struct ServiceResponse {
  int status = 200;
  Value body;
};

/// Transport-independent request handling. Every mutating route runs one
/// engine command under the project's lock and persists its batch before
/// answering.
class Service {
 public:
  explicit Service(ServiceConfig config);

  ServiceResponse handle(const std::string& method, const std::string& path, const std::string& authorization,
                         const std::string& body);

  /// Registers every route on an httplib server.
  void mount(httplib::Server& server);

 private:
  struct Slot {
    std::mutex mutex;
    std::optional<Project> project;
  };

  ServiceResponse dispatch(const std::string& method, const std::vector<std::string>& seg, const Principal& who,
                           const Value& body);
  std::shared_ptr<Slot> slot(const std::string& projectId);
  void persist(const std::string& projectId, Project& project, std::int64_t before);
  /// Runs a mutation and persists whatever it committed, including the
  /// expiry batch that precedes a command that then fails.
  void command(const std::string& projectId, Project& project, const std::function<void()>& fn);
  std::string new_project_id();
  Timestamp now() const;

  ServiceResponse create_project(const Principal& who, const Value& body);
  ServiceResponse dashboard(Project& p);
  ServiceResponse fetch(const std::string& pid, Project& p, const Principal& who);
  ServiceResponse submit(const std::string& pid, Project& p, const AssignmentId& a, const Principal& who,
                         const Value& body);
  ServiceResponse skip(const std::string& pid, Project& p, const AssignmentId& a, const Principal& who);
  ServiceResponse run_tests_route(Project& p, const AssignmentId& a, const Principal& who, const Value& body);
  ServiceResponse post_question_route(const std::string& pid, Project& p, const Principal& who, const Value& body);
  ServiceResponse post_answer_route(const std::string& pid, Project& p, const std::string& q, const Principal& who,
                                    const Value& body);
  ServiceResponse questions(const std::string& pid, Project& p);
  ServiceResponse notifications(const std::string& workerId, const Principal& who);
  ServiceResponse resolve(const std::string& pid, Project& p, const IssueId& issue, const Principal& who,
                          const Value& body);
  ServiceResponse publish_route(const std::string& pid, Project& p, const Principal& who, const Value& body);

  ServiceConfig config_;
  std::optional<EventStore> store_;
  std::mutex registryMutex_;
  std::map<std::string, std::shared_ptr<Slot>> projects_;
  std::mutex executorMutex_;
  int nextProjectNumber_ = 1;
};

int http_status(ErrorCode code);
Value error_body(const WorkflowError& e);

}  // namespace crowdms
