#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "crowdms/engine.hpp"
#include "crowdms/state.hpp"

namespace crowdms {

struct RouteEntry {
  std::string method;
  std::string path;
  std::string functionName;
  std::vector<Param> params;
  bool operator==(const RouteEntry&) const = default;
};

struct AssemblerOptions {
  /// Endpoints are GET with body parameters unless switched to POST.
  std::string httpMethod = "GET";
  /// Assemble even when functions are unfinished.
  bool force = false;
};

struct GeneratedHandler {
  std::string source;
  RouteEntry route;
};

/// Handler wrapper for one endpoint: reads each parameter from the request
/// body by name, 400 on validation failure, 500 when the function throws.
GeneratedHandler generate_handler(const EndpointSpec& endpoint, const AssemblerOptions& options = {});

struct ProjectArtifactTree {
  std::map<std::string, std::string> files;  // relative path -> content
  std::vector<RouteEntry> routeManifest;

  /// SHA-256 over paths and contents, hex encoded.
  std::string content_hash() const;
};

/// Emits functions/<name>.js, handlers/routes.js, handlers/validate.js,
/// persistence/adapter.js, manifest.json, main.js and package.json.
/// Throws WorkflowError(Incomplete) naming unfinished functions unless forced.
ProjectArtifactTree assemble_project(const ProjectState& state, const AssemblerOptions& options = {});

class DeployTarget {
 public:
  virtual ~DeployTarget() = default;
  virtual std::string name() const = 0;
  /// Returns the location the tree was published to; throws on failure.
  virtual std::string deploy(const ProjectArtifactTree& tree) = 0;
};

/// Writes the tree under a directory. An existing directory is replaced only
/// if it holds a previous publication (manifest.json) or is empty.
class LocalDirectoryTarget final : public DeployTarget {
 public:
  explicit LocalDirectoryTarget(std::filesystem::path root) : root_(std::move(root)) {}
  std::string name() const override { return "local-directory"; }
  std::string deploy(const ProjectArtifactTree& tree) override;

 private:
  std::filesystem::path root_;
};

/// Hands the tree to a callback (e.g. a repository or hosting integration).
class HookTarget final : public DeployTarget {
 public:
  HookTarget(std::string name, std::function<std::string(const ProjectArtifactTree&)> hook)
      : name_(std::move(name)), hook_(std::move(hook)) {}
  std::string name() const override { return name_; }
  std::string deploy(const ProjectArtifactTree& tree) override { return hook_(tree); }

 private:
  std::string name_;
  std::function<std::string(const ProjectArtifactTree&)> hook_;
};

/// Deploys the tree; nothing is recorded if the target fails.
PublicationRecord publish(const ProjectArtifactTree& tree, DeployTarget& target, Timestamp now);

/// Assembles, deploys and appends ProjectPublished only after a successful deploy.
PublicationRecord publish_project(Project& project, DeployTarget& target, const AssemblerOptions& options,
                                  Timestamp now);

Value manifest_value(const ProjectArtifactTree& tree);

}  // namespace crowdms
