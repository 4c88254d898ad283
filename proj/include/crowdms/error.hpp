#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace crowdms {

enum class ErrorCode {
  Validation,
  NotFound,
  StaleAssignment,
  Conflict,
  Unauthorized,
  Forbidden,
  Incomplete,
  Corrupt,
  Io,
};

std::string_view to_string(ErrorCode code);

/// One offending element of a request, e.g. {"endpoints[2].params[0]", "unresolved type 'Todoo'"}.
struct Violation {
  std::string path;
  std::string message;

  bool operator==(const Violation&) const = default;
};

struct ValidationResult {
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }
  void add(std::string path, std::string message) {
    violations.push_back({std::move(path), std::move(message)});
  }
};

/// Raised by engine commands; the service maps the code to an HTTP status.
class WorkflowError : public std::runtime_error {
 public:
  WorkflowError(ErrorCode code, const std::string& message, std::vector<Violation> violations = {})
      : std::runtime_error(message), code_(code), violations_(std::move(violations)) {}

  ErrorCode code() const noexcept { return code_; }
  const std::vector<Violation>& violations() const noexcept { return violations_; }

 private:
  ErrorCode code_;
  std::vector<Violation> violations_;
};

}  // namespace crowdms
