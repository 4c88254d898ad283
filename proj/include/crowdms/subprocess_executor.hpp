#pragma once

#include <string>
#include <vector>

#include "crowdms/sandbox.hpp"

namespace crowdms {

/// Runs each bundle in a fresh harness process speaking the framed
/// request/response protocol over the child's stdin/stdout. The harness is
/// expected to enforce the per-bundle wall-time limit itself; this side kills
/// the child after wallTimeMs + graceMs and reports every test as Errored.
class SubprocessExecutor final : public ExecutorPort {
 public:
  explicit SubprocessExecutor(std::vector<std::string> command, int graceMs = 2000)
      : command_(std::move(command)), graceMs_(graceMs) {}

  TestRunReport execute(const ExecutionBundle& bundle) override;

 private:
  std::vector<std::string> command_;
  int graceMs_;
};

}  // namespace crowdms
