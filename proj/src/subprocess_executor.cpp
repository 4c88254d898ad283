#include "crowdms/subprocess_executor.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>
#include <sstream>

namespace crowdms {
namespace {

class Fd {
 public:
  explicit Fd(int fd = -1) : fd_(fd) {}
  Fd(const Fd&) = delete;
  Fd& operator=(const Fd&) = delete;
  ~Fd() { reset(); }
  int get() const { return fd_; }
  void reset() {
    if (fd_ >= 0) ::close(fd_);
    fd_ = -1;
  }

 private:
  int fd_;
};

TestRunReport all_errored(const ExecutionBundle& bundle, const std::string& message) {
  TestRunReport r;
  r.bundleId = bundle.bundleId;
  for (const auto& t : bundle.tests) r.perTest.push_back({t.id, TestStatus::Errored, message, {}, {}, {}});
  return r;
}

/// Complete framed record available in `buf`?
bool record_complete(const std::string& buf) {
  auto nl = buf.find('\n');
  if (nl == std::string::npos) return false;
  try {
    return buf.size() - nl - 1 >= std::stoull(buf.substr(0, nl));
  } catch (...) {
    return true;  // let the parser report it
  }
}

}  // namespace

TestRunReport SubprocessExecutor::execute(const ExecutionBundle& bundle) {
  if (command_.empty()) return all_errored(bundle, "no harness command configured");

  int in[2], out[2];
  if (::pipe2(in, O_CLOEXEC) != 0) return all_errored(bundle, std::string("pipe: ") + std::strerror(errno));
  Fd childStdin(in[0]), toChild(in[1]);
  if (::pipe2(out, O_CLOEXEC) != 0) return all_errored(bundle, std::string("pipe: ") + std::strerror(errno));
  Fd fromChild(out[0]), childStdout(out[1]);

  std::vector<char*> argv;
  for (auto& a : command_) argv.push_back(const_cast<char*>(a.c_str()));
  argv.push_back(nullptr);

  const pid_t pid = ::fork();
  if (pid < 0) return all_errored(bundle, std::string("fork: ") + std::strerror(errno));
  if (pid == 0) {
    ::dup2(childStdin.get(), STDIN_FILENO);
    ::dup2(childStdout.get(), STDOUT_FILENO);
    ::execvp(argv[0], argv.data());
    ::_exit(127);
  }
  childStdin.reset();
  childStdout.reset();

  const std::string request = frame_record(canonicalize(Value(bundle)));
  ::signal(SIGPIPE, SIG_IGN);
  std::size_t written = 0;
  while (written < request.size()) {
    auto n = ::write(toChild.get(), request.data() + written, request.size() - written);
    if (n < 0) {
      if (errno == EINTR) continue;
      break;
    }
    written += static_cast<std::size_t>(n);
  }
  toChild.reset();

  const auto deadline = std::chrono::steady_clock::now() +
                        std::chrono::milliseconds(bundle.limits.wallTimeMs + graceMs_);
  std::string buf;
  bool timedOut = false;
  char chunk[65536];
  while (!record_complete(buf)) {
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
    if (left.count() <= 0) {
      timedOut = true;
      break;
    }
    pollfd pfd{fromChild.get(), POLLIN, 0};
    int rc = ::poll(&pfd, 1, static_cast<int>(left.count()));
    if (rc < 0 && errno == EINTR) continue;
    if (rc == 0) {
      timedOut = true;
      break;
    }
    auto n = ::read(fromChild.get(), chunk, sizeof(chunk));
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) break;
    buf.append(chunk, static_cast<std::size_t>(n));
    if (buf.size() > bundle.limits.outputBytes + 64) break;
  }

  if (timedOut) ::kill(pid, SIGKILL);
  int status = 0;
  while (::waitpid(pid, &status, 0) < 0 && errno == EINTR) {
  }
  if (timedOut) return all_errored(bundle, "timeout: harness exceeded " + std::to_string(bundle.limits.wallTimeMs) + " ms");

  try {
    std::istringstream is(buf);
    auto payload = read_record(is, bundle.limits.outputBytes);
    if (!payload) {
      const int code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
      return all_errored(bundle, "harness exited with status " + std::to_string(code) + " without a response");
    }
    return parse_value(*payload).get<TestRunReport>();
  } catch (const std::exception& e) {
    return all_errored(bundle, std::string("protocol error: ") + e.what());
  }
}

}  // namespace crowdms
