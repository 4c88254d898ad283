#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>

#include "crowdms/engine.hpp"
#include "crowdms/fixtures.hpp"

namespace crowdms::support {

inline EndpointSpec simple_endpoint(const std::string& name, std::vector<Param> params = {}) {
  EndpointSpec e;
  e.functionName = name;
  e.description = "Does " + name + ".";
  e.signature.params = std::move(params);
  e.signature.returnType = TypeRef::parse("string");
  return e;
}

inline ClientRequest small_request(int endpoints = 1) {
  ClientRequest r;
  r.projectName = "small";
  r.projectDescription = "A small service.";
  for (int i = 1; i <= endpoints; ++i)
    r.endpoints.push_back(simple_endpoint("fn" + std::to_string(i), {{"x", TypeRef::parse("string")}}));
  return r;
}

inline SubmissionPayload contribution(const std::string& code) {
  SubmissionPayload p;
  p.kind = PayloadKind::BehaviorContribution;
  p.code = code;
  return p;
}

inline SubmissionPayload mark_complete() {
  SubmissionPayload p;
  p.kind = PayloadKind::MarkComplete;
  return p;
}

inline SubmissionPayload issue_report(const std::string& text) {
  SubmissionPayload p;
  p.kind = PayloadKind::IssueReport;
  p.issueText = text;
  return p;
}

/// Fetches for `worker` and submits `payload`; returns the submission id.
inline SubmissionId fetch_and_submit(Project& p, const WorkerId& worker, const SubmissionPayload& payload,
                                     Timestamp now) {
  auto view = p.fetch(worker, now);
  if (!view) throw std::runtime_error("nothing to fetch for " + worker);
  return p.submit({view->assignmentId, worker, payload, {}, {}}, now + 60);
}

inline void fetch_and_review(Project& p, const WorkerId& worker, int stars, const std::string& feedback,
                             Timestamp now) {
  auto view = p.fetch(worker, now);
  if (!view) throw std::runtime_error("nothing to review for " + worker);
  p.review({view->assignmentId, worker, stars, feedback, {}}, now + 60);
}

inline std::size_t count(const std::vector<ProjectEvent>& events, EventType type) {
  std::size_t n = 0;
  for (const auto& e : events)
    if (e.type == type) ++n;
  return n;
}

/// Random structured values for property tests.
class ValueGen {
 public:
  explicit ValueGen(std::uint64_t seed) : rng_(seed) {}

  Value value(int depth = 3) {
    const int pick = static_cast<int>(rng_() % (depth > 0 ? 7 : 5));
    switch (pick) {
      case 0: return Value();
      case 1: return Value(rng_() % 2 == 0);
      case 2: return Value(static_cast<std::int64_t>(rng_() % 2001) - 1000);
      case 3: return Value(static_cast<double>(static_cast<std::int64_t>(rng_() % 200001) - 100000) / 64.0);
      case 4: return Value(text());
      case 5: {
        Value a = Value::array();
        const int n = static_cast<int>(rng_() % 4);
        for (int i = 0; i < n; ++i) a.push_back(value(depth - 1));
        return a;
      }
      default: {
        Value o = Value::object();
        const int n = static_cast<int>(rng_() % 4);
        for (int i = 0; i < n; ++i) o[text()] = value(depth - 1);
        return o;
      }
    }
  }

  std::string text() {
    static const char* const pieces[] = {"a", "b", "c", "x", "y", "z", "_", "\"", "\\", "\n", " ", "\xC3\xA9"};
    std::string s;
    const int n = static_cast<int>(rng_() % 6);
    for (int i = 0; i < n; ++i) s += pieces[rng_() % std::size(pieces)];
    return s;
  }

  std::uint64_t next() { return rng_(); }
  std::size_t below(std::size_t n) { return static_cast<std::size_t>(rng_() % n); }

 private:
  std::mt19937_64 rng_;
};

class TempDir {
 public:
  explicit TempDir(const std::string& name) {
    path_ = std::filesystem::temp_directory_path() /
            (name + "-" + std::to_string(std::random_device{}()) + "-" + std::to_string(counter()++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }

 private:
  static int& counter() {
    static int c = 0;
    return c;
  }
  std::filesystem::path path_;
};

}  // namespace crowdms::support
