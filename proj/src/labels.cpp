#include "crowdms/labels.hpp"

#include <sstream>

namespace crowdms::labels {
namespace {

template <typename Fn>
void for_each_tagged_line(std::string_view source, std::string_view tag, Fn&& fn) {
  std::size_t pos = 0;
  while ((pos = source.find(tag, pos)) != std::string_view::npos) {
    pos += tag.size();
    auto end = source.find('\n', pos);
    if (end == std::string_view::npos) end = source.size();
    std::istringstream words{std::string(source.substr(pos, end - pos))};
    fn(words);
    pos = end;
  }
}

}  // namespace

std::set<std::string> behaviors(std::string_view source) {
  std::set<std::string> out;
  for_each_tagged_line(source, "@behavior ", [&](std::istringstream& w) {
    std::string id;
    if (w >> id) out.insert(id);
  });
  return out;
}

std::set<std::string> defective(std::string_view source) {
  std::set<std::string> out;
  for_each_tagged_line(source, "@defect ", [&](std::istringstream& w) {
    std::string word;
    bool affects = false;
    while (w >> word) {
      if (affects)
        out.insert(word);
      else if (word == "affects")
        affects = true;
    }
  });
  return out;
}

std::optional<std::string> checked_behavior(std::string_view testSource) {
  std::optional<std::string> out;
  for_each_tagged_line(testSource, "@checks ", [&](std::istringstream& w) {
    std::string id;
    if (!out && (w >> id)) out = id;
  });
  return out;
}

bool behavior_passes(std::string_view source, const std::string& behaviorId) {
  return behaviors(source).count(behaviorId) && !defective(source).count(behaviorId);
}

}  // namespace crowdms::labels
