#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "crowdms/error.hpp"
#include "crowdms/value.hpp"

namespace crowdms {

/// Keyed JSON documents grouped by collection; list() returns insertion order.
/// This is the development store behind the five persistence calls exposed to
/// authored code. A fresh instance is seeded for every test execution.
class DocumentStore {
 public:
  struct UpdateResult {
    std::optional<Value> value;  // nullopt: no document with that id
    std::string error;
    bool ok() const { return value.has_value(); }
  };

  /// Stores or overwrites; an overwrite keeps the original list position.
  Value save(const std::string& collection, const std::string& id, Value value);
  std::optional<Value> get(const std::string& collection, const std::string& id) const;
  UpdateResult update(const std::string& collection, const std::string& id, Value value);
  bool remove(const std::string& collection, const std::string& id);
  std::vector<Value> list(const std::string& collection) const;

  /// {collection: [{"id", "value"}, ...]} in insertion order.
  Value snapshot() const;
  std::size_t size() const;

 private:
  struct Collection {
    std::vector<std::string> order;
    std::map<std::string, Value> docs;
  };
  static void check_key(const std::string& collection, const std::string& id);
  std::map<std::string, Collection> collections_;
};

}  // namespace crowdms
