#include "crowdms/document_store.hpp"

#include <algorithm>

namespace crowdms {

void DocumentStore::check_key(const std::string& collection, const std::string& id) {
  if (collection.empty() || id.empty())
    throw WorkflowError(ErrorCode::Validation, "collection and id must be nonempty strings");
}

Value DocumentStore::save(const std::string& collection, const std::string& id, Value value) {
  check_key(collection, id);
  canonicalize(value);  // rejects non-finite numbers
  auto& c = collections_[collection];
  auto [it, inserted] = c.docs.insert_or_assign(id, std::move(value));
  if (inserted) c.order.push_back(id);
  return it->second;
}

std::optional<Value> DocumentStore::get(const std::string& collection, const std::string& id) const {
  check_key(collection, id);
  auto c = collections_.find(collection);
  if (c == collections_.end()) return std::nullopt;
  auto d = c->second.docs.find(id);
  if (d == c->second.docs.end()) return std::nullopt;
  return d->second;
}

DocumentStore::UpdateResult DocumentStore::update(const std::string& collection, const std::string& id, Value value) {
  check_key(collection, id);
  canonicalize(value);
  auto c = collections_.find(collection);
  if (c == collections_.end() || !c->second.docs.count(id))
    return {std::nullopt, "no document '" + id + "' in collection '" + collection + "'"};
  c->second.docs[id] = value;
  return {std::move(value), {}};
}

bool DocumentStore::remove(const std::string& collection, const std::string& id) {
  check_key(collection, id);
  auto c = collections_.find(collection);
  if (c == collections_.end() || c->second.docs.erase(id) == 0) return false;
  auto& order = c->second.order;
  order.erase(std::find(order.begin(), order.end(), id));
  return true;
}

std::vector<Value> DocumentStore::list(const std::string& collection) const {
  std::vector<Value> out;
  auto c = collections_.find(collection);
  if (c == collections_.end()) return out;
  for (const auto& id : c->second.order) out.push_back(c->second.docs.at(id));
  return out;
}

Value DocumentStore::snapshot() const {
  Value out = Value::object();
  for (const auto& [name, c] : collections_) {
    Value docs = Value::array();
    for (const auto& id : c.order) docs.push_back({{"id", id}, {"value", c.docs.at(id)}});
    out[name] = std::move(docs);
  }
  return out;
}

std::size_t DocumentStore::size() const {
  std::size_t n = 0;
  for (const auto& [name, c] : collections_) n += c.order.size();
  return n;
}

}  // namespace crowdms
