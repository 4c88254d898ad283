#include "crowdms/assembler.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

namespace crowdms {
namespace {

std::string js_string(const std::string& s) { return Value(s).dump(); }

std::string param_list(const Signature& sig) {
  std::string out;
  for (std::size_t i = 0; i < sig.params.size(); ++i) {
    if (i) out += ", ";
    out += sig.params[i].name;
  }
  return out;
}

std::string comment_block(const std::string& text) {
  std::string out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) out += "// " + line + "\n";
  return out;
}

const char* kValidateJs = R"JS(
function validateValue(value, type, path, out) {
  let depth = 0;
  let base = type;
  while (base.endsWith('[]')) {
    base = base.slice(0, -2);
    depth += 1;
  }
  if (depth > 0) {
    if (!Array.isArray(value)) {
      out.push(path + ': expected ' + type);
      return;
    }
    const inner = base + '[]'.repeat(depth - 1);
    value.forEach((v, i) => validateValue(v, inner, path + '[' + i + ']', out));
    return;
  }
  if (base === 'string' || base === 'number' || base === 'boolean') {
    if (typeof value !== base) out.push(path + ': expected ' + base);
    return;
  }
  const fields = ADTS[base];
  if (value === null || typeof value !== 'object' || Array.isArray(value)) {
    out.push(path + ': expected ' + base + ' object');
    return;
  }
  for (const f of fields) {
    if (!(f.name in value)) out.push(path + ': missing field ' + f.name);
    else validateValue(value[f.name], f.type, path + '.' + f.name, out);
  }
  for (const key of Object.keys(value)) {
    if (!fields.some((f) => f.name === key)) out.push(path + ': unexpected field ' + key);
  }
}

function checkParam(body, name, type, out) {
  if (!(name in body)) {
    out.push('missing field ' + name);
    return;
  }
  validateValue(body[name], type, name, out);
}

module.exports = { ADTS, validateValue, checkParam };
)JS";

const char* kAdapterJs = R"JS('use strict';
// Binds the five persistence calls used by crowd-authored code to a backend.
// PERSISTENCE_BACKEND=memory (default) keeps documents in process;
// PERSISTENCE_BACKEND=rest forwards to a document service at PERSISTENCE_URL
// laid out as <url>/<collection>/<id>.json.

const backend = process.env.PERSISTENCE_BACKEND || 'memory';
const baseUrl = process.env.PERSISTENCE_URL || '';

function memoryStore() {
  const collections = new Map();
  const coll = (name) => {
    if (!collections.has(name)) collections.set(name, new Map());
    return collections.get(name);
  };
  return {
    save: (c, id, value) => { coll(c).set(id, value); return value; },
    get: (c, id) => coll(c).get(id),
    update: (c, id, value) => {
      if (!coll(c).has(id)) throw new Error("no document '" + id + "' in collection '" + c + "'");
      coll(c).set(id, value);
      return value;
    },
    remove: (c, id) => coll(c).delete(id),
    list: (c) => Array.from(coll(c).values()),
  };
}

function restStore() {
  const url = (c, id) => baseUrl + '/' + encodeURIComponent(c) + (id === undefined ? '' : '/' + encodeURIComponent(id)) + '.json';
  const call = async (method, target, body) => {
    const res = await fetch(target, { method, headers: { 'content-type': 'application/json' }, body: body === undefined ? undefined : JSON.stringify(body) });
    if (!res.ok) throw new Error(method + ' ' + target + ' failed with ' + res.status);
    return res.json();
  };
  return {
    save: async (c, id, value) => { await call('PUT', url(c, id), value); return value; },
    get: async (c, id) => (await call('GET', url(c, id))) ?? undefined,
    update: async (c, id, value) => {
      const existing = await call('GET', url(c, id));
      if (existing === null) throw new Error("no document '" + id + "' in collection '" + c + "'");
      await call('PUT', url(c, id), value);
      return value;
    },
    remove: async (c, id) => {
      const existing = await call('GET', url(c, id));
      if (existing === null) return false;
      await call('DELETE', url(c, id));
      return true;
    },
    list: async (c) => Object.values((await call('GET', url(c))) || {}),
  };
}

const store = backend === 'rest' ? restStore() : memoryStore();

module.exports = {
  save: store.save,
  get: store.get,
  update: store.update,
  remove: store.remove,
  list: store.list,
};
)JS";

std::string sha256_hex(const std::string& data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr);
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 0xf];
  }
  return out;
}

}  // namespace

GeneratedHandler generate_handler(const EndpointSpec& endpoint, const AssemblerOptions& options) {
  GeneratedHandler h;
  h.route.method = options.httpMethod;
  h.route.path = "/" + endpoint.functionName;
  h.route.functionName = endpoint.functionName;
  h.route.params = endpoint.signature.params;

  std::string method = options.httpMethod;
  for (auto& c : method) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));

  std::ostringstream js;
  js << "// " << h.route.method << " " << h.route.path << "\n";
  js << "router." << method << "(" << js_string(h.route.path) << ", async (req, res) => {\n";
  js << "  const body = req.body || {};\n";
  js << "  const violations = [];\n";
  for (const auto& p : endpoint.signature.params)
    js << "  checkParam(body, " << js_string(p.name) << ", " << js_string(p.type.str()) << ", violations);\n";
  js << "  if (violations.length > 0) {\n";
  js << "    return res.status(400).json({ code: 'validation', message: 'invalid request body', violations });\n";
  js << "  }\n";
  js << "  try {\n";
  js << "    const result = await " << endpoint.functionName << "(";
  for (std::size_t i = 0; i < endpoint.signature.params.size(); ++i) {
    if (i) js << ", ";
    js << "body." << endpoint.signature.params[i].name;
  }
  js << ");\n";
  js << "    return res.status(200).json(result === undefined ? null : result);\n";
  js << "  } catch (err) {\n";
  js << "    const message = err && err.message ? err.message : String(err);\n";
  js << "    return res.status(500).json({ code: 'function-error', message, violations: [] });\n";
  js << "  }\n";
  js << "});\n";
  h.source = js.str();
  return h;
}

std::string ProjectArtifactTree::content_hash() const {
  std::string data;
  for (const auto& [path, content] : files) {
    data += path;
    data += '\0';
    data += std::to_string(content.size());
    data += '\0';
    data += content;
  }
  return sha256_hex(data);
}

Value manifest_value(const ProjectArtifactTree& tree) {
  auto it = tree.files.find("manifest.json");
  if (it == tree.files.end()) throw WorkflowError(ErrorCode::NotFound, "tree has no manifest.json");
  return parse_value(it->second);
}

ProjectArtifactTree assemble_project(const ProjectState& state, const AssemblerOptions& options) {
  if (!state.created) throw WorkflowError(ErrorCode::NotFound, "project does not exist");
  const auto status = project_status(state);
  if (!status.complete && !options.force) {
    std::vector<Violation> pending;
    for (const auto& f : status.functions)
      if (f.state != FunctionState::Completed) pending.push_back({f.name, std::string(to_string(f.state))});
    if (pending.empty()) pending.push_back({"microtasks", std::to_string(status.liveMicrotasks) + " live microtasks"});
    throw WorkflowError(ErrorCode::Incomplete, "project is not complete; pass force to assemble anyway",
                        std::move(pending));
  }
  if (options.httpMethod != "GET" && options.httpMethod != "POST")
    throw WorkflowError(ErrorCode::Validation, "http method must be GET or POST");

  ProjectArtifactTree tree;
  Value manifestFunctions = Value::array();
  Value names = Value::array();
  for (const auto& id : state.functionOrder) {
    const auto& f = state.functions.at(id);
    const std::string file = "functions/" + f.name + ".js";
    std::string body = f.code;
    if (std::all_of(body.begin(), body.end(), [](unsigned char c) { return std::isspace(c); }))
      body = "function " + f.name + "(" + param_list(f.signature) + ") {\n  throw new Error('not implemented');\n}\n";
    if (body.back() != '\n') body += '\n';
    tree.files[file] = comment_block(f.description) + body + "\nmodule.exports = " + f.name + ";\n";
    manifestFunctions.push_back({{"name", f.name},
                                 {"file", file},
                                 {"origin", f.is_endpoint() ? "ClientEndpoint" : "CrowdCreated"},
                                 {"version", f.version},
                                 {"state", to_string(f.state)}});
    names.push_back(f.name);
  }

  std::ostringstream routes;
  routes << "'use strict';\n";
  routes << "const express = require('express');\n";
  routes << "const { checkParam } = require('./validate');\n";
  for (const auto& ep : state.request.endpoints)
    routes << "const " << ep.functionName << " = require('../functions/" << ep.functionName << ".js');\n";
  routes << "\nconst router = express.Router();\n\n";
  Value manifestRoutes = Value::array();
  for (const auto& ep : state.request.endpoints) {
    auto handler = generate_handler(ep, options);
    routes << handler.source << "\n";
    tree.routeManifest.push_back(handler.route);
    Value params = Value::array();
    for (const auto& p : handler.route.params) params.push_back({{"name", p.name}, {"type", p.type.str()}});
    manifestRoutes.push_back({{"method", handler.route.method},
                              {"path", handler.route.path},
                              {"functionName", handler.route.functionName},
                              {"params", params},
                              {"returnType", ep.signature.returnType ? Value(ep.signature.returnType->str()) : Value()}});
  }
  routes << "module.exports = router;\n";
  tree.files["handlers/routes.js"] = routes.str();

  Value adts = Value::object();
  for (const auto& a : state.request.adts) {
    Value fields = Value::array();
    for (const auto& f : a.fields) fields.push_back({{"name", f.name}, {"type", f.type.str()}});
    adts[a.name] = fields;
  }
  tree.files["handlers/validate.js"] = "'use strict';\n\nconst ADTS = " + canonicalize(adts) + ";\n" + kValidateJs;
  tree.files["persistence/adapter.js"] = kAdapterJs;

  std::ostringstream main;
  main << "'use strict';\n";
  main << "const express = require('express');\n";
  main << "const persistence = require('./persistence/adapter');\n\n";
  main << "// Crowd-authored functions call each other and the persistence API as globals.\n";
  main << "Object.assign(globalThis, persistence);\n";
  main << "const functionNames = " << canonicalize(names) << ";\n";
  main << "for (const name of functionNames) {\n";
  main << "  globalThis[name] = require('./functions/' + name + '.js');\n";
  main << "}\n\n";
  main << "const app = express();\n";
  main << "app.use(express.json());\n";
  main << "app.use(require('./handlers/routes'));\n\n";
  main << "const port = process.env.PORT || 3000;\n";
  main << "app.listen(port, () => console.log('" << state.request.projectName << " listening on ' + port));\n";
  tree.files["main.js"] = main.str();

  Value package{{"name", state.request.projectName},
                {"version", "1.0.0"},
                {"private", true},
                {"main", "main.js"},
                {"scripts", {{"start", "node main.js"}}},
                {"dependencies", {{"express", "^4.18.2"}}}};
  tree.files["package.json"] = package.dump(2) + "\n";

  Value manifest{{"language", "ecmascript"},
                 {"projectName", state.request.projectName},
                 {"projectDescription", state.request.projectDescription},
                 {"functions", manifestFunctions},
                 {"routes", manifestRoutes}};
  tree.files["manifest.json"] = canonicalize(manifest) + "\n";
  return tree;
}

std::string LocalDirectoryTarget::deploy(const ProjectArtifactTree& tree) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (fs::exists(root_) && !fs::is_empty(root_) && !fs::exists(root_ / "manifest.json"))
    throw WorkflowError(ErrorCode::Io, root_.string() + " exists and does not hold a previous publication");

  fs::path staging = root_;
  staging += ".staging";
  fs::remove_all(staging, ec);
  for (const auto& [rel, content] : tree.files) {
    const fs::path file = staging / rel;
    fs::create_directories(file.parent_path(), ec);
    if (ec) throw WorkflowError(ErrorCode::Io, "cannot create " + file.parent_path().string() + ": " + ec.message());
    std::ofstream out(file, std::ios::binary | std::ios::trunc);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) {
      fs::remove_all(staging, ec);
      throw WorkflowError(ErrorCode::Io, "cannot write " + file.string());
    }
  }
  fs::remove_all(root_, ec);
  fs::rename(staging, root_, ec);
  if (ec) throw WorkflowError(ErrorCode::Io, "cannot move publication into " + root_.string() + ": " + ec.message());
  return fs::absolute(root_).lexically_normal().string();
}

PublicationRecord publish(const ProjectArtifactTree& tree, DeployTarget& target, Timestamp now) {
  PublicationRecord r;
  r.location = target.deploy(tree);
  r.contentHash = tree.content_hash();
  r.target = target.name();
  r.timestamp = now;
  return r;
}

PublicationRecord publish_project(Project& project, DeployTarget& target, const AssemblerOptions& options,
                                  Timestamp now) {
  auto tree = assemble_project(project.state(), options);
  auto record = publish(tree, target, now);
  project.commit(record_publication(project.state(), record, now));
  return record;
}

}  // namespace crowdms
