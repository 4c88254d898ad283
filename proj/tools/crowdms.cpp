#include <CLI11.hpp>
#include <httplib.h>

#include <csignal>
#include <fstream>
#include <iostream>

#include "crowdms/assembler.hpp"
#include "crowdms/event_log.hpp"
#include "crowdms/service.hpp"
#include "crowdms/simulator.hpp"

using namespace crowdms;

namespace {

Value read_value(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw WorkflowError(ErrorCode::Io, "cannot read " + path);
  try {
    return Value::parse(in);
  } catch (const Value::exception& e) {
    throw WorkflowError(ErrorCode::Validation, path + ": " + e.what());
  }
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << content;
  if (!out) throw WorkflowError(ErrorCode::Io, "cannot write " + path.string());
}

void print_violations(const std::vector<InvariantViolation>& violations) {
  for (const auto& v : violations)
    std::cerr << "violation at sequence " << v.sequence << " [" << v.invariant << "] " << v.message << "\n";
}

httplib::Server* running = nullptr;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"crowdms: crowd microservice workflow engine, simulator and service"};
  app.require_subcommand(1);

  std::string configPath, outDir;
  std::optional<std::uint64_t> seedOverride;
  auto* simulate = app.add_subcommand("simulate", "Run a seeded crowd simulation");
  simulate->add_option("--config", configPath, "Simulation config file")->required()->check(CLI::ExistingFile);
  simulate->add_option("--out", outDir, "Directory for metrics.json, events.ndjson and state.json");
  simulate->add_option("--seed", seedOverride, "Override the config seed");

  std::string logPath;
  auto* replay = app.add_subcommand("replay", "Re-fold an event log and check every invariant");
  replay->add_option("--log", logPath, "NDJSON event log")->required()->check(CLI::ExistingFile);

  std::string projectId, dataDir = "data";
  auto* dump = app.add_subcommand("dump-events", "Print a stored project's event log");
  dump->add_option("--project", projectId, "Project id")->required();
  dump->add_option("--data-dir", dataDir, "Service data directory");

  std::string host = "127.0.0.1", tokensPath;
  int port = 8080, snapshotEvery = 500;
  auto* serve = app.add_subcommand("serve", "Run the REST service");
  serve->add_option("--data-dir", dataDir, "Service data directory");
  serve->add_option("--tokens", tokensPath, "Bearer token file")->required()->check(CLI::ExistingFile);
  serve->add_option("--host", host, "Listen address");
  serve->add_option("--port", port, "Listen port");
  serve->add_option("--snapshot-every", snapshotEvery, "Events between state snapshots");

  std::string assembleOut, httpMethod = "GET";
  bool force = false;
  auto* assemble = app.add_subcommand("assemble", "Assemble a stored project into a service source tree");
  assemble->add_option("--project", projectId, "Project id")->required();
  assemble->add_option("--data-dir", dataDir, "Service data directory");
  assemble->add_option("--out", assembleOut, "Output directory")->required();
  assemble->add_option("--http-method", httpMethod, "GET or POST")->check(CLI::IsMember({"GET", "POST"}));
  assemble->add_flag("--force", force, "Assemble even if functions are unfinished");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*simulate) {
      SimulationConfig config = read_value(configPath).get<SimulationConfig>();
      if (seedOverride) config.seed = *seedOverride;
      const auto result = run_simulation(config);
      Value metrics;
      to_json(metrics, result.metrics);
      if (!outDir.empty()) {
        std::filesystem::create_directories(outDir);
        write_file(std::filesystem::path(outDir) / "metrics.json", canonicalize(metrics) + "\n");
        save_log(std::filesystem::path(outDir) / "events.ndjson", result.events);
        Value state;
        to_json(state, result.state);
        write_file(std::filesystem::path(outDir) / "state.json", canonicalize(state) + "\n");
      }
      std::cout << canonicalize(metrics) << "\n";
      print_violations(result.metrics.invariantViolations);
      return result.metrics.invariantViolations.empty() ? 0 : 1;
    }
    if (*replay) {
      const auto report = replay_log(logPath);
      const auto status = project_status(report.state);
      Value out{{"events", report.events},
                {"reviewsGenerated", report.counts.reviewsGenerated},
                {"nonIssueIfbSubmissions", report.counts.nonIssueIfbSubmissions},
                {"maxConcurrentAssignments", report.counts.maxConcurrentAssignments},
                {"complete", status.complete},
                {"violations", report.violations.size()}};
      std::cout << canonicalize(out) << "\n";
      print_violations(report.violations);
      return report.violations.empty() ? 0 : 1;
    }
    if (*dump) {
      EventStore store(dataDir);
      write_events(std::cout, store.events(projectId));
      return 0;
    }
    if (*assemble) {
      EventStore store(dataDir);
      auto project = store.load(projectId);
      AssemblerOptions options;
      options.force = force;
      options.httpMethod = httpMethod;
      const auto tree = assemble_project(project.state(), options);
      LocalDirectoryTarget target(assembleOut);
      const auto record = publish(tree, target, project.state().clock);
      std::cout << record.location << " " << record.contentHash << "\n";
      return 0;
    }
    if (*serve) {
      ServiceConfig config;
      config.dataDir = dataDir;
      config.snapshotEvery = snapshotEvery;
      config.authenticator = std::make_shared<StaticTokenAuthenticator>(StaticTokenAuthenticator::from_file(tokensPath));
      Service service(std::move(config));
      httplib::Server server;
      service.mount(server);
      running = &server;
      std::signal(SIGINT, [](int) { running->stop(); });
      std::signal(SIGTERM, [](int) { running->stop(); });
      std::cerr << "listening on " << host << ":" << port << "\n";
      if (!server.listen(host, port)) {
        std::cerr << "error: cannot listen on " << host << ":" << port << "\n";
        return 2;
      }
      return 0;
    }
  } catch (const WorkflowError& e) {
    std::cerr << "error (" << to_string(e.code()) << "): " << e.what() << "\n";
    for (const auto& v : e.violations()) std::cerr << "  " << v.path << ": " << v.message << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
