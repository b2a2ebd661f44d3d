#include <csignal>
#include <cstdio>
#include <filesystem>
#include <iostream>

#include <CLI11.hpp>

#include "doorway/fixtures/reference.hpp"
#include "doorway/runtime/headless.hpp"
#include "doorway/service/service.hpp"

namespace {

using namespace doorway;

constexpr int kExitInputError = 2;

RuntimeService* g_service = nullptr;

void onSignal(int) {
  if (g_service) g_service->stop();
}

int runServe(const RuntimeConfig& config, double realtimeFactor) {
  std::unique_ptr<EventLog> events;
  if (config.eventLogPath) events = std::make_unique<EventLog>(*config.eventLogPath);
  ServiceOptions options;
  options.port = static_cast<unsigned short>(*config.servePort);
  options.realtimeFactor = realtimeFactor;
  RuntimeService service(makeRuntime(config), options, events.get());
  g_service = &service;
  std::signal(SIGINT, onSignal);
  std::signal(SIGTERM, onSignal);
  std::cout << "serving on ws://127.0.0.1:" << service.port() << std::endl;
  service.run();
  g_service = nullptr;
  if (events) events->flush();
  const Runtime& rt = service.runtime();
  if (!config.metricsPath.empty()) rt.metrics().writeCsv(config.metricsPath);
  return rt.status() == RunStatus::Succeeded ? 0 : 1;
}

int runCommand(RuntimeConfig config, const std::string& mode, bool serve, std::optional<double> realtimeFactor) {
  if (mode == "manual") {
    if (!serve) {
      std::cerr << "error: --mode manual needs --serve, nobody else can step the behavior\n";
      return kExitInputError;
    }
    config.mode = ExecutionMode::ManualStep;
  }
  if (serve) return runServe(config, realtimeFactor.value_or(1.0));
  config.servePort.reset();
  config.realtimeFactor = realtimeFactor.value_or(0.0);

  const HeadlessResult r = runHeadless(config);
  const auto status = nlohmann::json(r.status).get<std::string>();
  std::printf("%s after %.2f s sim time (%.2f s wall)\n", status.c_str(), r.simTimeS, r.wallTimeS);
  if (r.exitCode != 0) std::fprintf(stderr, "failure: %s\n", r.failureReason.c_str());
  return r.exitCode;
}

int writeFixtures(const std::filesystem::path& out) {
  std::filesystem::create_directories(out);
  for (const auto& v : referenceVariants()) {
    saveTreeFile(buildReferenceBehavior(v), out / (v.name + ".behavior.json"));
    saveScenarioFile(buildReferenceScenario(v), out / (v.name + ".scenario.json"));
  }
  // Handle below the crossing arm's workspace; pairs with right-pull-lever.behavior.json.
  ScenarioConfig low = buildReferenceScenario(referenceVariant("right-pull-lever"));
  low.name = "unreachable-handle";
  low.door.handleHeightM = 0.40;
  saveScenarioFile(low, out / "unreachable-handle.scenario.json");
  std::cout << "wrote fixtures to " << out.string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Door traversal behavior runtime"};
  app.require_subcommand(1);

  RuntimeConfig config;
  std::string mode = "auto";
  bool serve = false;
  int port = 8765;
  std::optional<double> realtimeFactor;
  std::optional<double> tickRate;
  std::string events;

  auto* run = app.add_subcommand("run", "Run a behavior against a scenario");
  run->add_option("--behavior", config.behaviorPath, "Behavior tree JSON")->required();
  run->add_option("--scenario", config.scenarioPath, "Scenario JSON")->required();
  run->add_option("--mode", mode, "auto or manual")->check(CLI::IsMember({"auto", "manual"}));
  run->add_option("--seed", config.seed, "Seed for sensor noise and plane fitting");
  run->add_option("--metrics", config.metricsPath, "Metrics CSV output");
  run->add_option("--events", events, "JSONL event log output");
  run->add_option("--tick-rate", tickRate, "Override the scenario tick rate (Hz)")->check(CLI::PositiveNumber);
  run->add_flag("--serve", serve, "Serve the operator WebSocket protocol");
  run->add_option("--port", port, "Port for --serve")->check(CLI::Range(0, 65535));
  run->add_option("--realtime-factor", realtimeFactor, "Sim seconds per wall second, 0 = unlimited")
      ->check(CLI::NonNegativeNumber);

  std::filesystem::path fixturesOut = "fixtures";
  auto* fixtures = app.add_subcommand("fixtures", "Write the reference behaviors and scenarios");
  fixtures->add_option("--out", fixturesOut, "Output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*fixtures) return writeFixtures(fixturesOut);
    if (!events.empty()) config.eventLogPath = events;
    config.tickRateHz = tickRate;
    if (serve) config.servePort = port;
    return runCommand(config, mode, serve, realtimeFactor);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInputError;
  }
}
