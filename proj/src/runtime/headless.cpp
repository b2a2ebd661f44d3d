#include "doorway/runtime/headless.hpp"

#include <chrono>
#include <memory>
#include <thread>

namespace doorway {

std::unique_ptr<Runtime> makeRuntime(const RuntimeConfig& config) {
  BehaviorNode tree = loadTreeFile(config.behaviorPath);
  ScenarioConfig scenario = loadScenarioFile(config.scenarioPath);
  if (config.tickRateHz) {
    if (!(*config.tickRateHz > 0.0)) throw ParseError("tick rate must be positive");
    scenario.tickRateHz = *config.tickRateHz;
  }
  RuntimeOptions options;
  options.mode = config.mode;
  options.seed = config.seed;
  return std::make_unique<Runtime>(std::move(tree), std::move(scenario), options);
}

HeadlessResult runHeadless(const RuntimeConfig& config) {
  auto runtime = makeRuntime(config);
  Runtime& rt = *runtime;
  std::unique_ptr<EventLog> events;
  if (config.eventLogPath) events = std::make_unique<EventLog>(*config.eventLogPath);

  const auto wallStart = std::chrono::steady_clock::now();
  const double timeout = rt.world().scenario().timeoutS;
  while (rt.status() == RunStatus::Running) {
    if (rt.world().time() >= timeout - 1e-9) {
      rt.runToCompletion();  // records the timeout
      break;
    }
    rt.tick();
    if (events)
      for (auto& r : rt.drainLogs()) events->append(std::move(r));
    else
      rt.drainLogs();
    if (config.realtimeFactor > 0.0) {
      const auto due = wallStart + std::chrono::duration<double>(rt.world().time() / config.realtimeFactor);
      std::this_thread::sleep_until(due);
    }
  }
  if (events) {
    for (auto& r : rt.drainLogs()) events->append(std::move(r));
    events->flush();
  }

  HeadlessResult result;
  result.status = rt.status();
  result.simTimeS = rt.world().time();
  result.wallTimeS = std::chrono::duration<double>(std::chrono::steady_clock::now() - wallStart).count();
  result.failureReason = rt.failureReason();
  result.exitCode = result.status == RunStatus::Succeeded ? 0 : 1;
  if (!config.metricsPath.empty()) rt.metrics().writeCsv(config.metricsPath);
  return result;
}

}  // namespace doorway
