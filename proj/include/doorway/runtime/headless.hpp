#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "doorway/runtime/runtime.hpp"

namespace doorway {

struct RuntimeConfig {
  std::filesystem::path behaviorPath;
  std::filesystem::path scenarioPath;
  ExecutionMode mode = ExecutionMode::Autonomous;
  std::optional<double> tickRateHz;  ///< overrides the scenario
  std::optional<int> servePort;
  std::filesystem::path metricsPath;
  std::optional<std::filesystem::path> eventLogPath;
  std::uint64_t seed = 0;
  /// Sim seconds per wall second; 0 runs as fast as possible.
  double realtimeFactor = 0.0;
};

struct HeadlessResult {
  RunStatus status = RunStatus::Running;
  double simTimeS = 0.0;
  double wallTimeS = 0.0;
  std::string failureReason;
  int exitCode = 0;
};

/// Loads both files, builds a runtime and applies the config's overrides.
/// Throws ParseError naming the offending file.
std::unique_ptr<Runtime> makeRuntime(const RuntimeConfig& config);

/// Runs to success, failure or timeout and writes the metrics and event log.
/// Exit code 0 only on behavior success.
HeadlessResult runHeadless(const RuntimeConfig& config);

}  // namespace doorway
