#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "doorway/model/tree_executor.hpp"
#include "doorway/perception/pipeline.hpp"
#include "doorway/runtime/actions.hpp"
#include "doorway/sim/sensor_sim.hpp"
#include "doorway/sim/world.hpp"
#include "doorway/telemetry/telemetry.hpp"

namespace doorway {

/// Copy of the detected mechanism frame frozen when the robot leaves the
/// approach phase; door behaviors author their targets in it.
inline constexpr const char* kApproachMechanismFrame = "mechanismAtApproach";

struct RuntimeOptions {
  ExecutionMode mode = ExecutionMode::Autonomous;
  std::uint64_t seed = 0;
  ExitTolerance tolerance;
  PerceptionOptions perception;
  RenderOptions render;
};

enum class RunStatus { Running, Succeeded, Failed, TimedOut };
NLOHMANN_JSON_SERIALIZE_ENUM(RunStatus, {{RunStatus::Running, "Running"},
                                         {RunStatus::Succeeded, "Succeeded"},
                                         {RunStatus::Failed, "Failed"},
                                         {RunStatus::TimedOut, "TimedOut"}})

/// Owns the tree, the sim world and perception; advances them one tick at a
/// time. Not thread-safe: the tick thread is the only caller.
class Runtime : public WorldView {
 public:
  Runtime(BehaviorNode tree, ScenarioConfig scenario, RuntimeOptions options = {});

  /// One tick: exit checks, perception, dispatch, world step, telemetry.
  void tick();
  /// Ticks until the behavior finishes or the scenario timeout passes.
  RunStatus runToCompletion();

  RunStatus status() const { return status_; }
  std::string failureReason() const { return tree_->coordinator().failureReason; }

  // Operator commands, applied between ticks.
  /// Manual modes: starts the next action (or the ready layer when concurrent). Returns the ids started.
  std::vector<NodeId> executeNextAction();
  void setMode(ExecutionMode mode);
  void abort();
  /// Edits the tree in place; throws and leaves the tree unchanged when the result is invalid.
  void editTree(const std::function<void(BehaviorNode&)>& change);
  void replaceTree(BehaviorNode tree);
  /// Sampled world poses the action would follow if it started now.
  std::vector<TimedPose> previewAction(NodeId id) const;

  // WorldView
  std::vector<MechanismDetection> detections() const override { return perception_.detections(); }
  ConditionReport evaluateEntry(const BehaviorNode& action) const override;

  const SimWorld& world() const { return world_; }
  const TreeExecutor& tree() const { return *tree_; }
  const RunMetrics& metrics() const { return metrics_; }
  const std::vector<TrackingSample>& tracking() const { return tracking_; }
  std::vector<LogRecord> drainLogs();
  std::int64_t collisionTicks() const { return collisionTicks_; }
  std::uint64_t treeRevision() const { return treeRevision_; }

 private:
  struct Active {
    NodeId id;
    std::int64_t startTick;
    std::unique_ptr<ActionExecutor> executor;
  };

  void log(LogLevel level, std::optional<NodeId> node, std::string message);
  void startRequests(const std::vector<ExecutionRequest>& requests);
  void pollActive();
  void runPerception();
  void recordEvents();
  std::string nodeLabel(NodeId id) const;
  void updateStatus();

  ScenarioConfig scenario_;
  RuntimeOptions options_;
  SimWorld world_;
  std::unique_ptr<TreeExecutor> tree_;
  SyntheticSensor sensor_;
  PerceptionPipeline perception_;
  mutable std::map<std::int64_t, PreparedAction> prepared_;
  std::vector<Active> active_;
  RunMetrics metrics_;
  std::vector<TrackingSample> tracking_;
  std::vector<LogRecord> logs_;
  RunStatus status_ = RunStatus::Running;
  bool inCollision_ = false;
  std::int64_t collisionTicks_ = 0;
  std::uint64_t treeRevision_ = 0;
  int sensorPeriod_ = 4;
};

}  // namespace doorway
