#pragma once

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "doorway/engine/execution_queue.hpp"
#include "doorway/model/behavior_tree.hpp"
#include "doorway/perception/detection.hpp"

namespace doorway {

struct ExecutionRequest {
  std::int64_t tick = 0;
  NodeId actionId{};
  NodeKind kind = NodeKind::WaitAction;
  friend bool operator==(const ExecutionRequest&, const ExecutionRequest&) = default;
};
void to_json(nlohmann::json& j, const ExecutionRequest& r);

/// Read-only view of the world the tree decides against.
class WorldView {
 public:
  virtual ~WorldView() = default;
  virtual std::vector<MechanismDetection> detections() const = 0;
  /// Entry condition of an action about to start.
  virtual ConditionReport evaluateEntry(const BehaviorNode& action) const = 0;
};

/// Returns the door subtree matching the first stable detection, or none.
std::optional<NodeId> selectDoorSubtree(const BehaviorNode& coordinator,
                                        const std::vector<MechanismDetection>& detections);

struct CoordinatorState {
  Phase phase = Phase::Approach;
  std::optional<NodeId> selectedSubtree;
  std::optional<MechanismType> selectedDoorType;
  std::array<int, 3> retryCount{};  ///< per phase, Approach..WalkThrough
  int maxRetries = 2;
  std::vector<NodeId> triedSubtrees;
  bool failed = false;
  std::string failureReason;
};

enum class CoordinatorEventKind { SubtreeSelected, PhaseEntered, Retry, StrategySwitch, BehaviorFailed, BehaviorSucceeded };
NLOHMANN_JSON_SERIALIZE_ENUM(CoordinatorEventKind, {{CoordinatorEventKind::SubtreeSelected, "subtreeSelected"},
                                                    {CoordinatorEventKind::PhaseEntered, "phaseEntered"},
                                                    {CoordinatorEventKind::Retry, "retry"},
                                                    {CoordinatorEventKind::StrategySwitch, "strategySwitch"},
                                                    {CoordinatorEventKind::BehaviorFailed, "behaviorFailed"},
                                                    {CoordinatorEventKind::BehaviorSucceeded, "behaviorSucceeded"}})

struct CoordinatorEvent {
  std::int64_t tick = 0;
  CoordinatorEventKind kind = CoordinatorEventKind::PhaseEntered;
  NodeId nodeId{};
  Phase phase = Phase::Approach;
  std::string detail;
};

struct TickResult {
  std::vector<ExecutionRequest> requests;
  std::size_t nodesVisited = 0;
};

/// Owns a behavior tree and its execution queue. Each tick updates every node
/// once, root first; the coordinator selects a door subtree, handles retries
/// and strategy changes, and dispatches actions.
class TreeExecutor {
 public:
  explicit TreeExecutor(BehaviorNode root, ExecutionMode mode = ExecutionMode::Autonomous);

  TickResult tick(std::int64_t tick, const WorldView& world);

  /// Operator step under the current manual mode.
  std::vector<ExecutionRequest> step(std::int64_t tick, const WorldView& world);

  /// Reports the outcome of an executing action.
  void completeAction(NodeId id, bool success, std::int64_t tick, std::string detail = {});
  void setNominalDuration(NodeId id, double seconds);

  void setMode(ExecutionMode mode);
  ExecutionMode mode() const { return mode_; }
  void abort(std::int64_t tick);

  /// Applies an edit to a copy of the tree; on success swaps it in and
  /// carries execution state over by node id.
  void edit(const std::function<void(BehaviorNode&)>& change);

  const BehaviorNode& root() const { return root_; }
  const ExecutionQueue& queue() const { return queue_; }
  const CoordinatorState& coordinator() const { return state_; }
  bool hasCoordinator() const { return root_.kind == NodeKind::DoorTraversalCoordinator; }

  std::optional<Phase> phaseOf(NodeId action) const;
  /// Sequence whose retryFromId governs the given action, if any.
  const BehaviorNode* phaseSequenceOf(NodeId action) const;

  bool succeeded() const;
  bool failed() const { return state_.failed; }
  bool finished() const { return succeeded() || failed(); }

  std::vector<ExecutionEvent> drainExecutionEvents();
  std::vector<CoordinatorEvent> drainCoordinatorEvents();

 private:
  void buildQueue(const BehaviorNode& scope, const std::vector<ActionSlot>& carryOver = {});
  void selectSubtree(NodeId id, std::int64_t tick, CoordinatorEventKind reason);
  void handleFailure(std::int64_t tick);
  std::vector<ExecutionRequest> dispatch(std::int64_t tick, const WorldView& world, bool operatorStep);
  void updatePhase(std::int64_t tick);
  std::size_t visit(BehaviorNode& node);
  const BehaviorNode* activeScope() const;

  BehaviorNode root_;
  ExecutionQueue queue_;
  ExecutionMode mode_;
  CoordinatorState state_;
  bool succeededReported_ = false;
  std::vector<CoordinatorEvent> events_;
  std::vector<ExecutionEvent> carriedEvents_;
};

}  // namespace doorway
