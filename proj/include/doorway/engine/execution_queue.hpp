#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace doorway {

enum class NodeId : std::int64_t {};
constexpr std::int64_t toInt(NodeId id) { return static_cast<std::int64_t>(id); }

enum class ActionStatus { Pending, Executing, Succeeded, Failed };
enum class ExecutionMode { ManualStep, ManualStepConcurrent, Autonomous };
enum class ExitResult { Success, Failure, NotYetEvaluated };

NLOHMANN_JSON_SERIALIZE_ENUM(ActionStatus, {{ActionStatus::Pending, "Pending"},
                                            {ActionStatus::Executing, "Executing"},
                                            {ActionStatus::Succeeded, "Succeeded"},
                                            {ActionStatus::Failed, "Failed"}})
NLOHMANN_JSON_SERIALIZE_ENUM(ExecutionMode, {{ExecutionMode::ManualStep, "ManualStep"},
                                             {ExecutionMode::ManualStepConcurrent, "ManualStepConcurrent"},
                                             {ExecutionMode::Autonomous, "Autonomous"}})
NLOHMANN_JSON_SERIALIZE_ENUM(ExitResult, {{ExitResult::Success, "Success"},
                                          {ExitResult::Failure, "Failure"},
                                          {ExitResult::NotYetEvaluated, "NotYetEvaluated"}})

constexpr bool isComplete(ActionStatus s) { return s == ActionStatus::Succeeded || s == ActionStatus::Failed; }

struct ActionSlot {
  NodeId id{};
  std::optional<std::size_t> executeAfter;  ///< index of the dependency in the queue
  ActionStatus status = ActionStatus::Pending;
  std::int64_t startTick = -1;
  std::int64_t endTick = -1;
  double nominalDuration = 0.0;
};

struct ConditionReport {
  NodeId actionId{};
  bool entryPassed = true;
  ExitResult exitResult = ExitResult::NotYetEvaluated;
  std::string detail;
};

enum class EventKind { Start, Stop, Fail };
NLOHMANN_JSON_SERIALIZE_ENUM(EventKind, {{EventKind::Start, "start"}, {EventKind::Stop, "stop"}, {EventKind::Fail, "fail"}})

struct ExecutionEvent {
  std::int64_t tick = 0;
  EventKind kind = EventKind::Start;
  NodeId actionId{};
  std::string detail;
  friend bool operator==(const ExecutionEvent&, const ExecutionEvent&) = default;
};

/// Evaluates the entry condition of the slot and, when it passes, starts it.
using ActionStarter = std::function<ConditionReport(const ActionSlot&)>;

/// Ordered action list with the layered dispatch rule: actions start in
/// order, each as soon as the action it executes after is no longer running.
class ExecutionQueue {
 public:
  ExecutionQueue() = default;
  explicit ExecutionQueue(std::vector<ActionSlot> actions, ExecutionMode mode = ExecutionMode::Autonomous);

  /// Per-tick non-blocking pass: starts actions while the next one may execute.
  /// Returns the ids started this call. No-op unless Autonomous.
  std::vector<NodeId> updateDispatch(std::int64_t tick, const ActionStarter& start);

  /// Operator step. ManualStep starts exactly the next action when nothing is
  /// running; ManualStepConcurrent starts the whole ready layer.
  std::vector<NodeId> step(std::int64_t tick, const ActionStarter& start);

  bool shouldExecute(std::size_t index) const;

  /// Marks an executing action finished. A failure freezes dispatch.
  void complete(std::size_t index, bool success, std::int64_t tick, std::string detail = {});

  /// Stops further dispatch until resetFrom() is called.
  void freeze(ConditionReport report);
  bool frozen() const { return frozen_; }
  const std::optional<ConditionReport>& failure() const { return failure_; }

  /// Starts a new run at `index`: that action and all later ones return to
  /// Pending. Requires that nothing is executing.
  void resetFrom(std::size_t index);

  /// Abort: every executing action is failed and dispatch frozen.
  void abort(std::int64_t tick);

  void setNominalDuration(std::size_t index, double seconds) { actions_.at(index).nominalDuration = seconds; }

  void setMode(ExecutionMode mode) { mode_ = mode; }
  ExecutionMode mode() const { return mode_; }

  std::size_t nextIndex() const { return next_; }
  std::size_t size() const { return actions_.size(); }
  const ActionSlot& at(std::size_t i) const { return actions_.at(i); }
  const std::vector<ActionSlot>& actions() const { return actions_; }
  std::optional<std::size_t> indexOf(NodeId id) const;

  bool anyExecuting() const;
  bool allSucceeded() const;
  bool finished() const { return next_ >= actions_.size() && !anyExecuting(); }

  std::vector<ExecutionEvent> drainEvents();

 private:
  std::optional<NodeId> startAt(std::size_t index, std::int64_t tick, const ActionStarter& start);
  std::vector<NodeId> dispatchLayer(std::int64_t tick, const ActionStarter& start);

  std::vector<ActionSlot> actions_;
  std::size_t next_ = 0;
  ExecutionMode mode_ = ExecutionMode::Autonomous;
  bool frozen_ = false;
  std::optional<ConditionReport> failure_;
  std::vector<ExecutionEvent> events_;
};

/// Runs a queue where every action succeeds after exactly its nominal
/// duration, completions processed before dispatch within each tick.
struct NominalSchedule {
  std::vector<std::int64_t> startTick;
  std::vector<std::int64_t> endTick;
  std::int64_t makespanTicks = 0;
  double makespanSeconds = 0.0;
};

NominalSchedule simulateNominalSchedule(const std::vector<double>& durations,
                                        const std::vector<std::optional<std::size_t>>& executeAfter,
                                        double tickRateHz);

/// executeAfter links of a pure sequence: each action waits for its predecessor.
std::vector<std::optional<std::size_t>> serialLinks(std::size_t n);

}  // namespace doorway
