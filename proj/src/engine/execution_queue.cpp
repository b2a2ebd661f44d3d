#include "doorway/engine/execution_queue.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace doorway {

ExecutionQueue::ExecutionQueue(std::vector<ActionSlot> actions, ExecutionMode mode)
    : actions_(std::move(actions)), mode_(mode) {
  for (std::size_t i = 0; i < actions_.size(); ++i) {
    if (actions_[i].executeAfter && *actions_[i].executeAfter >= i)
      throw std::invalid_argument("executeAfter must refer to an earlier action");
  }
  // Restored queues resume at the first action that has not been started.
  while (next_ < actions_.size() && actions_[next_].status != ActionStatus::Pending) ++next_;
}

bool ExecutionQueue::shouldExecute(std::size_t index) const {
  const auto& after = actions_.at(index).executeAfter;
  if (!after) return true;
  return isComplete(actions_[*after].status);
}

std::optional<NodeId> ExecutionQueue::startAt(std::size_t index, std::int64_t tick, const ActionStarter& start) {
  ActionSlot& slot = actions_[index];
  ++next_;
  ConditionReport report = start(slot);
  report.actionId = slot.id;
  slot.startTick = tick;
  if (!report.entryPassed) {
    slot.status = ActionStatus::Failed;
    slot.endTick = tick;
    events_.push_back({tick, EventKind::Fail, slot.id, "entry: " + report.detail});
    freeze(std::move(report));
    return std::nullopt;
  }
  slot.status = ActionStatus::Executing;
  events_.push_back({tick, EventKind::Start, slot.id, {}});
  return slot.id;
}

std::vector<NodeId> ExecutionQueue::dispatchLayer(std::int64_t tick, const ActionStarter& start) {
  std::vector<NodeId> started;
  while (!frozen_ && next_ < actions_.size() && shouldExecute(next_)) {
    if (auto id = startAt(next_, tick, start)) started.push_back(*id);
  }
  return started;
}

std::vector<NodeId> ExecutionQueue::updateDispatch(std::int64_t tick, const ActionStarter& start) {
  if (mode_ != ExecutionMode::Autonomous) return {};
  return dispatchLayer(tick, start);
}

std::vector<NodeId> ExecutionQueue::step(std::int64_t tick, const ActionStarter& start) {
  if (frozen_ || next_ >= actions_.size()) return {};
  if (mode_ == ExecutionMode::ManualStepConcurrent) return dispatchLayer(tick, start);
  if (anyExecuting()) return {};
  if (auto id = startAt(next_, tick, start)) return {*id};
  return {};
}

void ExecutionQueue::complete(std::size_t index, bool success, std::int64_t tick, std::string detail) {
  ActionSlot& slot = actions_.at(index);
  if (slot.status != ActionStatus::Executing) throw std::logic_error("completing an action that is not executing");
  slot.status = success ? ActionStatus::Succeeded : ActionStatus::Failed;
  slot.endTick = tick;
  events_.push_back({tick, success ? EventKind::Stop : EventKind::Fail, slot.id, detail});
  if (!success) freeze({slot.id, true, ExitResult::Failure, std::move(detail)});
}

void ExecutionQueue::freeze(ConditionReport report) {
  frozen_ = true;
  if (!failure_) failure_ = std::move(report);
}

void ExecutionQueue::resetFrom(std::size_t index) {
  if (anyExecuting()) throw std::logic_error("cannot reset while actions are executing");
  if (index > actions_.size()) throw std::out_of_range("reset index past end of queue");
  for (std::size_t i = index; i < actions_.size(); ++i) {
    actions_[i].status = ActionStatus::Pending;
    actions_[i].startTick = actions_[i].endTick = -1;
  }
  next_ = index;
  frozen_ = false;
  failure_.reset();
}

void ExecutionQueue::abort(std::int64_t tick) {
  for (auto& slot : actions_) {
    if (slot.status == ActionStatus::Executing) {
      slot.status = ActionStatus::Failed;
      slot.endTick = tick;
      events_.push_back({tick, EventKind::Fail, slot.id, "aborted"});
    }
  }
  freeze({NodeId{-1}, true, ExitResult::Failure, "aborted"});
}

std::optional<std::size_t> ExecutionQueue::indexOf(NodeId id) const {
  for (std::size_t i = 0; i < actions_.size(); ++i)
    if (actions_[i].id == id) return i;
  return std::nullopt;
}

bool ExecutionQueue::anyExecuting() const {
  return std::any_of(actions_.begin(), actions_.end(), [](const ActionSlot& s) { return s.status == ActionStatus::Executing; });
}

bool ExecutionQueue::allSucceeded() const {
  return std::all_of(actions_.begin(), actions_.end(), [](const ActionSlot& s) { return s.status == ActionStatus::Succeeded; });
}

std::vector<ExecutionEvent> ExecutionQueue::drainEvents() {
  std::vector<ExecutionEvent> out;
  out.swap(events_);
  return out;
}

NominalSchedule simulateNominalSchedule(const std::vector<double>& durations,
                                        const std::vector<std::optional<std::size_t>>& executeAfter,
                                        double tickRateHz) {
  if (durations.size() != executeAfter.size()) throw std::invalid_argument("durations and links differ in length");
  std::vector<ActionSlot> slots(durations.size());
  std::vector<std::int64_t> durationTicks(durations.size());
  for (std::size_t i = 0; i < slots.size(); ++i) {
    slots[i].id = NodeId{static_cast<std::int64_t>(i)};
    slots[i].executeAfter = executeAfter[i];
    slots[i].nominalDuration = durations[i];
    // Completion is observed on the first tick at or after the nominal end.
    durationTicks[i] = static_cast<std::int64_t>(std::ceil(durations[i] * tickRateHz - 1e-6));
  }
  ExecutionQueue queue(std::move(slots));
  const ActionStarter accept = [](const ActionSlot&) { return ConditionReport{}; };

  for (std::int64_t tick = 0;; ++tick) {
    for (std::size_t i = 0; i < queue.size(); ++i) {
      const auto& s = queue.at(i);
      if (s.status == ActionStatus::Executing && tick - s.startTick >= durationTicks[i]) queue.complete(i, true, tick);
    }
    queue.updateDispatch(tick, accept);
    // Zero-length actions finish on the tick they start.
    bool again = true;
    while (again) {
      again = false;
      for (std::size_t i = 0; i < queue.size(); ++i) {
        const auto& s = queue.at(i);
        if (s.status == ActionStatus::Executing && tick - s.startTick >= durationTicks[i]) {
          queue.complete(i, true, tick);
          again = true;
        }
      }
      if (again) queue.updateDispatch(tick, accept);
    }
    if (queue.finished()) {
      NominalSchedule out;
      for (const auto& s : queue.actions()) {
        out.startTick.push_back(s.startTick);
        out.endTick.push_back(s.endTick);
        out.makespanTicks = std::max(out.makespanTicks, s.endTick);
      }
      out.makespanSeconds = static_cast<double>(out.makespanTicks) / tickRateHz;
      return out;
    }
  }
}

std::vector<std::optional<std::size_t>> serialLinks(std::size_t n) {
  std::vector<std::optional<std::size_t>> links(n);
  for (std::size_t i = 1; i < n; ++i) links[i] = i - 1;
  return links;
}

}  // namespace doorway
