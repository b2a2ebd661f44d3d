#include "doorway/model/tree_executor.hpp"

#include <algorithm>
#include <unordered_map>

namespace doorway {

void to_json(nlohmann::json& j, const ExecutionRequest& r) {
  j = nlohmann::json{{"tick", r.tick}, {"actionId", toInt(r.actionId)}, {"kind", r.kind}};
}

std::optional<NodeId> selectDoorSubtree(const BehaviorNode& coordinator,
                                        const std::vector<MechanismDetection>& detections) {
  for (const auto& d : detections) {
    if (!d.stable()) continue;
    for (const auto& child : coordinator.children) {
      if (child.kind != NodeKind::ActionSequence) continue;
      if (child.params<SequenceParams>().doorType == d.type) return child.id;
    }
  }
  return std::nullopt;
}

namespace {

int phaseIndex(Phase p) { return std::min(static_cast<int>(p), 2); }

const BehaviorNode* findPhaseSequence(const BehaviorNode& node, NodeId target, const BehaviorNode* current) {
  if (node.kind == NodeKind::ActionSequence && node.params<SequenceParams>().phase) current = &node;
  if (node.id == target) return current;
  for (const auto& c : node.children)
    if (const auto* f = findPhaseSequence(c, target, current)) return f;
  return nullptr;
}

}  // namespace

TreeExecutor::TreeExecutor(BehaviorNode root, ExecutionMode mode) : root_(std::move(root)), mode_(mode) {
  validateTree(root_);
  queue_.setMode(mode_);
  if (hasCoordinator()) {
    state_.maxRetries = root_.params<CoordinatorParams>().maxRetries;
  } else {
    buildQueue(root_);
  }
}

void TreeExecutor::buildQueue(const BehaviorNode& scope, const std::vector<ActionSlot>& carryOver) {
  const auto leaves = actionLeaves(scope);
  std::unordered_map<std::int64_t, std::size_t> position;
  std::unordered_map<std::int64_t, const ActionSlot*> previous;
  for (const auto& s : carryOver) previous[toInt(s.id)] = &s;
  std::vector<ActionSlot> slots(leaves.size());
  for (std::size_t i = 0; i < leaves.size(); ++i) {
    position[toInt(leaves[i]->id)] = i;
    if (const auto it = previous.find(toInt(leaves[i]->id)); it != previous.end()) slots[i] = *it->second;
    slots[i].id = leaves[i]->id;
    slots[i].executeAfter.reset();
    if (leaves[i]->executeAfterId) slots[i].executeAfter = position.at(toInt(*leaves[i]->executeAfterId));
  }
  for (auto& e : queue_.drainEvents()) carriedEvents_.push_back(std::move(e));
  queue_ = ExecutionQueue(std::move(slots), mode_);
}

const BehaviorNode* TreeExecutor::activeScope() const {
  if (!hasCoordinator()) return &root_;
  return state_.selectedSubtree ? findNode(root_, *state_.selectedSubtree) : nullptr;
}

const BehaviorNode* TreeExecutor::phaseSequenceOf(NodeId action) const {
  return findPhaseSequence(root_, action, nullptr);
}

std::optional<Phase> TreeExecutor::phaseOf(NodeId action) const {
  const auto* seq = phaseSequenceOf(action);
  if (!seq) return std::nullopt;
  return seq->params<SequenceParams>().phase;
}

void TreeExecutor::selectSubtree(NodeId id, std::int64_t tick, CoordinatorEventKind reason) {
  const BehaviorNode* subtree = findNode(root_, id);
  state_.selectedSubtree = id;
  state_.selectedDoorType = subtree->params<SequenceParams>().doorType;
  state_.triedSubtrees.push_back(id);
  state_.retryCount = {};
  buildQueue(*subtree);
  events_.push_back({tick, reason, id, state_.phase, subtree->name});
}

void TreeExecutor::handleFailure(std::int64_t tick) {
  const ConditionReport failure = *queue_.failure();
  const auto fail = [&](std::string reason) {
    state_.failed = true;
    state_.failureReason = reason;
    events_.push_back({tick, CoordinatorEventKind::BehaviorFailed, failure.actionId, state_.phase, std::move(reason)});
  };
  const auto failedIndex = queue_.indexOf(failure.actionId);
  if (!hasCoordinator() || !failedIndex) {
    fail(failure.detail.empty() ? "action failed" : failure.detail);
    return;
  }

  const BehaviorNode* phaseSeq = phaseSequenceOf(failure.actionId);
  if (phaseSeq) {
    const Phase phase = *phaseSeq->params<SequenceParams>().phase;
    int& retries = state_.retryCount[phaseIndex(phase)];
    if (retries < state_.maxRetries) {
      std::size_t from = queue_.indexOf(actionLeaves(*phaseSeq).front()->id).value();
      if (const auto& retryId = phaseSeq->params<SequenceParams>().retryFromId) {
        if (const auto idx = queue_.indexOf(NodeId{*retryId})) from = *idx;
      }
      from = std::min(from, *failedIndex);
      ++retries;
      queue_.resetFrom(from);
      events_.push_back({tick, CoordinatorEventKind::Retry, queue_.at(from).id, phase,
                         "attempt " + std::to_string(retries + 1) + " after: " + failure.detail});
      return;
    }
  }

  const auto doorType = state_.selectedDoorType;
  for (const auto& child : root_.children) {
    const auto& tried = state_.triedSubtrees;
    if (child.params<SequenceParams>().doorType != doorType) continue;
    if (std::find(tried.begin(), tried.end(), child.id) != tried.end()) continue;
    selectSubtree(child.id, tick, CoordinatorEventKind::StrategySwitch);
    return;
  }
  fail("retries exhausted: " + failure.detail);
}

std::vector<ExecutionRequest> TreeExecutor::dispatch(std::int64_t tick, const WorldView& world, bool operatorStep) {
  std::vector<ExecutionRequest> requests;
  const ActionStarter starter = [&](const ActionSlot& slot) {
    const BehaviorNode* node = findNode(root_, slot.id);
    ConditionReport report = world.evaluateEntry(*node);
    if (report.entryPassed) requests.push_back({tick, node->id, node->kind});
    return report;
  };
  if (operatorStep)
    queue_.step(tick, starter);
  else
    queue_.updateDispatch(tick, starter);
  return requests;
}

void TreeExecutor::updatePhase(std::int64_t tick) {
  Phase phase = state_.phase;
  if (activeScope()) {
    phase = Phase::Done;
    for (const auto& slot : queue_.actions()) {
      if (slot.status == ActionStatus::Succeeded) continue;
      phase = phaseOf(slot.id).value_or(state_.phase);
      break;
    }
  }
  if (phase != state_.phase) {
    state_.phase = phase;
    events_.push_back({tick, CoordinatorEventKind::PhaseEntered, root_.id, phase, {}});
  }
  if (succeeded() && !succeededReported_) {
    succeededReported_ = true;
    events_.push_back({tick, CoordinatorEventKind::BehaviorSucceeded, root_.id, state_.phase, {}});
  }
}

std::size_t TreeExecutor::visit(BehaviorNode& node) {
  if (isAction(node.kind)) {
    if (const auto idx = queue_.indexOf(node.id); idx && activeScope()) {
      const auto& slot = queue_.at(*idx);
      node.runtime = {slot.status, slot.startTick, slot.endTick, slot.nominalDuration};
    } else {
      node.runtime = {};
    }
  }
  std::size_t visited = 1;
  for (auto& c : node.children) visited += visit(c);
  return visited;
}

TickResult TreeExecutor::tick(std::int64_t tick, const WorldView& world) {
  TickResult result;
  if (hasCoordinator() && !state_.selectedSubtree && !state_.failed) {
    if (const auto selected = selectDoorSubtree(root_, world.detections()))
      selectSubtree(*selected, tick, CoordinatorEventKind::SubtreeSelected);
  }
  if (queue_.frozen() && !queue_.anyExecuting() && !state_.failed) handleFailure(tick);
  if (!state_.failed) result.requests = dispatch(tick, world, false);
  updatePhase(tick);
  result.nodesVisited = visit(root_);
  return result;
}

std::vector<ExecutionRequest> TreeExecutor::step(std::int64_t tick, const WorldView& world) {
  if (state_.failed || !activeScope()) return {};
  auto requests = dispatch(tick, world, true);
  updatePhase(tick);
  visit(root_);
  return requests;
}

void TreeExecutor::completeAction(NodeId id, bool success, std::int64_t tick, std::string detail) {
  const auto idx = queue_.indexOf(id);
  if (!idx) throw std::logic_error("completing an action outside the active subtree");
  queue_.complete(*idx, success, tick, std::move(detail));
}

void TreeExecutor::setNominalDuration(NodeId id, double seconds) {
  if (const auto idx = queue_.indexOf(id)) queue_.setNominalDuration(*idx, seconds);
}

void TreeExecutor::setMode(ExecutionMode mode) {
  mode_ = mode;
  queue_.setMode(mode);
}

void TreeExecutor::abort(std::int64_t tick) {
  queue_.abort(tick);
  if (!state_.failed) {
    state_.failed = true;
    state_.failureReason = "aborted";
    events_.push_back({tick, CoordinatorEventKind::BehaviorFailed, root_.id, state_.phase, "aborted"});
  }
  visit(root_);
}

void TreeExecutor::edit(const std::function<void(BehaviorNode&)>& change) {
  BehaviorNode candidate = root_;
  change(candidate);
  validateTree(candidate);
  const bool coordinatorChanged = (candidate.kind == NodeKind::DoorTraversalCoordinator) != hasCoordinator();
  const std::vector<ActionSlot> carry = queue_.actions();
  const bool wasFrozen = queue_.frozen();
  const auto failure = queue_.failure();
  root_ = std::move(candidate);
  if (hasCoordinator()) state_.maxRetries = root_.params<CoordinatorParams>().maxRetries;
  if (coordinatorChanged || (state_.selectedSubtree && !findNode(root_, *state_.selectedSubtree))) {
    state_.selectedSubtree.reset();
    state_.selectedDoorType.reset();
  }
  if (const BehaviorNode* scope = activeScope()) {
    buildQueue(*scope, carry);
  } else {
    buildQueue(BehaviorNode{}, {});
  }
  if (wasFrozen && failure) queue_.freeze(*failure);
  visit(root_);
}

bool TreeExecutor::succeeded() const {
  return !state_.failed && activeScope() && queue_.finished() && queue_.allSucceeded();
}

std::vector<ExecutionEvent> TreeExecutor::drainExecutionEvents() {
  auto out = std::move(carriedEvents_);
  carriedEvents_.clear();
  for (auto& e : queue_.drainEvents()) out.push_back(std::move(e));
  return out;
}

std::vector<CoordinatorEvent> TreeExecutor::drainCoordinatorEvents() {
  std::vector<CoordinatorEvent> out;
  out.swap(events_);
  return out;
}

}  // namespace doorway
