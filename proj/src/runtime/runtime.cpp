#include "doorway/runtime/runtime.hpp"

#include <algorithm>

namespace doorway {

namespace {

std::string eventToken(const ExecutionEvent& e) {
  return nlohmann::json(e.kind).get<std::string>() + ":" + std::to_string(toInt(e.actionId));
}

std::string coordinatorToken(const CoordinatorEvent& e) {
  switch (e.kind) {
    case CoordinatorEventKind::PhaseEntered:
      return "phase:" + phaseName(e.phase);
    case CoordinatorEventKind::SubtreeSelected:
      return "selected:" + std::to_string(toInt(e.nodeId));
    case CoordinatorEventKind::Retry:
      return "retry:" + std::to_string(toInt(e.nodeId));
    case CoordinatorEventKind::StrategySwitch:
      return "switch:" + std::to_string(toInt(e.nodeId));
    case CoordinatorEventKind::BehaviorFailed:
      return "behaviorFailed";
    case CoordinatorEventKind::BehaviorSucceeded:
      return "behaviorSucceeded";
  }
  return "unknown";
}

}  // namespace

Runtime::Runtime(BehaviorNode tree, ScenarioConfig scenario, RuntimeOptions options)
    : scenario_(std::move(scenario)),
      options_(std::move(options)),
      world_(scenario_),
      tree_(std::make_unique<TreeExecutor>(std::move(tree), options_.mode)),
      sensor_(scenario_.sensor, options_.seed, options_.render),
      perception_([&] {
        PerceptionOptions p = options_.perception;
        p.planes.seed = options_.seed;
        return p;
      }()) {
  sensorPeriod_ = std::max(1, static_cast<int>(std::lround(scenario_.tickRateHz / scenario_.sensor.rateHz)));
}

void Runtime::log(LogLevel level, std::optional<NodeId> node, std::string message) {
  LogRecord r;
  r.tick = world_.tick();
  r.level = level;
  if (node) r.nodeId = toInt(*node);
  r.message = std::move(message);
  logs_.push_back(std::move(r));
}

std::vector<LogRecord> Runtime::drainLogs() {
  auto out = std::move(logs_);
  logs_.clear();
  return out;
}

std::string Runtime::nodeLabel(NodeId id) const {
  const BehaviorNode* n = findNode(tree_->root(), id);
  return n ? "'" + n->name + "'" : "#" + std::to_string(toInt(id));
}

ConditionReport Runtime::evaluateEntry(const BehaviorNode& action) const {
  PreparedAction p = prepareAction(action, world_, options_.tolerance);
  ConditionReport report = p.report;
  if (!report.entryPassed) {
    report.detail = "entry failed for '" + action.name + "': " + report.detail;
    return report;
  }
  prepared_[toInt(action.id)] = std::move(p);
  return report;
}

void Runtime::startRequests(const std::vector<ExecutionRequest>& requests) {
  for (const auto& req : requests) {
    auto it = prepared_.find(toInt(req.actionId));
    if (it == prepared_.end() || !it->second.executor) throw std::logic_error("action started without entry check");
    std::unique_ptr<ActionExecutor> exec = std::move(it->second.executor);
    prepared_.erase(it);
    exec->start(world_);
    tree_->setNominalDuration(req.actionId, exec->nominalDuration());
    active_.push_back({req.actionId, world_.tick(), std::move(exec)});
  }
}

void Runtime::pollActive() {
  const std::int64_t k = world_.tick();
  for (auto it = active_.begin(); it != active_.end();) {
    const double elapsed = static_cast<double>(k - it->startTick) * world_.dt();
    TrackingSample sample = it->executor->track(world_, elapsed);
    sample.tick = k;
    sample.actionId = it->id;
    tracking_.push_back(sample);
    const ExitCheck check = it->executor->poll(world_, elapsed);
    if (check.result == ExitResult::NotYetEvaluated) {
      ++it;
      continue;
    }
    const bool ok = check.result == ExitResult::Success;
    std::string detail = check.detail;
    if (!ok) detail = nodeLabel(it->id) + " failed: " + detail;
    tree_->completeAction(it->id, ok, k, detail);
    it = active_.erase(it);
  }
}

void Runtime::runPerception() {
  if (world_.tick() % sensorPeriod_ != 0) return;
  const SensorFrame frame = sensor_.capture(world_);
  perception_.process(frame, &world_.frames());
  auto& frames = world_.frames();
  if (tree_->coordinator().phase != Phase::Approach) return;
  if (const auto detected = frames.find(kDetectedMechanismFrame))
    frames.addFrame(kApproachMechanismFrame, frames.worldPose(*detected));
}

void Runtime::recordEvents() {
  for (const auto& e : tree_->drainCoordinatorEvents()) {
    metrics_.addEvent(coordinatorToken(e));
    switch (e.kind) {
      case CoordinatorEventKind::PhaseEntered:
        log(LogLevel::Info, std::nullopt, "phase " + phaseName(e.phase));
        break;
      case CoordinatorEventKind::SubtreeSelected:
        log(LogLevel::Info, e.nodeId, "selected door strategy " + nodeLabel(e.nodeId));
        break;
      case CoordinatorEventKind::Retry:
        log(LogLevel::Warn, e.nodeId, "retrying from " + nodeLabel(e.nodeId) + ", " + e.detail);
        break;
      case CoordinatorEventKind::StrategySwitch:
        log(LogLevel::Warn, e.nodeId, "switching to alternative strategy " + nodeLabel(e.nodeId));
        break;
      case CoordinatorEventKind::BehaviorFailed:
        log(LogLevel::Error, e.nodeId, "behavior failed: " + e.detail);
        break;
      case CoordinatorEventKind::BehaviorSucceeded:
        log(LogLevel::Info, std::nullopt, "behavior succeeded");
        break;
    }
  }
  for (const auto& e : tree_->drainExecutionEvents()) {
    metrics_.addEvent(eventToken(e));
    switch (e.kind) {
      case EventKind::Start:
        log(LogLevel::Info, e.actionId, "start " + nodeLabel(e.actionId));
        break;
      case EventKind::Stop:
        log(LogLevel::Info, e.actionId, "done " + nodeLabel(e.actionId));
        break;
      case EventKind::Fail:
        log(LogLevel::Error, e.actionId, e.detail.empty() ? nodeLabel(e.actionId) + " failed" : e.detail);
        break;
    }
  }
}

void Runtime::updateStatus() {
  if (status_ != RunStatus::Running) return;
  if (tree_->succeeded()) {
    status_ = RunStatus::Succeeded;
  } else if (tree_->failed()) {
    status_ = RunStatus::Failed;
    world_.halt();
    active_.clear();
  }
}

void Runtime::tick() {
  if (status_ != RunStatus::Running) return;
  const std::int64_t k = world_.tick();
  metrics_.record(world_.time(), world_.progress(), tree_->coordinator().phase);
  tracking_.clear();
  pollActive();
  runPerception();
  startRequests(tree_->tick(k, *this).requests);
  recordEvents();
  world_.step();

  const bool colliding = world_.collision().collision;
  if (colliding) ++collisionTicks_;
  if (colliding != inCollision_) {
    inCollision_ = colliding;
    metrics_.addEvent(colliding ? "collision" : "collisionCleared");
    if (colliding) log(LogLevel::Warn, std::nullopt, "shoulders contact the door frame");
  }
  updateStatus();
  if (status_ != RunStatus::Running) recordEvents();
}

RunStatus Runtime::runToCompletion() {
  while (status_ == RunStatus::Running) {
    if (world_.time() >= scenario_.timeoutS - 1e-9) {
      tree_->abort(world_.tick());
      world_.halt();
      active_.clear();
      status_ = RunStatus::TimedOut;
      metrics_.record(world_.time(), world_.progress(), tree_->coordinator().phase);
      metrics_.addEvent("timeout");
      recordEvents();
      log(LogLevel::Error, std::nullopt, "timed out after " + std::to_string(scenario_.timeoutS) + " s");
      break;
    }
    tick();
  }
  return status_;
}

std::vector<NodeId> Runtime::executeNextAction() {
  const auto requests = tree_->step(world_.tick(), *this);
  startRequests(requests);
  std::vector<NodeId> ids;
  for (const auto& r : requests) ids.push_back(r.actionId);
  return ids;
}

void Runtime::setMode(ExecutionMode mode) {
  tree_->setMode(mode);
  options_.mode = mode;
}

void Runtime::abort() {
  tree_->abort(world_.tick());
  world_.halt();
  active_.clear();
  if (status_ == RunStatus::Running) status_ = RunStatus::Failed;
  if (!metrics_.samples().empty()) recordEvents();
}

void Runtime::editTree(const std::function<void(BehaviorNode&)>& change) {
  tree_->edit(change);
  ++treeRevision_;
}

void Runtime::replaceTree(BehaviorNode tree) {
  auto next = std::make_unique<TreeExecutor>(std::move(tree), options_.mode);
  world_.halt();
  active_.clear();
  prepared_.clear();
  tree_ = std::move(next);
  status_ = RunStatus::Running;
  ++treeRevision_;
}

std::vector<TimedPose> Runtime::previewAction(NodeId id) const {
  const BehaviorNode* node = findNode(tree_->root(), id);
  if (!node || !isAction(node->kind)) throw std::invalid_argument("no action with id " + std::to_string(toInt(id)));
  PreparedAction p = prepareAction(*node, world_, options_.tolerance);
  if (!p.report.entryPassed) throw std::invalid_argument(p.report.detail);
  SimWorld scratch = world_;
  p.executor->start(scratch);
  return p.executor->preview();
}

}  // namespace doorway
