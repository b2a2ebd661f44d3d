#include "doorway/service/command_processor.hpp"

#include <algorithm>
#include <set>

namespace doorway {

using nlohmann::json;

namespace {

std::int64_t requireInt(const json& args, const char* key) {
  if (!args.contains(key) || !args.at(key).is_number_integer())
    throw ParseError(std::string("missing integer argument '") + key + "'");
  return args.at(key).get<std::int64_t>();
}

bool requireBool(const json& args, const char* key) {
  if (!args.contains(key) || !args.at(key).is_boolean())
    throw ParseError(std::string("missing boolean argument '") + key + "'");
  return args.at(key).get<bool>();
}

const json& requireObject(const json& args, const char* key) {
  if (!args.contains(key) || !args.at(key).is_object())
    throw ParseError(std::string("missing object argument '") + key + "'");
  return args.at(key);
}

std::int64_t maxIdIn(const json& node) {
  std::int64_t m = node.contains("id") && node.at("id").is_number_integer() ? node.at("id").get<std::int64_t>() : 0;
  if (node.contains("children") && node.at("children").is_array())
    for (const auto& c : node.at("children")) m = std::max(m, maxIdIn(c));
  return m;
}

// Console-built nodes may omit ids; they get fresh ones.
void assignMissingIds(json& node, std::int64_t& next) {
  if (!node.is_object()) return;
  if (!node.contains("id")) node["id"] = next++;
  if (node.contains("children") && node.at("children").is_array())
    for (auto& c : node.at("children")) assignMissingIds(c, next);
}

json nodeStates(const BehaviorNode& root) {
  json out = json::array();
  for (const BehaviorNode* a : actionLeaves(root))
    out.push_back({{"id", toInt(a->id)},
                   {"status", a->runtime.status},
                   {"startTick", a->runtime.startTick},
                   {"endTick", a->runtime.endTick},
                   {"nominalDurationS", a->runtime.nominalDuration}});
  return out;
}

}  // namespace

CommandProcessor::CommandProcessor(Runtime& runtime)
    : rt_(runtime),
      manual_(runtime.tree().mode() != ExecutionMode::Autonomous),
      concurrent_(runtime.tree().mode() == ExecutionMode::ManualStepConcurrent) {}

void CommandProcessor::applyMode() {
  if (!manual_)
    rt_.setMode(ExecutionMode::Autonomous);
  else
    rt_.setMode(concurrent_ ? ExecutionMode::ManualStepConcurrent : ExecutionMode::ManualStep);
}

json CommandProcessor::handle(std::string_view text) {
  std::optional<std::int64_t> seq;
  try {
    const WireCommand c = parseCommand(text, &seq);
    json result = apply(c);
    return makeAck(c.seq, true, {}, std::move(result));
  } catch (const std::exception& e) {
    return makeAck(seq, false, e.what());
  }
}

json CommandProcessor::apply(const WireCommand& c) {
  const json& a = c.args;
  if (c.name == "loadBehavior") {
    BehaviorNode tree;
    if (a.contains("behavior"))
      tree = loadTree(requireObject(a, "behavior"));
    else if (a.contains("path") && a.at("path").is_string())
      tree = loadTreeFile(a.at("path").get<std::string>());
    else
      throw ParseError("loadBehavior needs 'behavior' or 'path'");
    rt_.replaceTree(std::move(tree));
    applyMode();
    return {{"revision", rt_.treeRevision()}};
  }
  if (c.name == "saveBehavior") {
    if (a.contains("path")) {
      if (!a.at("path").is_string()) throw ParseError("'path' must be a string");
      saveTreeFile(rt_.tree().root(), a.at("path").get<std::string>());
    }
    return {{"behavior", saveTree(rt_.tree().root())}};
  }
  if (c.name == "addNode") {
    const NodeId parent{requireInt(a, "parentId")};
    json nodeJson = requireObject(a, "node");
    std::int64_t next = std::max(toInt(nextFreeId(rt_.tree().root())), maxIdIn(nodeJson) + 1);
    assignMissingIds(nodeJson, next);
    std::vector<NodeId> unset;
    BehaviorNode node = nodeFromJson(nodeJson, &unset);
    const NodeId id = node.id;
    std::size_t index = static_cast<std::size_t>(-1);
    if (a.contains("index")) {
      const auto i = requireInt(a, "index");
      if (i < 0) throw ParseError("'index' must not be negative");
      index = static_cast<std::size_t>(i);
    }
    rt_.editTree([&](BehaviorNode& root) {
      insertNode(root, parent, index, std::move(node));
      linkToPrevious(root, unset);
    });
    return {{"nodeId", toInt(id)}};
  }
  if (c.name == "removeNode") {
    const NodeId id{requireInt(a, "nodeId")};
    const BehaviorNode* n = findNode(rt_.tree().root(), id);
    if (!n) throw std::invalid_argument("no node with id " + std::to_string(toInt(id)));
    for (const BehaviorNode* leaf : actionLeaves(*n))
      if (leaf->runtime.status == ActionStatus::Executing)
        throw std::invalid_argument("cannot remove '" + leaf->name + "' while it is executing");
    rt_.editTree([&](BehaviorNode& root) { removeNode(root, id); });
    return nullptr;
  }
  if (c.name == "setNodeParameters") {
    const NodeId id{requireInt(a, "nodeId")};
    const json& patch = requireObject(a, "parameters");
    rt_.editTree([&](BehaviorNode& root) {
      BehaviorNode* n = findNode(root, id);
      if (!n) throw std::invalid_argument("no node with id " + std::to_string(toInt(id)));
      json merged = serializeParameters(n->parameters);
      merged.merge_patch(patch);
      n->parameters = parseParameters(n->kind, merged);
      if (a.contains("name")) {
        if (!a.at("name").is_string()) throw ParseError("'name' must be a string");
        n->name = a.at("name").get<std::string>();
      }
    });
    return nullptr;
  }
  if (c.name == "setExecuteAfter") {
    const NodeId id{requireInt(a, "nodeId")};
    if (!a.contains("executeAfterId")) throw ParseError("missing argument 'executeAfterId'");
    std::optional<NodeId> after;
    if (!a.at("executeAfterId").is_null()) after = NodeId{requireInt(a, "executeAfterId")};
    rt_.editTree([&](BehaviorNode& root) {
      BehaviorNode* n = findNode(root, id);
      if (!n) throw std::invalid_argument("no node with id " + std::to_string(toInt(id)));
      if (!isAction(n->kind)) throw std::invalid_argument("executeAfterId applies to actions only");
      n->executeAfterId = after;
    });
    return nullptr;
  }
  if (c.name == "moveNode") {
    const NodeId id{requireInt(a, "nodeId")};
    const NodeId parent{requireInt(a, "parentId")};
    const auto index = requireInt(a, "index");
    if (index < 0) throw ParseError("'index' must not be negative");
    rt_.editTree([&](BehaviorNode& root) {
      if (id == root.id) throw std::invalid_argument("cannot move the root");
      auto* oldParent = const_cast<BehaviorNode*>(findParent(root, id));
      if (!oldParent) throw std::invalid_argument("no node with id " + std::to_string(toInt(id)));
      auto it = std::find_if(oldParent->children.begin(), oldParent->children.end(),
                             [&](const BehaviorNode& ch) { return ch.id == id; });
      BehaviorNode moved = std::move(*it);
      oldParent->children.erase(it);
      if (findNode(moved, parent)) throw std::invalid_argument("cannot move a node into its own subtree");
      BehaviorNode* target = findNode(root, parent);
      if (!target) throw std::invalid_argument("no node with id " + std::to_string(toInt(parent)));
      if (isAction(target->kind)) throw std::invalid_argument("actions cannot have children");
      const auto at = std::min(static_cast<std::size_t>(index), target->children.size());
      target->children.insert(target->children.begin() + static_cast<std::ptrdiff_t>(at), std::move(moved));
    });
    return nullptr;
  }
  if (c.name == "reorderChildren") {
    const NodeId parent{requireInt(a, "parentId")};
    if (!a.contains("order") || !a.at("order").is_array()) throw ParseError("missing array argument 'order'");
    std::vector<NodeId> order;
    for (const auto& v : a.at("order")) {
      if (!v.is_number_integer()) throw ParseError("'order' must hold node ids");
      order.push_back(NodeId{v.get<std::int64_t>()});
    }
    rt_.editTree([&](BehaviorNode& root) {
      BehaviorNode* p = findNode(root, parent);
      if (!p) throw std::invalid_argument("no node with id " + std::to_string(toInt(parent)));
      if (order.size() != p->children.size()) throw std::invalid_argument("'order' must list every child once");
      std::vector<BehaviorNode> next;
      for (NodeId id : order) {
        auto it = std::find_if(p->children.begin(), p->children.end(),
                               [&](const BehaviorNode& ch) { return ch.id == id; });
        if (it == p->children.end()) throw std::invalid_argument("'order' must list every child once");
        next.push_back(*it);
      }
      std::set<std::int64_t> unique;
      for (NodeId id : order) unique.insert(toInt(id));
      if (unique.size() != order.size()) throw std::invalid_argument("'order' must list every child once");
      p->children = std::move(next);
    });
    return nullptr;
  }
  if (c.name == "executeNextAction") {
    if (!manual_) throw std::invalid_argument("executeNextAction requires manual mode");
    json ids = json::array();
    for (NodeId id : rt_.executeNextAction()) ids.push_back(toInt(id));
    return {{"started", ids}};
  }
  if (c.name == "setMode") {
    if (!a.contains("mode") || !a.at("mode").is_string()) throw ParseError("missing string argument 'mode'");
    const std::string mode = a.at("mode").get<std::string>();
    if (mode != "auto" && mode != "manual") throw ParseError("mode must be 'auto' or 'manual'");
    manual_ = mode == "manual";
    applyMode();
    return nullptr;
  }
  if (c.name == "setConcurrencyAllowed") {
    concurrent_ = requireBool(a, "allowed");
    applyMode();
    return nullptr;
  }
  if (c.name == "abort") {
    rt_.abort();
    return nullptr;
  }
  if (c.name == "previewAction") {
    const NodeId id{requireInt(a, "nodeId")};
    json poses = json::array();
    for (const auto& p : rt_.previewAction(id)) poses.push_back({{"timeS", p.time}, {"pose", p.pose}});
    return {{"poses", poses}};
  }
  throw ParseError("unknown command '" + c.name + "'");
}

json CommandProcessor::treeSnapshot() const {
  return {{"revision", rt_.treeRevision()},
          {"behavior", saveTree(rt_.tree().root())},
          {"nodeStates", nodeStates(rt_.tree().root())}};
}

json CommandProcessor::worldSnapshot() const {
  const SimWorld& w = rt_.world();
  const RobotState& r = w.robot();
  const DoorState& d = w.door().state();
  const CollisionReport col = w.collision();

  json queue = json::array();
  for (const auto& f : w.walking().state().footstepQueue) queue.push_back({{"side", f.side}, {"pose", f.target}});
  json detections = json::array();
  for (const auto& det : rt_.detections())
    detections.push_back({{"type", det.type},
                          {"stable", det.stable()},
                          {"centroid", det.filteredCentroid},
                          {"hits", det.window.hits()}});

  return {
      {"tick", w.tick()},
      {"timeS", w.time()},
      {"status", rt_.status()},
      {"phase", phaseName(rt_.tree().coordinator().phase)},
      {"mode", manual_ ? "manual" : "auto"},
      {"concurrencyAllowed", concurrent_},
      {"progressM", w.progress()},
      {"collision", {{"active", col.collision}, {"clearanceM", col.clearance}, {"lateralOffsetM", col.lateralOffset}}},
      {"robot",
       {{"pelvis", r.pelvisPose},
        {"feet", {{"left", r.footPoses[index(Side::Left)]}, {"right", r.footPoses[index(Side::Right)]}}},
        {"hands", {{"left", r.handPoses[index(Side::Left)]}, {"right", r.handPoses[index(Side::Right)]}}},
        {"chestYaw", r.chestYaw},
        {"pelvisHeightOffset", r.pelvisHeightOffset},
        {"shoulderSpanM", r.shoulderSpan},
        {"walkingState", w.walking().state().state},
        {"footstepQueue", queue}}},
      {"door",
       {{"hingeSide", d.hingeSide},
        {"swing", d.swingDirection},
        {"mechanism", d.mechanismType},
        {"panelAngle", d.panelAngle},
        {"handleAngle", d.handleAngle},
        {"latched", d.latched},
        {"frameWidthM", d.frameWidth},
        {"panelWidthM", d.panelWidth},
        {"hinge", d.hingeWorldPose}}},
      {"detections", detections},
      {"nodeStates", nodeStates(rt_.tree().root())},
  };
}

json CommandProcessor::trackingUpdate() const {
  return {{"tick", rt_.world().tick()},
          {"timeS", rt_.world().time()},
          {"progressM", rt_.world().progress()},
          {"samples", rt_.tracking()}};
}

std::vector<json> CommandProcessor::collectOutgoing(bool periodic) {
  std::vector<json> out;
  if (!sentTree_ || rt_.treeRevision() != sentRevision_) {
    out.push_back(makeMessage(MessageType::TreeSnapshot, treeSnapshot()));
    sentRevision_ = rt_.treeRevision();
    sentTree_ = true;
  }
  for (auto& r : rt_.drainLogs()) {
    out.push_back(makeMessage(MessageType::LogEvent, r));
    if (sink_) sink_->append(std::move(r));
  }
  if (periodic) {
    out.push_back(makeMessage(MessageType::WorldSnapshot, worldSnapshot()));
    out.push_back(makeMessage(MessageType::TrackingUpdate, trackingUpdate()));
  }
  return out;
}

}  // namespace doorway
