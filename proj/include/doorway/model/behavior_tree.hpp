#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "doorway/engine/execution_queue.hpp"
#include "doorway/model/parameters.hpp"

namespace doorway {

/// Execution bookkeeping mirrored from the execution queue each tick. Not persisted.
struct ActionRuntime {
  ActionStatus status = ActionStatus::Pending;
  std::int64_t startTick = -1;
  std::int64_t endTick = -1;
  double nominalDuration = 0.0;
};

struct BehaviorNode {
  NodeId id{};
  NodeKind kind = NodeKind::ActionSequence;
  std::string name;
  std::vector<BehaviorNode> children;
  NodeParameters parameters = SequenceParams{};
  /// Action nodes only. Empty means the action has no dependency.
  std::optional<NodeId> executeAfterId;
  ActionRuntime runtime;

  template <typename T>
  const T& params() const { return std::get<T>(parameters); }
  template <typename T>
  T& params() { return std::get<T>(parameters); }
};

/// Ids, kinds, names, parameters, links and child order; ignores runtime state.
bool structurallyEqual(const BehaviorNode& a, const BehaviorNode& b);

constexpr int kBehaviorFileVersion = 1;

/// Parses {version, root}. Resolves absent executeAfterId to the preceding
/// action in execution order and validates the result.
BehaviorNode loadTree(const nlohmann::json& document);
BehaviorNode loadTreeFile(const std::filesystem::path& path);

/// Writes every executeAfterId explicitly (null for none).
nlohmann::json saveTree(const BehaviorNode& root);
std::string saveTreeString(const BehaviorNode& root);
void saveTreeFile(const BehaviorNode& root, const std::filesystem::path& path);

/// Node JSON without the surrounding document. `unsetLinks` collects the ids
/// of actions whose executeAfterId key was absent.
BehaviorNode nodeFromJson(const nlohmann::json& j, std::vector<NodeId>* unsetLinks = nullptr);
nlohmann::json nodeToJson(const BehaviorNode& node);

/// Throws ParseError describing the first violated rule.
void validateTree(const BehaviorNode& root);

/// Roots of independent execution orders: each door subtree under a
/// coordinator root, otherwise the root itself.
std::vector<const BehaviorNode*> executionScopes(const BehaviorNode& root);

/// Action leaves of a subtree in depth-first order.
std::vector<const BehaviorNode*> actionLeaves(const BehaviorNode& scope);

const BehaviorNode* findNode(const BehaviorNode& root, NodeId id);
BehaviorNode* findNode(BehaviorNode& root, NodeId id);
const BehaviorNode* findParent(const BehaviorNode& root, NodeId id);
std::size_t countNodes(const BehaviorNode& root);
NodeId nextFreeId(const BehaviorNode& root);

/// Inserts `node` under `parent` at `index` (clamped). Validates; throws and
/// leaves the tree unchanged on failure.
void insertNode(BehaviorNode& root, NodeId parent, std::size_t index, BehaviorNode node);

/// Removes a node and its subtree. Actions that executed after a removed
/// action inherit its dependency.
void removeNode(BehaviorNode& root, NodeId id);

/// Applies the default link rule to the listed actions: each depends on the
/// action preceding it in its execution scope.
void linkToPrevious(BehaviorNode& root, const std::vector<NodeId>& actions);

}  // namespace doorway
