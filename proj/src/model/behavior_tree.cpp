#include "doorway/model/behavior_tree.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace doorway {

using nlohmann::json;

namespace {

std::string idText(NodeId id) { return std::to_string(toInt(id)); }

template <typename Node, typename F>
void forEachNode(Node& node, F&& f) {
  f(node);
  for (auto& c : node.children) forEachNode(c, f);
}

void collectLeaves(const BehaviorNode& n, std::vector<const BehaviorNode*>& out) {
  if (isAction(n.kind)) out.push_back(&n);
  for (const auto& c : n.children) collectLeaves(c, out);
}

}  // namespace

bool structurallyEqual(const BehaviorNode& a, const BehaviorNode& b) {
  if (a.id != b.id || a.kind != b.kind || a.name != b.name || a.executeAfterId != b.executeAfterId ||
      !(a.parameters == b.parameters) || a.children.size() != b.children.size())
    return false;
  for (std::size_t i = 0; i < a.children.size(); ++i)
    if (!structurallyEqual(a.children[i], b.children[i])) return false;
  return true;
}

BehaviorNode nodeFromJson(const json& j, std::vector<NodeId>* unsetLinks) {
  if (!j.is_object()) throw ParseError("node must be an object");
  BehaviorNode n;
  if (!j.contains("id") || !j.at("id").is_number_integer()) throw ParseError("node is missing an integer id");
  n.id = NodeId{j.at("id").get<std::int64_t>()};
  if (!j.contains("kind") || !j.at("kind").is_string()) throw ParseError("node " + idText(n.id) + " is missing a kind");
  {
    const auto kindName = j.at("kind").get<std::string>();
    const NodeKind parsed = j.at("kind").get<NodeKind>();
    if (json(parsed).get<std::string>() != kindName)
      throw ParseError("unknown node kind '" + kindName + "' (node " + idText(n.id) + ")");
    n.kind = parsed;
  }
  if (const auto it = j.find("name"); it != j.end()) n.name = it->get<std::string>();
  try {
    n.parameters = parseParameters(n.kind, j.value("parameters", json::object()));
  } catch (const ParseError& e) {
    throw ParseError("node " + idText(n.id) + ": " + e.what());
  } catch (const json::exception& e) {
    throw ParseError("node " + idText(n.id) + ": " + e.what());
  }
  if (const auto it = j.find("executeAfterId"); it != j.end()) {
    if (!isAction(n.kind) && !it->is_null())
      throw ParseError("node " + idText(n.id) + ": only actions carry executeAfterId");
    if (!it->is_null()) {
      if (!it->is_number_integer()) throw ParseError("node " + idText(n.id) + ": executeAfterId must be an integer or null");
      n.executeAfterId = NodeId{it->get<std::int64_t>()};
    }
  } else if (isAction(n.kind) && unsetLinks) {
    unsetLinks->push_back(n.id);
  }
  if (const auto it = j.find("children"); it != j.end()) {
    if (!it->is_array()) throw ParseError("node " + idText(n.id) + ": children must be an array");
    for (const auto& c : *it) n.children.push_back(nodeFromJson(c, unsetLinks));
  }
  return n;
}

json nodeToJson(const BehaviorNode& n) {
  json j{{"id", toInt(n.id)}, {"kind", n.kind}, {"name", n.name}, {"parameters", serializeParameters(n.parameters)}};
  if (isAction(n.kind)) j["executeAfterId"] = n.executeAfterId ? json(toInt(*n.executeAfterId)) : json(nullptr);
  json children = json::array();
  for (const auto& c : n.children) children.push_back(nodeToJson(c));
  j["children"] = std::move(children);
  return j;
}

std::vector<const BehaviorNode*> executionScopes(const BehaviorNode& root) {
  std::vector<const BehaviorNode*> scopes;
  if (root.kind == NodeKind::DoorTraversalCoordinator) {
    for (const auto& c : root.children) scopes.push_back(&c);
  } else {
    scopes.push_back(&root);
  }
  return scopes;
}

std::vector<const BehaviorNode*> actionLeaves(const BehaviorNode& scope) {
  std::vector<const BehaviorNode*> out;
  collectLeaves(scope, out);
  return out;
}

void validateTree(const BehaviorNode& root) {
  std::unordered_set<std::int64_t> ids;
  std::unordered_set<std::int64_t> actionIds;
  forEachNode(root, [&](const BehaviorNode& n) {
    if (!ids.insert(toInt(n.id)).second) throw ParseError("duplicate node id " + idText(n.id));
    if (n.parameters.index() != static_cast<std::size_t>(n.kind))
      throw ParseError("node " + idText(n.id) + ": parameters do not match its kind");
    validate(n.parameters);
    if (isAction(n.kind)) {
      actionIds.insert(toInt(n.id));
      if (!n.children.empty()) throw ParseError("action node " + idText(n.id) + " cannot have children");
    } else if (n.executeAfterId) {
      throw ParseError("node " + idText(n.id) + ": only actions carry executeAfterId");
    }
    if (n.kind == NodeKind::DoorTraversalCoordinator && &n != &root)
      throw ParseError("coordinator node " + idText(n.id) + " must be the root");
  });

  if (root.kind == NodeKind::DoorTraversalCoordinator) {
    if (root.children.empty()) throw ParseError("coordinator needs at least one door subtree");
    std::set<std::pair<MechanismType, std::string>> tags;
    for (const auto& c : root.children) {
      if (c.kind != NodeKind::ActionSequence || !c.params<SequenceParams>().doorType)
        throw ParseError("coordinator child " + idText(c.id) + " must be a sequence tagged with a doorType");
      const auto& p = c.params<SequenceParams>();
      if (!tags.emplace(*p.doorType, p.strategy.value_or("")).second)
        throw ParseError("two subtrees share doorType " + json(*p.doorType).get<std::string>() +
                         (p.strategy ? " and strategy '" + *p.strategy + "'" : " without a strategy label"));
    }
  }

  for (const BehaviorNode* scope : executionScopes(root)) {
    const auto leaves = actionLeaves(*scope);
    std::unordered_map<std::int64_t, std::size_t> position;
    for (std::size_t i = 0; i < leaves.size(); ++i) position[toInt(leaves[i]->id)] = i;
    for (std::size_t i = 0; i < leaves.size(); ++i) {
      const auto& after = leaves[i]->executeAfterId;
      if (!after) continue;
      const auto it = position.find(toInt(*after));
      if (it == position.end()) {
        if (actionIds.count(toInt(*after)))
          throw ParseError("executeAfterId " + idText(*after) + " of node " + idText(leaves[i]->id) +
                           " refers to an action in another subtree");
        throw ParseError("executeAfterId " + idText(*after) + " of node " + idText(leaves[i]->id) +
                         " does not name an action");
      }
      if (it->second >= i)
        throw ParseError("executeAfterId " + idText(*after) + " of node " + idText(leaves[i]->id) +
                         " refers to a later action");
    }
    forEachNode(*scope, [&](const BehaviorNode& n) {
      if (n.kind != NodeKind::ActionSequence) return;
      const auto& retry = n.params<SequenceParams>().retryFromId;
      if (!retry) return;
      const auto inner = actionLeaves(n);
      if (std::none_of(inner.begin(), inner.end(), [&](const BehaviorNode* l) { return toInt(l->id) == *retry; }))
        throw ParseError("retryFromId " + std::to_string(*retry) + " of node " + idText(n.id) +
                         " does not name an action inside it");
    });
  }
}

void linkToPrevious(BehaviorNode& root, const std::vector<NodeId>& actions) {
  if (actions.empty()) return;
  std::unordered_set<std::int64_t> wanted;
  for (NodeId id : actions) wanted.insert(toInt(id));
  for (const BehaviorNode* scope : executionScopes(root)) {
    const auto leaves = actionLeaves(*scope);
    for (std::size_t i = 0; i < leaves.size(); ++i) {
      if (!wanted.count(toInt(leaves[i]->id))) continue;
      BehaviorNode* n = findNode(root, leaves[i]->id);
      n->executeAfterId = i == 0 ? std::nullopt : std::optional<NodeId>(leaves[i - 1]->id);
    }
  }
}

BehaviorNode loadTree(const json& document) {
  if (!document.is_object()) throw ParseError("behavior document must be an object");
  if (!document.contains("version")) throw ParseError("behavior document is missing 'version'");
  if (document.at("version") != kBehaviorFileVersion)
    throw ParseError("unsupported behavior document version " + document.at("version").dump());
  if (!document.contains("root")) throw ParseError("behavior document is missing 'root'");
  std::vector<NodeId> unset;
  BehaviorNode root = nodeFromJson(document.at("root"), &unset);
  // Ids are checked before link resolution so that lookups are unambiguous.
  std::unordered_set<std::int64_t> ids;
  forEachNode(root, [&](const BehaviorNode& n) {
    if (!ids.insert(toInt(n.id)).second) throw ParseError("duplicate node id " + idText(n.id));
  });
  linkToPrevious(root, unset);
  validateTree(root);
  return root;
}

BehaviorNode loadTreeFile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open behavior file " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  try {
    return loadTree(doc);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  } catch (const json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

json saveTree(const BehaviorNode& root) { return json{{"version", kBehaviorFileVersion}, {"root", nodeToJson(root)}}; }

std::string saveTreeString(const BehaviorNode& root) { return saveTree(root).dump(2) + "\n"; }

void saveTreeFile(const BehaviorNode& root, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write behavior file " + path.string());
  out << saveTreeString(root);
  if (!out) throw std::runtime_error("failed writing behavior file " + path.string());
}

const BehaviorNode* findNode(const BehaviorNode& root, NodeId id) {
  if (root.id == id) return &root;
  for (const auto& c : root.children)
    if (const auto* f = findNode(c, id)) return f;
  return nullptr;
}

BehaviorNode* findNode(BehaviorNode& root, NodeId id) {
  return const_cast<BehaviorNode*>(findNode(static_cast<const BehaviorNode&>(root), id));
}

const BehaviorNode* findParent(const BehaviorNode& root, NodeId id) {
  for (const auto& c : root.children) {
    if (c.id == id) return &root;
    if (const auto* f = findParent(c, id)) return f;
  }
  return nullptr;
}

std::size_t countNodes(const BehaviorNode& root) {
  std::size_t n = 0;
  forEachNode(root, [&](const BehaviorNode&) { ++n; });
  return n;
}

NodeId nextFreeId(const BehaviorNode& root) {
  std::int64_t maxId = 0;
  forEachNode(root, [&](const BehaviorNode& n) { maxId = std::max(maxId, toInt(n.id)); });
  return NodeId{maxId + 1};
}

void insertNode(BehaviorNode& root, NodeId parent, std::size_t index, BehaviorNode node) {
  BehaviorNode candidate = root;
  BehaviorNode* p = findNode(candidate, parent);
  if (!p) throw ParseError("parent node " + idText(parent) + " does not exist");
  if (isAction(p->kind)) throw ParseError("cannot add children to action node " + idText(parent));
  index = std::min(index, p->children.size());
  p->children.insert(p->children.begin() + static_cast<std::ptrdiff_t>(index), std::move(node));
  validateTree(candidate);
  root = std::move(candidate);
}

void removeNode(BehaviorNode& root, NodeId id) {
  if (root.id == id) throw ParseError("cannot remove the root node");
  BehaviorNode candidate = root;
  const BehaviorNode* parentConst = findParent(candidate, id);
  if (!parentConst) throw ParseError("node " + idText(id) + " does not exist");
  BehaviorNode* parent = const_cast<BehaviorNode*>(parentConst);

  std::unordered_map<std::int64_t, std::optional<NodeId>> removedLinks;
  forEachNode(*findNode(candidate, id), [&](const BehaviorNode& n) {
    if (isAction(n.kind)) removedLinks[toInt(n.id)] = n.executeAfterId;
  });
  parent->children.erase(std::find_if(parent->children.begin(), parent->children.end(),
                                      [&](const BehaviorNode& c) { return c.id == id; }));
  forEachNode(candidate, [&](BehaviorNode& n) {
    // Follow chains of removed dependencies to the first surviving one.
    while (n.executeAfterId) {
      const auto it = removedLinks.find(toInt(*n.executeAfterId));
      if (it == removedLinks.end()) break;
      n.executeAfterId = it->second;
    }
  });
  validateTree(candidate);
  root = std::move(candidate);
}

}  // namespace doorway
