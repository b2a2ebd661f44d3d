#include "doorway/geometry/frame_tree.hpp"

#include <atomic>

namespace doorway {

namespace {
std::atomic<std::uint32_t> nextTreeId{1};
}

FrameTree::FrameTree() : id_(nextTreeId++) {
  nodes_.push_back({std::string(kWorld), 0, Pose::identity(), 0});
  byName_.emplace(std::string(kWorld), 0);
}

void FrameTree::check(FrameId f) const {
  if (f.tree != id_) throw FrameError("frame handle belongs to a different frame tree");
  if (f.index >= nodes_.size()) throw FrameError("frame handle out of range");
}

const FrameTree::Node& FrameTree::node(FrameId f) const {
  check(f);
  return nodes_[f.index];
}

FrameId FrameTree::addFrame(std::string name, FrameId parent, const Pose& transformToParent) {
  check(parent);
  if (auto it = byName_.find(name); it != byName_.end()) {
    if (it->second == 0) throw FrameError("cannot redefine the world frame");
    if (nodes_[it->second].parent != parent.index)
      throw FrameError("frame '" + name + "' already exists under a different parent");
    nodes_[it->second].toParent = transformToParent;
    return {id_, it->second};
  }
  const auto index = static_cast<std::uint32_t>(nodes_.size());
  nodes_.push_back({name, parent.index, transformToParent, nodes_[parent.index].depth + 1});
  byName_.emplace(std::move(name), index);
  return {id_, index};
}

void FrameTree::updateFrame(FrameId frame, const Pose& newTransformToParent) {
  check(frame);
  if (frame.index == 0) throw FrameError("the world frame cannot be moved");
  nodes_[frame.index].toParent = newTransformToParent;
}

std::optional<FrameId> FrameTree::find(std::string_view name) const {
  auto it = byName_.find(std::string(name));
  if (it == byName_.end()) return std::nullopt;
  return FrameId{id_, it->second};
}

FrameId FrameTree::at(std::string_view name) const {
  if (auto f = find(name)) return *f;
  throw FrameError("unknown frame '" + std::string(name) + "'");
}

FrameId FrameTree::parent(FrameId f) const { return {id_, node(f).parent}; }

Pose FrameTree::worldPose(FrameId f) const {
  check(f);
  Pose result = Pose::identity();
  std::uint32_t i = f.index;
  while (i != 0) {
    result = compose(nodes_[i].toParent, result);
    i = nodes_[i].parent;
  }
  return result;
}

Pose FrameTree::transformBetween(FrameId from, FrameId to) const {
  check(from);
  check(to);
  // Walk both frames up to their common ancestor, accumulating each side.
  std::uint32_t a = from.index, b = to.index;
  Pose aToAncestor = Pose::identity(), bToAncestor = Pose::identity();
  while (nodes_[a].depth > nodes_[b].depth) {
    aToAncestor = compose(nodes_[a].toParent, aToAncestor);
    a = nodes_[a].parent;
  }
  while (nodes_[b].depth > nodes_[a].depth) {
    bToAncestor = compose(nodes_[b].toParent, bToAncestor);
    b = nodes_[b].parent;
  }
  while (a != b) {
    aToAncestor = compose(nodes_[a].toParent, aToAncestor);
    bToAncestor = compose(nodes_[b].toParent, bToAncestor);
    a = nodes_[a].parent;
    b = nodes_[b].parent;
  }
  return compose(inverse(bToAncestor), aToAncestor);
}

std::vector<std::string> FrameTree::names() const {
  std::vector<std::string> out;
  out.reserve(nodes_.size());
  for (const auto& n : nodes_) out.push_back(n.name);
  return out;
}

}  // namespace doorway
