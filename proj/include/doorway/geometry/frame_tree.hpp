#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "doorway/geometry/pose.hpp"

namespace doorway {

/// Integer handle into one FrameTree. Carries the owning tree's id so that
/// mixing handles from different trees is caught.
struct FrameId {
  std::uint32_t tree = 0;
  std::uint32_t index = 0;
  friend bool operator==(const FrameId&, const FrameId&) = default;
};

class FrameError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Mutable tree of named frames rooted at "world".
class FrameTree {
 public:
  static constexpr std::string_view kWorld = "world";

  FrameTree();

  FrameId world() const { return {id_, 0}; }

  /// Adds a frame, or re-parents and updates an existing one of the same name.
  FrameId addFrame(std::string name, FrameId parent, const Pose& transformToParent);
  FrameId addFrame(std::string name, const Pose& transformToWorld) {
    return addFrame(std::move(name), world(), transformToWorld);
  }

  void updateFrame(FrameId frame, const Pose& newTransformToParent);

  std::optional<FrameId> find(std::string_view name) const;
  FrameId at(std::string_view name) const;
  bool contains(std::string_view name) const { return find(name).has_value(); }

  const std::string& name(FrameId f) const { return node(f).name; }
  FrameId parent(FrameId f) const;
  const Pose& transformToParent(FrameId f) const { return node(f).toParent; }

  Pose worldPose(FrameId f) const;
  Pose worldPose(std::string_view name) const { return worldPose(at(name)); }

  /// Pose of `from` expressed in `to`.
  Pose transformBetween(FrameId from, FrameId to) const;

  std::size_t size() const { return nodes_.size(); }
  std::vector<std::string> names() const;

 private:
  struct Node {
    std::string name;
    std::uint32_t parent;
    Pose toParent;
    std::uint32_t depth;
  };

  const Node& node(FrameId f) const;
  void check(FrameId f) const;

  std::uint32_t id_;
  std::vector<Node> nodes_;
  std::unordered_map<std::string, std::uint32_t> byName_;
};

}  // namespace doorway
