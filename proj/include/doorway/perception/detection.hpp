#pragma once

#include <cstddef>
#include <vector>

#include "doorway/common.hpp"
#include "doorway/geometry/pose.hpp"

namespace doorway {

/// Sliding window of per-frame hit flags. A detection is stable when the hit
/// fraction over the full window reaches the threshold; frames not yet seen
/// count as misses.
class StabilityWindow {
 public:
  explicit StabilityWindow(std::size_t windowSize = 30, double threshold = 0.6);

  void push(bool hit);
  void clear();

  std::size_t hits() const { return hits_; }
  std::size_t windowSize() const { return ring_.size(); }
  std::size_t requiredHits() const { return required_; }
  bool stable() const { return hits_ >= required_; }

  /// Flags currently in the window, oldest first.
  std::vector<bool> pattern() const;

 private:
  std::vector<bool> ring_;
  std::size_t head_ = 0;
  std::size_t filled_ = 0;
  std::size_t hits_ = 0;
  std::size_t required_;
};

struct MechanismDetection {
  MechanismType type = MechanismType::LeverHandle;
  bool initialized = false;  ///< filter has received a measurement
  Vec3 rawCentroid = Vec3::Zero();
  Vec3 filteredCentroid = Vec3::Zero();
  Vec3 planeNormal = Vec3::UnitX();  ///< camera-facing normal of the associated plane
  bool hasPlane = false;
  StabilityWindow window;

  bool stable() const { return window.stable(); }
};

}  // namespace doorway
