#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "doorway/perception/sensor_frame.hpp"
#include "doorway/sim/door.hpp"
#include "doorway/sim/scenario.hpp"

namespace doorway {

class SimWorld;

struct SceneBox {
  Box box;
  bool mechanism = false;
};

/// Static box geometry seen by the synthetic camera.
struct Scene {
  std::vector<SceneBox> boxes;
  MechanismType mechanismType = MechanismType::LeverHandle;
};

/// Floor, wall with the door opening, panel, mechanism and clutter boards.
Scene buildDoorScene(const Door& door, const std::vector<ClutterBoard>& clutter);

struct RayHit {
  double t = 0.0;
  int box = -1;
};

/// Nearest box hit along origin + t·direction, t > 0.
std::optional<RayHit> castRay(const Scene& scene, const Vec3& origin, const Vec3& direction);

struct RenderOptions {
  /// Depth is rendered on this pixel grid everywhere and at every pixel around the mechanism.
  int gridStride = 3;
  int roiMargin = 6;
  /// The synthetic segmenter returns the silhouette grown by this many pixels.
  int maskDilation = 2;
};

/// Synthetic depth camera with a segmentation source standing in for a learned detector.
class SyntheticSensor {
 public:
  SyntheticSensor(SensorConfig config, std::uint64_t seed, RenderOptions options = {});

  const Intrinsics& intrinsics() const { return intrinsics_; }
  const SensorConfig& config() const { return config_; }

  SensorFrame capture(const Scene& scene, const Pose& cameraPose, double timestamp);
  SensorFrame capture(const SimWorld& world);

 private:
  SensorConfig config_;
  RenderOptions options_;
  Intrinsics intrinsics_;
  std::mt19937_64 rng_;
};

}  // namespace doorway
