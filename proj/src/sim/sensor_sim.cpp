#include "doorway/sim/sensor_sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "doorway/perception/pipeline.hpp"
#include "doorway/sim/world.hpp"

namespace doorway {

namespace {

constexpr double kWallThickness = 0.1;
constexpr double kWallExtent = 2.0;
constexpr double kWallHeight = 2.5;
constexpr double kPanelThickness = 0.04;
constexpr double kBoardThickness = 0.02;

Quat frameFromX(const Vec3& x) {
  Eigen::Matrix3d r;
  r.col(0) = x.normalized();
  r.col(2) = Vec3::UnitZ();
  r.col(1) = Vec3::UnitZ().cross(r.col(0));
  return Quat(r);
}

struct PreparedBox {
  Eigen::Matrix3d toLocal;
  Vec3 center;
  Vec3 halfExtents;
};

PreparedBox prepare(const Box& b) {
  return {b.pose.orientation.conjugate().toRotationMatrix(), b.pose.position, b.halfExtents};
}

std::optional<double> intersect(const PreparedBox& b, const Vec3& localOrigin, const Vec3& direction) {
  const Vec3& o = localOrigin;
  const Vec3 d = b.toLocal * direction;
  double tmin = -std::numeric_limits<double>::infinity();
  double tmax = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 3; ++i) {
    const double h = b.halfExtents[i];
    if (std::abs(d[i]) < 1e-15) {
      if (std::abs(o[i]) > h) return std::nullopt;
      continue;
    }
    double t0 = (-h - o[i]) / d[i];
    double t1 = (h - o[i]) / d[i];
    if (t0 > t1) std::swap(t0, t1);
    tmin = std::max(tmin, t0);
    tmax = std::min(tmax, t1);
    if (tmin > tmax) return std::nullopt;
  }
  if (tmin <= 1e-9) return std::nullopt;
  return tmin;
}

}  // namespace

Scene buildDoorScene(const Door& door, const std::vector<ClutterBoard>& clutter) {
  Scene scene;
  const DoorState& s = door.state();
  scene.mechanismType = s.mechanismType;
  const double halfW = s.frameWidth / 2.0;
  const double wallX = kWallThickness / 2.0;
  scene.boxes.push_back({{Pose::fromTranslation(Vec3(0.0, 0.0, -0.05)), Vec3(6.0, 6.0, 0.05)}, false});
  for (double sign : {1.0, -1.0})
    scene.boxes.push_back({{Pose::fromTranslation(Vec3(wallX, sign * (halfW + kWallExtent / 2.0), kWallHeight / 2.0)),
                            Vec3(wallX, kWallExtent / 2.0, kWallHeight / 2.0)},
                           false});
  const double headerZ = (door_geometry::kDoorHeight + kWallHeight) / 2.0;
  scene.boxes.push_back({{Pose::fromTranslation(Vec3(wallX, 0.0, headerZ)),
                          Vec3(wallX, halfW, (kWallHeight - door_geometry::kDoorHeight) / 2.0)},
                         false});

  const double phi = s.panelAngle;
  const Vec2 dir = door.panelDirection(phi);
  const Vec2 approach = door.approachNormal(phi);
  const Vec2 c = door.hinge() + dir * (s.panelWidth / 2.0) - approach * (kPanelThickness / 2.0);
  scene.boxes.push_back({{Pose{Vec3(c.x(), c.y(), door_geometry::kDoorHeight / 2.0),
                               frameFromX(Vec3(-approach.x(), -approach.y(), 0.0))},
                          Vec3(kPanelThickness / 2.0, s.panelWidth / 2.0, door_geometry::kDoorHeight / 2.0)},
                         false});

  for (const Box& b : door.mechanismBoxes()) scene.boxes.push_back({b, true});
  for (const ClutterBoard& b : clutter)
    scene.boxes.push_back({{Pose{b.center, yawQuat(b.facingYawRad)},
                            Vec3(kBoardThickness / 2.0, b.widthM / 2.0, b.heightM / 2.0)},
                           false});
  return scene;
}

namespace {

class PreparedScene {
 public:
  PreparedScene(const Scene& scene, const Vec3& origin) {
    for (const SceneBox& sb : scene.boxes) {
      boxes_.push_back(prepare(sb.box));
      origins_.push_back(boxes_.back().toLocal * (origin - boxes_.back().center));
    }
  }
  std::optional<RayHit> cast(const Vec3& direction) const {
    std::optional<RayHit> best;
    for (std::size_t i = 0; i < boxes_.size(); ++i) {
      const auto t = intersect(boxes_[i], origins_[i], direction);
      if (t && (!best || *t < best->t)) best = RayHit{*t, static_cast<int>(i)};
    }
    return best;
  }

 private:
  std::vector<PreparedBox> boxes_;
  std::vector<Vec3> origins_;
};

}  // namespace

std::optional<RayHit> castRay(const Scene& scene, const Vec3& origin, const Vec3& direction) {
  return PreparedScene(scene, origin).cast(direction);
}

SyntheticSensor::SyntheticSensor(SensorConfig config, std::uint64_t seed, RenderOptions options)
    : config_(std::move(config)),
      options_(options),
      intrinsics_(Intrinsics::fromFov(config_.width, config_.height, config_.horizontalFovDeg * M_PI / 180.0,
                                      config_.verticalFovDeg * M_PI / 180.0)),
      rng_(seed) {}

SensorFrame SyntheticSensor::capture(const SimWorld& world) {
  return capture(buildDoorScene(world.door(), world.scenario().clutter), world.cameraPose(), world.time());
}

SensorFrame SyntheticSensor::capture(const Scene& scene, const Pose& cameraPose, double timestamp) {
  const Intrinsics& k = intrinsics_;
  SensorFrame frame;
  frame.timestamp = timestamp;
  frame.intrinsics = k;
  frame.cameraPose = cameraPose;
  frame.depth = DepthImage(k.width, k.height);
  std::normal_distribution<double> depthNoise(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double sigma = config_.noise.depthSigmaM;

  const PreparedScene prepared(scene, cameraPose.position);
  const Eigen::Matrix3d cameraRotation = cameraPose.orientation.toRotationMatrix();
  auto render = [&](int u, int v) -> int {
    const auto hit = prepared.cast(cameraRotation * k.ray(u, v));
    if (!hit) return -1;
    double z = hit->t;
    if (sigma > 0.0) z += sigma * depthNoise(rng_);
    frame.depth.at(u, v) = static_cast<float>(std::max(z, 1e-3));
    return hit->box;
  };

  // Region of interest: projected mechanism corners plus a margin.
  int u0 = 0, v0 = 0, u1 = -1, v1 = -1;
  bool roi = false;
  {
    const Pose toCamera = inverse(cameraPose);
    double minU = 1e18, minV = 1e18, maxU = -1e18, maxV = -1e18;
    bool usable = false;
    for (const SceneBox& sb : scene.boxes) {
      if (!sb.mechanism) continue;
      usable = true;
      for (int corner = 0; corner < 8; ++corner) {
        const Vec3 local((corner & 1 ? 1 : -1) * sb.box.halfExtents.x(), (corner & 2 ? 1 : -1) * sb.box.halfExtents.y(),
                         (corner & 4 ? 1 : -1) * sb.box.halfExtents.z());
        const Vec3 p = toCamera.transformPoint(sb.box.pose.transformPoint(local));
        if (p.x() < 0.05) {
          usable = false;
          break;
        }
        const Eigen::Vector2d px = k.project(p);
        minU = std::min(minU, px.x()), maxU = std::max(maxU, px.x());
        minV = std::min(minV, px.y()), maxV = std::max(maxV, px.y());
      }
      if (!usable) break;
    }
    if (usable) {
      u0 = std::max(0, static_cast<int>(std::floor(minU)) - options_.roiMargin);
      v0 = std::max(0, static_cast<int>(std::floor(minV)) - options_.roiMargin);
      u1 = std::min(k.width - 1, static_cast<int>(std::ceil(maxU)) + options_.roiMargin);
      v1 = std::min(k.height - 1, static_cast<int>(std::ceil(maxV)) + options_.roiMargin);
      roi = u0 <= u1 && v0 <= v1;
    }
  }

  Mask silhouette(k.width, k.height);
  std::size_t silhouettePixels = 0;
  if (roi) {
    for (int v = v0; v <= v1; ++v)
      for (int u = u0; u <= u1; ++u) {
        const int box = render(u, v);
        if (box >= 0 && scene.boxes[static_cast<std::size_t>(box)].mechanism) {
          silhouette.set(u, v, true);
          ++silhouettePixels;
        }
      }
  }
  const int stride = std::max(1, options_.gridStride);
  for (int v = 0; v < k.height; v += stride)
    for (int u = 0; u < k.width; u += stride)
      if (!(roi && u >= u0 && u <= u1 && v >= v0 && v <= v1)) render(u, v);

  const bool missed = unit(rng_) < config_.noise.missProbability;
  if (silhouettePixels == 0 || missed) return frame;
  Mask mask = dilateMask(silhouette, options_.maskDilation);
  if (config_.noise.maskFlipProbability > 0.0)
    for (int v = v0; v <= v1; ++v)
      for (int u = u0; u <= u1; ++u)
        if (unit(rng_) < config_.noise.maskFlipProbability) mask.set(u, v, !mask.at(u, v));
  frame.masks.push_back({scene.mechanismType, std::move(mask)});
  return frame;
}

}  // namespace doorway
