#pragma once

#include <cstdint>
#include <vector>

#include "doorway/common.hpp"
#include "doorway/geometry/pose.hpp"

namespace doorway {

/// Pinhole model. Camera frame: X along the optical axis, Y left, Z up.
struct Intrinsics {
  int width = 0;
  int height = 0;
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.0;
  double cy = 0.0;

  static Intrinsics fromFov(int width, int height, double horizontalFovRad, double verticalFovRad);

  /// Ray through pixel (u, v) scaled to unit depth along the optical axis.
  Vec3 ray(double u, double v) const { return {1.0, -(u - cx) / fx, -(v - cy) / fy}; }
  Vec3 deproject(double u, double v, double depth) const { return depth * ray(u, v); }
  /// Pixel coordinates of a camera-frame point in front of the camera.
  Eigen::Vector2d project(const Vec3& p) const { return {cx - fx * p.y() / p.x(), cy - fy * p.z() / p.x()}; }
};

/// Depth along the optical axis in meters; 0 marks an invalid pixel.
struct DepthImage {
  int width = 0;
  int height = 0;
  std::vector<float> data;

  DepthImage() = default;
  DepthImage(int w, int h) : width(w), height(h), data(static_cast<std::size_t>(w) * h, 0.0f) {}
  float at(int u, int v) const { return data[static_cast<std::size_t>(v) * width + u]; }
  float& at(int u, int v) { return data[static_cast<std::size_t>(v) * width + u]; }
  bool valid(int u, int v) const { return at(u, v) > 0.0f; }
};

struct Mask {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> data;

  Mask() = default;
  Mask(int w, int h) : width(w), height(h), data(static_cast<std::size_t>(w) * h, 0) {}
  bool at(int u, int v) const { return data[static_cast<std::size_t>(v) * width + u] != 0; }
  void set(int u, int v, bool value) { data[static_cast<std::size_t>(v) * width + u] = value ? 1 : 0; }
  std::size_t count() const;
  friend bool operator==(const Mask&, const Mask&) = default;
};

struct ClassMask {
  MechanismType type = MechanismType::LeverHandle;
  Mask mask;
};

/// One synthetic RGB-D frame. A class absent from `masks` was not detected.
struct SensorFrame {
  double timestamp = 0.0;
  DepthImage depth;
  std::vector<ClassMask> masks;
  Intrinsics intrinsics;
  Pose cameraPose;
};

}  // namespace doorway
