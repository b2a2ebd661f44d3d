#pragma once

#include <Eigen/Geometry>
#include <nlohmann/json.hpp>

namespace doorway {

using Vec3 = Eigen::Vector3d;
using Quat = Eigen::Quaterniond;

/// Rigid transform. Right-handed, Z-up, SI units, radians.
struct Pose {
  Vec3 position = Vec3::Zero();
  Quat orientation = Quat::Identity();

  static Pose identity() { return {}; }
  static Pose fromTranslation(const Vec3& t) { return {t, Quat::Identity()}; }
  static Pose fromXyYaw(double x, double y, double yaw, double z = 0.0);

  Vec3 transformPoint(const Vec3& p) const { return position + orientation * p; }
  Vec3 rotateVector(const Vec3& v) const { return orientation * v; }

  /// Heading of the local X axis projected onto the ground plane.
  double yaw() const;
  Eigen::Matrix4d matrix() const;

  /// Exact component equality, used for persistence round-trips.
  friend bool operator==(const Pose& a, const Pose& b) {
    return a.position == b.position && a.orientation.coeffs() == b.orientation.coeffs();
  }
};

/// Applies b first, then a.
Pose compose(const Pose& a, const Pose& b);
Pose inverse(const Pose& p);

/// Relative pose of b expressed in a: inverse(a) * b.
Pose relative(const Pose& a, const Pose& b);

double rotationAngle(const Quat& q);
double angleBetween(const Quat& a, const Quat& b);
double wrapAngle(double a);

/// Rotation vector (axis * angle) taking `from` to `to` in the world frame.
Vec3 rotationError(const Quat& from, const Quat& to);

/// Linear position, slerp orientation, s in [0, 1].
Pose interpolate(const Pose& a, const Pose& b, double s);

Quat yawQuat(double yaw);

void to_json(nlohmann::json& j, const Pose& p);
void from_json(const nlohmann::json& j, Pose& p);

}  // namespace doorway

namespace Eigen {
void to_json(nlohmann::json& j, const Vector3d& v);
void from_json(const nlohmann::json& j, Vector3d& v);
}  // namespace Eigen
