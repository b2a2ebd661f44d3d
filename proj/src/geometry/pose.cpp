#include "doorway/geometry/pose.hpp"

#include <cmath>
#include <numbers>

namespace doorway {

Pose Pose::fromXyYaw(double x, double y, double yaw, double z) {
  return {Vec3(x, y, z), yawQuat(yaw)};
}

double Pose::yaw() const {
  const Vec3 x = orientation * Vec3::UnitX();
  return std::atan2(x.y(), x.x());
}

Eigen::Matrix4d Pose::matrix() const {
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m.topLeftCorner<3, 3>() = orientation.toRotationMatrix();
  m.topRightCorner<3, 1>() = position;
  return m;
}

Pose compose(const Pose& a, const Pose& b) {
  return {a.position + a.orientation * b.position, (a.orientation * b.orientation).normalized()};
}

Pose inverse(const Pose& p) {
  const Quat qi = p.orientation.conjugate();
  return {-(qi * p.position), qi};
}

Pose relative(const Pose& a, const Pose& b) { return compose(inverse(a), b); }

double rotationAngle(const Quat& q) {
  // atan2 form stays accurate near zero where acos(w) does not.
  const double v = q.vec().norm();
  return 2.0 * std::atan2(v, std::abs(q.w()));
}

double angleBetween(const Quat& a, const Quat& b) { return rotationAngle(a.conjugate() * b); }

double wrapAngle(double a) {
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  a = std::fmod(a + std::numbers::pi, kTwoPi);
  if (a < 0) a += kTwoPi;
  return a - std::numbers::pi;
}

Vec3 rotationError(const Quat& from, const Quat& to) {
  Quat d = (to * from.conjugate()).normalized();
  if (d.w() < 0) d.coeffs() = -d.coeffs();
  const double v = d.vec().norm();
  if (v < 1e-12) return 2.0 * d.vec();
  const double angle = 2.0 * std::atan2(v, d.w());
  return d.vec() / v * angle;
}

Pose interpolate(const Pose& a, const Pose& b, double s) {
  return {a.position + s * (b.position - a.position), a.orientation.slerp(s, b.orientation).normalized()};
}

Quat yawQuat(double yaw) { return Quat(Eigen::AngleAxisd(yaw, Vec3::UnitZ())); }

void to_json(nlohmann::json& j, const Pose& p) {
  const Quat& q = p.orientation;
  j = nlohmann::json{{"position", {p.position.x(), p.position.y(), p.position.z()}},
                     {"orientationQuaternion", {q.x(), q.y(), q.z(), q.w()}}};
}

void from_json(const nlohmann::json& j, Pose& p) {
  const auto& pos = j.at("position");
  const auto& q = j.at("orientationQuaternion");
  if (pos.size() != 3 || q.size() != 4) throw nlohmann::json::other_error::create(501, "pose arrays must have 3 and 4 entries", &j);
  p.position = Vec3(pos[0].get<double>(), pos[1].get<double>(), pos[2].get<double>());
  p.orientation = Quat(q[3].get<double>(), q[0].get<double>(), q[1].get<double>(), q[2].get<double>());
  const double n = p.orientation.norm();
  if (n < 1e-9) throw nlohmann::json::other_error::create(501, "zero quaternion", &j);
  if (std::abs(n - 1.0) > 1e-12) p.orientation.normalize();
}

}  // namespace doorway

namespace Eigen {
void to_json(nlohmann::json& j, const Vector3d& v) { j = nlohmann::json{v.x(), v.y(), v.z()}; }
void from_json(const nlohmann::json& j, Vector3d& v) {
  if (!j.is_array() || j.size() != 3) throw nlohmann::json::other_error::create(501, "expected 3-vector", &j);
  v = Vector3d(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}
}  // namespace Eigen
