#include "doorway/sim/door.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace doorway {

using namespace door_geometry;

namespace {
Vec3 lift(const Vec2& v, double z = 0.0) { return {v.x(), v.y(), z}; }
}  // namespace

Door::Door(const DoorConfig& c) : handleHeight_(c.handleHeightM) {
  state_.hingeSide = c.hingeSide;
  state_.swingDirection = c.swingDirection;
  state_.mechanismType = c.mechanismType;
  state_.springCloserRate = c.springCloserRateRadS;
  state_.frameWidth = c.frameWidthM;
  state_.panelWidth = c.panelWidthM;
  state_.maxOpenAngle = c.maxOpenAngleRad;
  state_.hingeWorldPose = Pose::fromTranslation(Vec3(0.0, lateralSign(c.hingeSide) * c.frameWidthM / 2.0, 0.0));
  // Hands-free pull handles have no latch.
  state_.latched = c.unlatched ? !*c.unlatched : c.mechanismType != MechanismType::PullHandle;
  swingSign_ = c.swingDirection == SwingDirection::Push ? 1.0 : -1.0;
  closedDirection_ = Vec2(0.0, -lateralSign(c.hingeSide));
}

Vec2 Door::panelDirection(double phi) const {
  return std::cos(phi) * closedDirection_ + std::sin(phi) * Vec2(swingSign_, 0.0);
}

Vec2 Door::swingNormal(double phi) const {
  return -std::sin(phi) * closedDirection_ + std::cos(phi) * Vec2(swingSign_, 0.0);
}

Vec2 Door::approachNormal(double phi) const { return -swingSign_ * swingNormal(phi); }

double Door::polarAngle(const Vec2& p) const {
  const Vec2 v = p - hinge();
  return std::atan2(v.dot(Vec2(swingSign_, 0.0)), v.dot(closedDirection_));
}

Vec3 Door::hub(double phi, double /*theta*/) const {
  const double L = state_.panelWidth;
  double s = L - kPivotInsetFromTip;
  double proud = kHandleProud - kHandleDepth / 2.0;
  switch (state_.mechanismType) {
    case MechanismType::LeverHandle:
    case MechanismType::Knob:
      break;
    case MechanismType::PushBar:
      s = L - kBarTipInset - kBarLength / 2.0;
      proud = kBarProud - state_.pushBarDepression - kBarDepth / 2.0;
      break;
    case MechanismType::PullHandle:
      s = L - kPullGripInset;
      break;
  }
  return lift(hinge() + s * panelDirection(phi) + proud * approachNormal(phi), handleHeight_);
}

Vec3 Door::handleAxis(double phi) const {
  const Vec3 leverDir = lift(-panelDirection(phi));
  return leverDir.cross(-Vec3::UnitZ()).normalized();
}

Pose Door::handlePose(double phi, double theta) const {
  Eigen::Matrix3d r;
  const Vec3 x = lift(-approachNormal(phi));
  r.col(0) = x;
  r.col(2) = Vec3::UnitZ();
  r.col(1) = Vec3::UnitZ().cross(x);
  const Quat base(r);
  return {hub(phi, theta), (Quat(Eigen::AngleAxisd(theta, handleAxis(phi))) * base).normalized()};
}

Vec3 Door::gripPoint() const {
  const double phi = state_.panelAngle;
  const double theta = state_.handleAngle;
  switch (state_.mechanismType) {
    case MechanismType::LeverHandle: {
      const Vec3 leverDir = lift(-panelDirection(phi));
      return hub(phi) + Eigen::AngleAxisd(theta, handleAxis(phi)) * (leverDir * (kLeverLength / 2.0));
    }
    case MechanismType::PushBar:
      return hub(phi) + lift(approachNormal(phi)) * (kBarDepth / 2.0);
    case MechanismType::Knob:
    case MechanismType::PullHandle:
      return hub(phi);
  }
  return hub(phi);
}

Vec3 Door::referencePoint() const {
  if (state_.mechanismType == MechanismType::PushBar) return gripPoint();
  return gripPoint() + lift(approachNormal(state_.panelAngle)) * (kHandleDepth / 2.0);
}

Pose Door::mechanismFrameTruth() const {
  Pose p = handlePose(state_.panelAngle, 0.0);
  p.position = referencePoint();
  return p;
}

std::vector<Box> Door::mechanismBoxes() const {
  const double phi = state_.panelAngle;
  const Pose pose = handlePose(phi, state_.handleAngle);
  switch (state_.mechanismType) {
    case MechanismType::LeverHandle:
      return {{{gripPoint(), pose.orientation}, Vec3(kHandleDepth / 2.0, kLeverLength / 2.0, kHandleDepth / 2.0)}};
    case MechanismType::Knob:
      return {{pose, Vec3(kHandleDepth / 2.0, kKnobSize / 2.0, kKnobSize / 2.0)}};
    case MechanismType::PushBar:
      return {{pose, Vec3(kBarDepth / 2.0, kBarLength / 2.0, kBarHeight / 2.0)}};
    case MechanismType::PullHandle:
      return {{pose, Vec3(kHandleDepth / 2.0, kPullGripWidth / 2.0, kPullGripHeight / 2.0)}};
  }
  return {};
}

double Door::handleAngleFromTarget(const Pose& target, double phi) const {
  const Quat base = handlePose(phi, 0.0).orientation;
  const Quat rel = (target.orientation * base.conjugate()).normalized();
  const Vec3 u = handleAxis(phi);
  // Twist of rel about u.
  return wrapAngle(2.0 * std::atan2(rel.vec().dot(u), rel.w()));
}

std::optional<double> Door::pushBarPenetration(const ContactSphere& hand) const {
  if (state_.mechanismType != MechanismType::PushBar) return std::nullopt;
  const double phi = state_.panelAngle;
  const Vec2 v = hand.center.head<2>() - hinge();
  const double s = v.dot(panelDirection(phi));
  const double d = v.dot(approachNormal(phi));
  const double sCenter = state_.panelWidth - kBarTipInset - kBarLength / 2.0;
  if (std::abs(s - sCenter) > kBarLength / 2.0) return std::nullopt;
  if (std::abs(hand.center.z() - handleHeight_) > kBarHeight / 2.0 + hand.radius) return std::nullopt;
  if (d < -hand.radius) return std::nullopt;
  return kBarProud + hand.radius - d;
}

double Door::applyContacts(double phi, const std::vector<ContactSphere>& spheres) {
  double lower = -std::numeric_limits<double>::infinity();
  double upper = std::numeric_limits<double>::infinity();
  const double L = state_.panelWidth;
  for (const auto& sphere : spheres) {
    int& side = sideMemory_.at(static_cast<std::size_t>(sphere.id));
    double r = sphere.radius;
    // A hand on the bar pushes through the fully depressed bar.
    if (sphere.isHand && pushBarPenetration(sphere)) r += kBarProud - kBarTravel;
    const Vec2 p = sphere.center.head<2>();
    const double rho = (p - hinge()).norm();
    if (rho > L + r || rho <= r) {
      side = 0;
      continue;
    }
    const double psi = polarAngle(p);
    if (side == 0) side = psi >= state_.panelAngle ? 1 : -1;
    const double delta = std::asin(std::min(1.0, r / rho));
    if (side < 0)
      lower = std::max(lower, psi + delta);
    else
      upper = std::min(upper, psi - delta);
  }
  phi = std::max(phi, lower);
  return std::min(phi, upper);
}

void Door::step(double dt, const DoorInputs& in) {
  const MechanismType m = state_.mechanismType;
  const bool welded = in.weldedHandleTarget.has_value();
  const bool turns = m == MechanismType::LeverHandle || m == MechanismType::Knob;

  double theta = 0.0;
  if (welded && turns) {
    theta = handleAngleFromTarget(*in.weldedHandleTarget, state_.panelAngle);
    theta = std::clamp(theta, m == MechanismType::Knob ? -kMaxLeverAngle : 0.0, kMaxLeverAngle);
  }
  state_.handleAngle = theta;

  if (m == MechanismType::PushBar) {
    double depression = 0.0;
    for (const auto& s : in.spheres)
      if (s.isHand)
        if (const auto pen = pushBarPenetration(s)) depression = std::max(depression, std::clamp(*pen, 0.0, kBarTravel));
    state_.pushBarDepression = depression;
  }

  if (state_.latched) {
    const bool turned = turns && std::abs(theta) >= kUnlatchAngle;
    const bool pressed = m == MechanismType::PushBar && state_.pushBarDepression >= kBarUnlatchDepth - 1e-12;
    if (turned || pressed) state_.latched = false;
  }

  double phi = 0.0;
  if (!state_.latched) {
    if (welded) {
      const double hubOffset = polarAngle(hub(0.0).head<2>());
      phi = polarAngle(in.weldedHandleTarget->position.head<2>()) - hubOffset;
    } else {
      phi = state_.panelAngle - state_.springCloserRate * dt;
    }
    phi = applyContacts(phi, in.spheres);
    phi = std::clamp(phi, 0.0, state_.maxOpenAngle);
    if (phi > 1e-9) wasOpened_ = true;
    const bool released = !welded && theta == 0.0 && state_.pushBarDepression == 0.0;
    if (phi == 0.0 && wasOpened_ && released && m != MechanismType::PullHandle) {
      state_.latched = true;
      wasOpened_ = false;
    }
  }
  state_.panelAngle = phi;
}

}  // namespace doorway
