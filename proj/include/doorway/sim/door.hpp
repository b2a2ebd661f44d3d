#pragma once

#include <array>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "doorway/geometry/pose.hpp"
#include "doorway/sim/scenario.hpp"

namespace doorway {

using Vec2 = Eigen::Vector2d;

struct DoorState {
  Side hingeSide = Side::Right;
  SwingDirection swingDirection = SwingDirection::Push;
  MechanismType mechanismType = MechanismType::LeverHandle;
  double panelAngle = 0.0;   ///< 0 closed, grows toward the swing side
  double handleAngle = 0.0;  ///< lever/knob rotation about the handle axis
  double pushBarDepression = 0.0;
  bool latched = true;
  double springCloserRate = 0.0;
  double frameWidth = 1.0;
  double panelWidth = 0.98;
  double maxOpenAngle = 1.75;
  Pose hingeWorldPose;
};

/// Oriented box: pose of the center and half extents along its local axes.
struct Box {
  Pose pose;
  Vec3 halfExtents = Vec3::Zero();
};

/// Sphere that can block the panel in plan view. `id` keys the remembered side.
struct ContactSphere {
  int id = 0;
  Vec3 center = Vec3::Zero();
  double radius = 0.05;
  bool isHand = false;  ///< hands depress the push bar and push through it
};

struct DoorInputs {
  /// Handle pose implied by the welded hand's commanded pose, if a hand is welded.
  std::optional<Pose> weldedHandleTarget;
  /// Excludes the welded hand.
  std::vector<ContactSphere> spheres;
};

namespace door_geometry {
inline constexpr double kUnlatchAngle = 0.52;       ///< lever/knob, rad
inline constexpr double kBarUnlatchDepth = 0.02;    ///< push bar, m
inline constexpr double kBarTravel = 0.03;
inline constexpr double kMaxLeverAngle = 1.0;
inline constexpr double kPivotInsetFromTip = 0.07;
inline constexpr double kLeverLength = 0.12;
inline constexpr double kHandleDepth = 0.02;        ///< lever, knob rose, pull grip
inline constexpr double kHandleProud = 0.06;        ///< front face distance from the panel face
inline constexpr double kKnobSize = 0.06;
inline constexpr double kBarLength = 0.6;
inline constexpr double kBarHeight = 0.04;
inline constexpr double kBarDepth = 0.03;
inline constexpr double kBarProud = 0.05;
inline constexpr double kBarTipInset = 0.05;
inline constexpr double kPullGripHeight = 0.25;
inline constexpr double kPullGripWidth = 0.03;
inline constexpr double kPullGripInset = 0.08;
inline constexpr double kDoorHeight = 2.1;
}  // namespace door_geometry

/// Hinged door in the plane x = 0; the robot approaches from -x.
class Door {
 public:
  explicit Door(const DoorConfig& config);

  const DoorState& state() const { return state_; }

  Vec2 hinge() const { return state_.hingeWorldPose.position.head<2>(); }
  /// Unit vector from the hinge to the panel tip.
  Vec2 panelDirection(double phi) const;
  /// Unit panel normal pointing to the side the panel swings toward.
  Vec2 swingNormal(double phi) const;
  /// Unit panel normal pointing to the side the robot starts on.
  Vec2 approachNormal(double phi) const;
  /// Angle of a plan point about the hinge, measured like the panel angle.
  double polarAngle(const Vec2& p) const;

  /// Hub of the mechanism: lever pivot, knob center, bar or grip center.
  Vec3 hub(double phi, double theta = 0.0) const;
  /// Rotation axis of lever and knob; turning positive moves a lever grip down.
  Vec3 handleAxis(double phi) const;
  /// Handle frame: X into the door, Z up at theta = 0, rotated by theta about the handle axis.
  Pose handlePose(double phi, double theta) const;
  Pose handlePose() const { return handlePose(state_.panelAngle, state_.handleAngle); }
  /// Where a hand grasps or presses.
  Vec3 gripPoint() const;
  /// Center of the camera-facing surface of the mechanism.
  Vec3 referencePoint() const;
  /// Ground-truth mechanism frame: reference point, X into the door, Z up.
  Pose mechanismFrameTruth() const;

  /// Visible mechanism geometry.
  std::vector<Box> mechanismBoxes() const;

  /// One tick: handle projection, unlatch check, then hinge angle with
  /// spring closure and contact clamps.
  void step(double dt, const DoorInputs& inputs);

  /// Distance from the hand center to the front face of the push bar region, or none if outside it.
  std::optional<double> pushBarPenetration(const ContactSphere& hand) const;

 private:
  double handleAngleFromTarget(const Pose& target, double phi) const;
  double applyContacts(double phi, const std::vector<ContactSphere>& spheres);

  DoorState state_;
  double swingSign_;
  Vec2 closedDirection_;
  double handleHeight_;
  bool wasOpened_ = false;
  std::array<int, 8> sideMemory_{};  ///< +1 swing side, -1 approach side, 0 unknown
};

}  // namespace doorway
