#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "doorway/actions/arm_kinematics.hpp"
#include "doorway/actions/screw.hpp"
#include "doorway/geometry/frame_tree.hpp"
#include "doorway/model/parameters.hpp"
#include "doorway/sim/door.hpp"
#include "doorway/sim/scenario.hpp"
#include "doorway/sim/walking.hpp"

namespace doorway {

struct RobotGeometry {
  double pelvisHeight = 0.85;
  double chestAbovePelvis = 0.35;
  Vec3 armBaseOffset = Vec3(0.05, 0.22, 0.0);  ///< left arm, mirrored for the right
  Vec3 cameraOffset = Vec3(0.1, 0.0, 0.25);     ///< in the chest frame
  double shoulderRadius = 0.08;
  double handRadius = 0.05;
  double graspRadius = 0.05;
};

struct RobotState {
  Pose pelvisPose;
  PerSide<Pose> footPoses;
  PerSide<Pose> handPoses;
  PerSide<JointVector> armJointAngles;
  double chestYaw = 0.0;  ///< relative to the pelvis
  double pelvisHeightOffset = 0.0;
  double comLateralOffset = 0.0;
  double shoulderSpan = 0.85;
};

struct CollisionReport {
  bool collision = false;
  double lateralOffset = 0.0;  ///< shoulder center from the frame centerline, sway included
  double clearance = 0.0;      ///< frameWidth/2 - (|lateralOffset| + shoulderSpan/2)
  bool nearFrame = false;
};

/// Pure collision rule: pelvis within 0.3 m of the frame plane and the shoulders
/// wider than the opening at their current lateral offset.
CollisionReport doorFrameCollisionCheck(const RobotState& robot, const DoorState& door);
/// Signed distance of the sway-free pelvis along the door normal, zero at the
/// frame plane.
double traversalProgress(const RobotState& robot, const DoorState& door);

/// Deterministic kinematic world: walking robot with two 7-DoF arms, a chest
/// yaw joint and pelvis height, and one hinged door.
class SimWorld {
 public:
  explicit SimWorld(const ScenarioConfig& scenario, RobotGeometry geometry = {});

  void step();

  double dt() const { return 1.0 / scenario_.tickRateHz; }
  std::int64_t tick() const { return tick_; }
  double time() const { return static_cast<double>(tick_) * dt(); }

  // Commands
  void queueFootsteps(const std::vector<FootstepCommand>& steps);
  /// Samples are world poses with times relative to now.
  void commandHandTrajectory(Side side, std::vector<TimedPose> samples);
  void commandHandJoints(Side side, const JointVector& target, double duration);
  void commandChestYaw(double yaw, double duration);
  void commandPelvisHeight(double offset, double duration);
  /// Closes the hand; welds when a grip point lies within the grasp radius. Returns whether it welded.
  bool closeHand(Side side);
  void openHand(Side side);
  void setHandConfiguration(Side side, HandConfiguration c) { handConfig_[index(side)] = c; }
  /// Stops every motion in place.
  void halt();

  // Queries
  const ScenarioConfig& scenario() const { return scenario_; }
  const RobotGeometry& geometry() const { return geometry_; }
  const RobotState& robot() const { return robot_; }
  const Door& door() const { return door_; }
  const WalkingController& walking() const { return walking_; }
  Pose chestPose() const;
  Pose cameraPose() const;
  ArmChain armChain(Side side) const;
  /// Chain with the chest at the end of its active yaw trajectory.
  ArmChain armChainAtChestGoal(Side side) const;
  double chestYawGoal() const { return chestTraj_.active ? chestTraj_.to : robot_.chestYaw; }
  double pelvisHeightGoal() const { return pelvisTraj_.active ? pelvisTraj_.to : robot_.pelvisHeightOffset; }
  Pose commandedHandPose(Side side) const { return commanded_[index(side)]; }
  bool handTrajectoryActive(Side side) const;
  bool torsoTrajectoryActive() const { return chestTraj_.active || pelvisTraj_.active; }
  bool welded(Side side) const { return weld_[index(side)].has_value(); }
  HandConfiguration handConfiguration(Side side) const { return handConfig_[index(side)]; }
  double distanceToGrip(Side side) const;
  CollisionReport collision() const { return doorFrameCollisionCheck(robot_, door_.state()); }
  double progress() const { return traversalProgress(robot_, door_.state()); }
  std::vector<ContactSphere> contactSpheres() const;

  /// Named frames: world, pelvis, chest plus any published by perception.
  FrameTree& frames() { return frames_; }
  const FrameTree& frames() const { return frames_; }

  /// FNV-1a over the full numeric state.
  std::uint64_t stateHash() const;

 private:
  enum class HandMode { HoldInChest, Cartesian, Joint };
  struct HandCommand {
    HandMode mode = HandMode::HoldInChest;
    Pose holdInChest;
    std::vector<TimedPose> samples;
    double startTime = 0.0;
    JointVector q0 = JointVector::Zero();
    JointVector q1 = JointVector::Zero();
    double duration = 0.0;
  };
  struct ScalarTrajectory {
    bool active = false;
    double from = 0.0;
    double to = 0.0;
    double startTime = 0.0;
    double duration = 0.0;
    double sample(double t) const;
  };

  void updateBody();
  Pose targetHandPose(Side side, double t, JointVector* jointsOut) const;
  void finishHand(Side side);

  ScenarioConfig scenario_;
  RobotGeometry geometry_;
  Door door_;
  WalkingController walking_;
  RobotState robot_;
  PerSide<HandCommand> hands_;
  PerSide<Pose> commanded_;
  PerSide<std::optional<Pose>> weld_;  ///< hand pose in the handle frame
  PerSide<HandConfiguration> handConfig_{HandConfiguration::Open, HandConfiguration::Open};
  ScalarTrajectory chestTraj_;
  ScalarTrajectory pelvisTraj_;
  FrameTree frames_;
  FrameId pelvisFrame_;
  FrameId chestFrame_;
  std::int64_t tick_ = 0;
};

}  // namespace doorway
