#pragma once

#include <vector>

#include "doorway/common.hpp"
#include "doorway/geometry/pose.hpp"

namespace doorway {

/// Goal stance authored in a mechanism frame.
struct StanceGoal {
  Vec3 pointToStandAt = Vec3::Zero();
  Vec3 pointToFace = Vec3::UnitX();
  double adjustX = 0.0;
  double adjustY = 0.0;
  double adjustYaw = 0.0;
  friend bool operator==(const StanceGoal&, const StanceGoal&) = default;
};

struct Stance {
  Pose left;
  Pose right;
  const Pose& foot(Side s) const { return s == Side::Left ? left : right; }
  Pose& foot(Side s) { return s == Side::Left ? left : right; }
  /// Ground-plane midpoint with the mean heading of both feet.
  Pose midPose() const;
};

Stance stanceAround(const Pose& midpoint, double stepWidth);

/// Projects the goal stance onto flat ground: midpoint under pointToStandAt,
/// facing the horizontal projection of pointToFace, then the XY/yaw adjustment
/// in the stance frame. Throws std::invalid_argument when the two points
/// coincide horizontally.
Stance snapStanceToGround(const StanceGoal& goal, const Pose& mechanismFrameInWorld, double groundHeight,
                          double stepWidth);

struct Footstep {
  Side side = Side::Left;
  Pose pose;
  friend bool operator==(const Footstep&, const Footstep&) = default;
};

struct TurnWalkTurnLimits {
  double stepLength = 0.5;      ///< max displacement of a foot from its previous placement
  double stepWidth = 0.24;
  double turnPerStep = 0.4;     ///< max yaw change of a foot from its previous placement
  double maxBackwardDistance = 0.6;  ///< short moves behind the robot walk backward instead of turning around
  /// Heading changes below this are absorbed into the walking and closing steps instead of turning in place.
  double minTurn = 0.05;
};

/// Procedural flat-ground plan: turn in place toward the goal, walk straight,
/// turn to the goal heading. Final feet land on the goal stance.
std::vector<Footstep> planTurnWalkTurn(const Stance& start, const Stance& goal, const TurnWalkTurnLimits& limits);

/// Shuffles the stance directly toward the goal without turning first, used for
/// short repositioning moves (side steps, stepping back).
std::vector<Footstep> planDirectStance(const Stance& start, const Stance& goal, const TurnWalkTurnLimits& limits);

}  // namespace doorway
