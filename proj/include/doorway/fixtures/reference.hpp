#pragma once

#include <string>
#include <vector>

#include "doorway/model/behavior_tree.hpp"
#include "doorway/sim/scenario.hpp"

namespace doorway {

struct DoorVariant {
  std::string name;  ///< e.g. "right-pull-lever"
  Side hingeSide = Side::Right;
  SwingDirection swing = SwingDirection::Push;
  MechanismType mechanism = MechanismType::LeverHandle;
};

/// The six reference doors shipped under fixtures/.
std::vector<DoorVariant> referenceVariants();
const DoorVariant& referenceVariant(const std::string& name);

/// Coordinator tree with one phase-structured strategy for the variant.
BehaviorNode buildReferenceBehavior(const DoorVariant& v);
/// Noise-free scene with the robot 1.5 m in front of the door.
ScenarioConfig buildReferenceScenario(const DoorVariant& v);

/// Joint angles mirrored from one arm to the other (yaw and roll joints flip sign).
JointVector mirrorJoints(const JointVector& q);

}  // namespace doorway
