#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "doorway/actions/arm_kinematics.hpp"
#include "doorway/actions/stance.hpp"
#include "doorway/common.hpp"
#include "doorway/geometry/pose.hpp"

namespace doorway {

enum class NodeKind {
  DoorTraversalCoordinator,
  ActionSequence,
  FootstepPlanAction,
  ArmTrajectoryAction,
  ScrewTrajectoryAction,
  ChestPelvisTrajectoryAction,
  HandConfigurationAction,
  WaitAction,
};
NLOHMANN_JSON_SERIALIZE_ENUM(NodeKind, {{NodeKind::DoorTraversalCoordinator, "DoorTraversalCoordinator"},
                                        {NodeKind::ActionSequence, "ActionSequence"},
                                        {NodeKind::FootstepPlanAction, "FootstepPlanAction"},
                                        {NodeKind::ArmTrajectoryAction, "ArmTrajectoryAction"},
                                        {NodeKind::ScrewTrajectoryAction, "ScrewTrajectoryAction"},
                                        {NodeKind::ChestPelvisTrajectoryAction, "ChestPelvisTrajectoryAction"},
                                        {NodeKind::HandConfigurationAction, "HandConfigurationAction"},
                                        {NodeKind::WaitAction, "WaitAction"}})

constexpr bool isAction(NodeKind k) {
  return k != NodeKind::DoorTraversalCoordinator && k != NodeKind::ActionSequence;
}

enum class Phase { Approach, UnlatchAndOpen, WalkThrough, Done };
NLOHMANN_JSON_SERIALIZE_ENUM(Phase, {{Phase::Approach, "Approach"},
                                     {Phase::UnlatchAndOpen, "UnlatchAndOpen"},
                                     {Phase::WalkThrough, "WalkThrough"},
                                     {Phase::Done, "Done"}})

struct CoordinatorParams {
  int maxRetries = 2;
  friend bool operator==(const CoordinatorParams&, const CoordinatorParams&) = default;
};

/// Plain sequences carry no tags. A direct child of a coordinator carries a
/// door type (and optionally a strategy label); its children carry phases.
struct SequenceParams {
  std::optional<MechanismType> doorType;
  std::optional<std::string> strategy;
  std::optional<Phase> phase;
  /// Leaf to restart from when an action of this phase fails; first leaf of the phase if unset.
  std::optional<std::int64_t> retryFromId;
  friend bool operator==(const SequenceParams&, const SequenceParams&) = default;
};

enum class PlanMode { PreSpecified, OnlineGoalStance, TurnWalkTurn };
NLOHMANN_JSON_SERIALIZE_ENUM(PlanMode, {{PlanMode::PreSpecified, "PreSpecified"},
                                        {PlanMode::OnlineGoalStance, "OnlineGoalStance"},
                                        {PlanMode::TurnWalkTurn, "TurnWalkTurn"}})

struct FootstepPlanParams {
  PlanMode planMode = PlanMode::TurnWalkTurn;
  std::vector<Footstep> steps;  ///< PreSpecified, poses in frameName
  std::optional<StanceGoal> goalStance;
  std::string frameName = "world";
  double swingDurationS = 0.6;
  double transferDurationS = 0.25;
  double stepWidthM = 0.24;
  double stepLengthM = 0.5;
  double turnPerStepRad = 0.4;
  friend bool operator==(const FootstepPlanParams&, const FootstepPlanParams&) = default;
};

enum class TargetMode { PresetJointAngles, FrameRelativeHandPose };
NLOHMANN_JSON_SERIALIZE_ENUM(TargetMode, {{TargetMode::PresetJointAngles, "PresetJointAngles"},
                                          {TargetMode::FrameRelativeHandPose, "FrameRelativeHandPose"}})

struct ArmTrajectoryParams {
  Side side = Side::Left;
  TargetMode targetMode = TargetMode::PresetJointAngles;
  std::optional<JointVector> jointAnglesRad;
  std::optional<Pose> handPose;
  std::string frameName = "world";
  double trajectoryTimeS = 1.0;
  double trackingWeight = 1.0;
  bool operator==(const ArmTrajectoryParams& o) const;
};

struct ScrewTrajectoryParams {
  Side side = Side::Left;
  Vec3 axisOrigin = Vec3::Zero();
  Vec3 axisDirection = Vec3::UnitZ();
  std::string frameName = "world";
  double revolutionAngleRad = 0.0;
  double axialTranslationM = 0.0;
  double durationS = 1.0;
  int sampleCount = 20;
  bool operator==(const ScrewTrajectoryParams& o) const;
};

enum class BodyPart { Chest, Pelvis };
NLOHMANN_JSON_SERIALIZE_ENUM(BodyPart, {{BodyPart::Chest, "Chest"}, {BodyPart::Pelvis, "Pelvis"}})

/// Chest: yaw about the pelvis. Pelvis: height offset from nominal.
struct ChestPelvisTrajectoryParams {
  BodyPart bodyPart = BodyPart::Chest;
  double yawRad = 0.0;
  double heightOffsetM = 0.0;
  double trajectoryTimeS = 1.0;
  friend bool operator==(const ChestPelvisTrajectoryParams&, const ChestPelvisTrajectoryParams&) = default;
};

enum class HandConfiguration { Open, Closed, Custom };
NLOHMANN_JSON_SERIALIZE_ENUM(HandConfiguration, {{HandConfiguration::Open, "Open"},
                                                 {HandConfiguration::Closed, "Closed"},
                                                 {HandConfiguration::Custom, "Custom"}})

struct HandConfigurationParams {
  Side side = Side::Left;
  HandConfiguration configuration = HandConfiguration::Open;
  std::vector<double> knuckleAnglesRad;  ///< Custom only
  double maxTorqueNm = 2.0;
  double durationS = 0.5;
  friend bool operator==(const HandConfigurationParams&, const HandConfigurationParams&) = default;
};

struct WaitParams {
  double durationS = 1.0;
  friend bool operator==(const WaitParams&, const WaitParams&) = default;
};

using NodeParameters = std::variant<CoordinatorParams, SequenceParams, FootstepPlanParams, ArmTrajectoryParams,
                                    ScrewTrajectoryParams, ChestPelvisTrajectoryParams, HandConfigurationParams,
                                    WaitParams>;

/// Default-constructed parameters for a node kind.
NodeParameters defaultParameters(NodeKind kind);

/// Parses and validates the parameters object of a node of the given kind.
/// Missing keys take defaults; unknown enum strings and invariant violations throw ParseError.
NodeParameters parseParameters(NodeKind kind, const nlohmann::json& j);
nlohmann::json serializeParameters(const NodeParameters& p);

/// Throws ParseError when an invariant of the parameter type does not hold.
void validate(const NodeParameters& p);

void to_json(nlohmann::json& j, const StanceGoal& g);
void from_json(const nlohmann::json& j, StanceGoal& g);
void to_json(nlohmann::json& j, const Footstep& s);
void from_json(const nlohmann::json& j, Footstep& s);

}  // namespace doorway
