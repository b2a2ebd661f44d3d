#include "doorway/fixtures/reference.hpp"

#include <stdexcept>

#include "doorway/sim/door.hpp"

namespace doorway {

namespace {

// Left-arm presets; the right arm uses the mirror image.
JointVector pushReady() { return (JointVector() << -0.046, 1.670, 0.041, -1.867, 0.004, 0.198, 0.086).finished(); }
JointVector guardPose() { return (JointVector() << 0.0, 1.412, 0.0, -1.810, 0.0, 0.398, 0.0).finished(); }
JointVector crossPregrasp() {
  return (JointVector() << -0.578, 1.205, 0.372, -1.365, -0.132, 0.135, 0.946).finished();
}

JointVector forArm(Side side, const JointVector& leftArm) {
  return side == Side::Left ? leftArm : mirrorJoints(leftArm);
}

class Builder {
 public:
  Builder(const DoorVariant& v) : variant_(v) {
    DoorConfig dc;
    dc.hingeSide = v.hingeSide;
    dc.swingDirection = v.swing;
    dc.mechanismType = v.mechanism;
    const Door door(dc);
    mechInverse_ = inverse(door.mechanismFrameTruth());
    hub_ = door.hub(0.0);
    handleAxis_ = door.handleAxis(0.0);
    const Vec2 c0 = door.panelDirection(0.0);
    openingAxis_ = Vec3(c0.x(), c0.y(), 0.0).cross(Vec3(door.swingNormal(0.0).x(), door.swingNormal(0.0).y(), 0.0));
    hinge_ = Vec3(door.hinge().x(), door.hinge().y(), hub_.z());
    sY_ = v.hingeSide == Side::Right ? 1.0 : -1.0;
  }

  /// World point authored for a right-hinged door, mirrored for a left one, in the mechanism frame.
  Vec3 mech(double x, double y, double z = 0.0) const { return mechInverse_.transformPoint(Vec3(x, sY_ * y, z)); }
  Vec3 mechPoint(const Vec3& world) const { return mechInverse_.transformPoint(world); }
  Vec3 mechDir(const Vec3& world) const { return mechInverse_.rotateVector(world); }
  double sY() const { return sY_; }
  const Vec3& hub() const { return hub_; }
  const Vec3& handleAxis() const { return handleAxis_; }
  const Vec3& openingAxis() const { return openingAxis_; }
  const Vec3& hinge() const { return hinge_; }

  NodeId id() { return NodeId{next_++}; }

  BehaviorNode sequence(std::string name, SequenceParams p) {
    BehaviorNode n;
    n.id = id();
    n.kind = NodeKind::ActionSequence;
    n.name = std::move(name);
    n.parameters = p;
    return n;
  }

  BehaviorNode action(NodeKind kind, std::string name, NodeParameters p, std::optional<NodeId> after) {
    BehaviorNode n;
    n.id = id();
    n.kind = kind;
    n.name = std::move(name);
    n.parameters = std::move(p);
    n.executeAfterId = after;
    return n;
  }

  BehaviorNode wait(std::string name, double s, std::optional<NodeId> after) {
    return action(NodeKind::WaitAction, std::move(name), WaitParams{s}, after);
  }

  BehaviorNode walk(std::string name, PlanMode mode, Vec3 standWorld, double width, std::optional<NodeId> after) {
    FootstepPlanParams p;
    p.planMode = mode;
    p.frameName = "mechanismAtApproach";
    StanceGoal g;
    g.pointToStandAt = mech(standWorld.x(), standWorld.y());
    g.pointToFace = mech(standWorld.x() + 1.0, standWorld.y());
    p.goalStance = g;
    p.stepWidthM = width;
    p.stepLengthM = 0.6;
    return action(NodeKind::FootstepPlanAction, std::move(name), p, after);
  }

  BehaviorNode armPreset(std::string name, Side side, const JointVector& leftArm, double t, std::optional<NodeId> after) {
    ArmTrajectoryParams p;
    p.side = side;
    p.targetMode = TargetMode::PresetJointAngles;
    p.jointAnglesRad = forArm(side, leftArm);
    p.trajectoryTimeS = t;
    return action(NodeKind::ArmTrajectoryAction, std::move(name), p, after);
  }

  BehaviorNode armTo(std::string name, Side side, const Vec3& mechPosition, double t, std::optional<NodeId> after) {
    ArmTrajectoryParams p;
    p.side = side;
    p.targetMode = TargetMode::FrameRelativeHandPose;
    p.handPose = Pose::fromTranslation(mechPosition);
    p.frameName = "mechanismAtApproach";
    p.trajectoryTimeS = t;
    return action(NodeKind::ArmTrajectoryAction, std::move(name), p, after);
  }

  BehaviorNode screw(std::string name, Side side, const Vec3& worldOrigin, const Vec3& worldDir, double angle, double t,
                     std::optional<NodeId> after) {
    ScrewTrajectoryParams p;
    p.side = side;
    p.axisOrigin = mechPoint(worldOrigin);
    p.axisDirection = mechDir(worldDir);
    p.frameName = "mechanismAtApproach";
    p.revolutionAngleRad = angle;
    p.durationS = t;
    return action(NodeKind::ScrewTrajectoryAction, std::move(name), p, after);
  }

  BehaviorNode hand(std::string name, Side side, HandConfiguration c, double t, std::optional<NodeId> after) {
    HandConfigurationParams p;
    p.side = side;
    p.configuration = c;
    p.durationS = t;
    return action(NodeKind::HandConfigurationAction, std::move(name), p, after);
  }

  BehaviorNode torso(std::string name, BodyPart part, double value, double t, std::optional<NodeId> after) {
    ChestPelvisTrajectoryParams p;
    p.bodyPart = part;
    if (part == BodyPart::Chest)
      p.yawRad = value;
    else
      p.heightOffsetM = value;
    p.trajectoryTimeS = t;
    return action(NodeKind::ChestPelvisTrajectoryAction, std::move(name), p, after);
  }

  SequenceParams phase(Phase ph) const {
    SequenceParams p;
    p.phase = ph;
    return p;
  }

 private:
  DoorVariant variant_;
  Pose mechInverse_;
  Vec3 hub_;
  Vec3 handleAxis_;
  Vec3 openingAxis_;
  Vec3 hinge_;
  double sY_ = 1.0;
  std::int64_t next_ = 1;
};

void push(BehaviorNode& parent, BehaviorNode child) { parent.children.push_back(std::move(child)); }

/// Press the bar, push the panel a little, walk through with hand and shoulders on the panel.
void pushBarStrategy(Builder& b, BehaviorNode& strategy, Side arm) {
  auto approach = b.sequence("Approach", b.phase(Phase::Approach));
  auto settle = b.wait("Let detection settle", 0.5, std::nullopt);
  auto walk = b.walk("Walk to door", PlanMode::TurnWalkTurn, Vec3(-0.40, 0.0, 0.0), 0.24, settle.id);
  auto raise = b.armPreset("Raise arm", arm, pushReady(), 1.5, settle.id);
  auto settleAtDoor = b.wait("Settle at door", 0.5, walk.id);
  const NodeId atDoor = settleAtDoor.id;
  for (auto* n : {&settle, &walk, &raise, &settleAtDoor}) push(approach, std::move(*n));

  auto open = b.sequence("Unlatch and open", b.phase(Phase::UnlatchAndOpen));
  auto press = b.armTo("Press bar", arm, Vec3(0.02, 0.0, 0.0), 1.0, atDoor);
  auto shove = b.armTo("Push door", arm, Vec3(0.18, 0.0, 0.0), 1.0, press.id);
  const NodeId shoved = shove.id;
  push(open, std::move(press));
  push(open, std::move(shove));

  auto through = b.sequence("Walk through", b.phase(Phase::WalkThrough));
  push(through, b.walk("Walk through door", PlanMode::TurnWalkTurn, Vec3(0.8, 0.0, 0.0), 0.12, shoved));

  push(strategy, std::move(approach));
  push(strategy, std::move(open));
  push(strategy, std::move(through));
}

/// Grasp, turn, push the panel slightly, release and walk through pushing it further.
void pushKnobStrategy(Builder& b, BehaviorNode& strategy, Side arm) {
  auto approach = b.sequence("Approach", b.phase(Phase::Approach));
  auto settle = b.wait("Let detection settle", 0.5, std::nullopt);
  auto walk = b.walk("Walk to handle", PlanMode::TurnWalkTurn, Vec3(-0.45, 0.15, 0.0), 0.24, settle.id);
  auto raise = b.armPreset("Raise arm", arm, pushReady(), 1.5, settle.id);
  auto openHand = b.hand("Open hand", arm, HandConfiguration::Open, 0.3, settle.id);
  auto settleAtDoor = b.wait("Settle at door", 0.5, walk.id);
  const NodeId atDoor = settleAtDoor.id;
  for (auto* n : {&settle, &walk, &raise, &openHand, &settleAtDoor}) push(approach, std::move(*n));

  SequenceParams openParams = b.phase(Phase::UnlatchAndOpen);
  auto reach = b.armTo("Grasp approach", arm, Vec3(-0.10, 0.0, 0.0), 1.0, atDoor);
  openParams.retryFromId = toInt(reach.id);
  auto open = b.sequence("Unlatch and open", openParams);
  auto grasp = b.armTo("Grasp handle", arm, Vec3(0.01, 0.0, 0.0), 0.8, reach.id);
  auto close = b.hand("Close hand", arm, HandConfiguration::Closed, 0.5, grasp.id);
  auto turn = b.screw("Turn handle", arm, b.hub(), b.handleAxis(), 0.7, 1.0, close.id);
  auto swing = b.screw("Push door open", arm, b.hinge(), b.openingAxis(), 0.15, 1.5, turn.id);
  auto release = b.hand("Release handle", arm, HandConfiguration::Open, 0.3, swing.id);
  const NodeId released = release.id;
  for (auto* n : {&reach, &grasp, &close, &turn, &swing, &release}) push(open, std::move(*n));

  auto through = b.sequence("Walk through", b.phase(Phase::WalkThrough));
  auto center = b.walk("Step to centerline", PlanMode::OnlineGoalStance, Vec3(-0.45, 0.0, 0.0), 0.12, released);
  auto walkThrough = b.walk("Walk through door", PlanMode::TurnWalkTurn, Vec3(0.8, 0.0, 0.0), 0.12, center.id);
  push(through, std::move(center));
  push(through, std::move(walkThrough));

  push(strategy, std::move(approach));
  push(strategy, std::move(open));
  push(strategy, std::move(through));
}

/// Stand off to the handle side, reach across the body with the far arm
/// helped by chest yaw, pull the door open, then step in behind the panel and
/// walk through with the shoulder pushing it the rest of the way.
void pullStrategy(Builder& b, BehaviorNode& strategy, Side crossArm) {
  const Side nearArm = opposite(crossArm);
  const double yaw = -0.4 * b.sY();

  auto approach = b.sequence("Approach", b.phase(Phase::Approach));
  auto settle = b.wait("Let detection settle", 0.5, std::nullopt);
  auto walk = b.walk("Walk to handle side", PlanMode::OnlineGoalStance, Vec3(-0.45, 0.75, 0.0), 0.24, settle.id);
  auto chest = b.torso("Yaw chest toward handle", BodyPart::Chest, yaw, 1.5, settle.id);
  auto lower = b.torso("Lower pelvis", BodyPart::Pelvis, -0.05, 1.0, settle.id);
  auto openHand = b.hand("Open hand", crossArm, HandConfiguration::Open, 0.5, settle.id);
  auto pregrasp = b.armPreset("Bring arm across", crossArm, crossPregrasp(), 2.0, chest.id);
  auto ready = b.armPreset("Ready other arm", nearArm, guardPose(), 1.5, settle.id);
  auto settleAtDoor = b.wait("Settle at stance", 0.5, walk.id);
  const NodeId atDoor = settleAtDoor.id;
  for (auto* n : {&settle, &walk, &chest, &lower, &openHand, &pregrasp, &ready, &settleAtDoor})
    push(approach, std::move(*n));

  SequenceParams openParams = b.phase(Phase::UnlatchAndOpen);
  auto reach = b.armTo("Grasp approach", crossArm, Vec3(-0.10, 0.0, 0.0), 1.0, atDoor);
  openParams.retryFromId = toInt(reach.id);
  auto open = b.sequence("Unlatch and open", openParams);
  auto grasp = b.armTo("Grasp handle", crossArm, Vec3(0.01, 0.0, 0.0), 0.8, reach.id);
  auto close = b.hand("Close hand", crossArm, HandConfiguration::Closed, 0.5, grasp.id);
  auto turn = b.screw("Turn handle", crossArm, b.hub(), b.handleAxis(), 0.7, 1.0, close.id);
  auto swing = b.screw("Pull door open", crossArm, b.hinge(), b.openingAxis(), 0.8, 2.0, turn.id);
  auto guard = b.armPreset("Guard with other arm", nearArm, pushReady(), 1.5, turn.id);
  auto release = b.hand("Release handle", crossArm, HandConfiguration::Open, 0.3, swing.id);
  const NodeId released = release.id;
  for (auto* n : {&reach, &grasp, &close, &turn, &swing, &guard, &release}) push(open, std::move(*n));

  auto through = b.sequence("Walk through", b.phase(Phase::WalkThrough));
  auto center = b.walk("Step behind panel", PlanMode::OnlineGoalStance, Vec3(-0.55, 0.0, 0.0), 0.12, released);
  auto retract = b.armPreset("Retract arm", crossArm, homeJointAngles(), 1.0, released);
  auto unyaw = b.torso("Straighten chest", BodyPart::Chest, 0.0, 1.0, released);
  auto raisePelvis = b.torso("Raise pelvis", BodyPart::Pelvis, 0.0, 1.0, released);
  auto walkThrough = b.walk("Walk through door", PlanMode::TurnWalkTurn, Vec3(0.8, 0.0, 0.0), 0.12, center.id);
  auto lowerArm = b.armPreset("Lower other arm", nearArm, homeJointAngles(), 1.0, center.id);
  for (auto* n : {&center, &retract, &unyaw, &raisePelvis, &walkThrough, &lowerArm}) push(through, std::move(*n));

  push(strategy, std::move(approach));
  push(strategy, std::move(open));
  push(strategy, std::move(through));
}

}  // namespace

JointVector mirrorJoints(const JointVector& q) {
  JointVector m = q;
  for (int i : {0, 2, 4, 6}) m[i] = -m[i];
  return m;
}

std::vector<DoorVariant> referenceVariants() {
  return {
      {"right-push-bar", Side::Right, SwingDirection::Push, MechanismType::PushBar},
      {"left-push-bar", Side::Left, SwingDirection::Push, MechanismType::PushBar},
      {"right-pull-lever", Side::Right, SwingDirection::Pull, MechanismType::LeverHandle},
      {"left-pull-lever", Side::Left, SwingDirection::Pull, MechanismType::LeverHandle},
      {"right-push-knob", Side::Right, SwingDirection::Push, MechanismType::Knob},
      {"left-pull-knob", Side::Left, SwingDirection::Pull, MechanismType::Knob},
  };
}

const DoorVariant& referenceVariant(const std::string& name) {
  static const std::vector<DoorVariant> all = referenceVariants();
  for (const auto& v : all)
    if (v.name == name) return v;
  throw std::invalid_argument("unknown door variant '" + name + "'");
}

BehaviorNode buildReferenceBehavior(const DoorVariant& v) {
  Builder b(v);
  BehaviorNode root;
  root.id = b.id();
  root.kind = NodeKind::DoorTraversalCoordinator;
  root.name = "Door traversal";
  root.parameters = CoordinatorParams{};

  SequenceParams sp;
  sp.doorType = v.mechanism;
  // The handle sits on the side away from the hinge.
  const Side handleSide = opposite(v.hingeSide);
  BehaviorNode strategy;
  if (v.swing == SwingDirection::Pull) {
    sp.strategy = "pull-cross-body";
    strategy = b.sequence(v.name, sp);
    pullStrategy(b, strategy, opposite(handleSide));
  } else if (v.mechanism == MechanismType::PushBar) {
    sp.strategy = "push-bar";
    strategy = b.sequence(v.name, sp);
    pushBarStrategy(b, strategy, handleSide);
  } else {
    sp.strategy = "push-grasp";
    strategy = b.sequence(v.name, sp);
    pushKnobStrategy(b, strategy, handleSide);
  }
  root.children.push_back(std::move(strategy));
  validateTree(root);
  return root;
}

ScenarioConfig buildReferenceScenario(const DoorVariant& v) {
  ScenarioConfig s;
  s.name = v.name;
  s.door.hingeSide = v.hingeSide;
  s.door.swingDirection = v.swing;
  s.door.mechanismType = v.mechanism;
  s.sensor.noise.depthSigmaM = 0.002;
  s.sensor.noise.missProbability = 0.05;
  s.sensor.noise.maskFlipProbability = 0.02;
  s.timeoutS = 60.0;
  return s;
}

}  // namespace doorway
