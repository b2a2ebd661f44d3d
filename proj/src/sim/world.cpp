#include "doorway/sim/world.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

namespace doorway {

namespace {

constexpr int kLeftHandSphere = 0;
constexpr int kLeftShoulderSphere = 2;

double smoothstep(double s) { return s * s * (3.0 - 2.0 * s); }

IkOptions trackingOptions() {
  IkOptions o;
  o.maxIterations = 10;
  o.restarts = 0;
  return o;
}

class Fnv {
 public:
  void add(const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      h_ ^= p[i];
      h_ *= 1099511628211ULL;
    }
  }
  void add(double v) { add(&v, sizeof v); }
  void add(std::int64_t v) { add(&v, sizeof v); }
  void add(const Vec3& v) {
    for (int i = 0; i < 3; ++i) add(v[i]);
  }
  void add(const Pose& p) {
    add(p.position);
    for (int i = 0; i < 4; ++i) add(p.orientation.coeffs()[i]);
  }
  std::uint64_t value() const { return h_; }

 private:
  std::uint64_t h_ = 1469598103934665603ULL;
};

}  // namespace

CollisionReport doorFrameCollisionCheck(const RobotState& robot, const DoorState& door) {
  CollisionReport r;
  const double framePlaneX = door.hingeWorldPose.position.x();
  const double centerlineY = door.hingeWorldPose.position.y() - lateralSign(door.hingeSide) * door.frameWidth / 2.0;
  r.nearFrame = std::abs(robot.pelvisPose.position.x() - framePlaneX) <= 0.3;
  r.lateralOffset = robot.pelvisPose.position.y() - centerlineY;
  r.clearance = door.frameWidth / 2.0 - (std::abs(r.lateralOffset) + robot.shoulderSpan / 2.0);
  r.collision = r.nearFrame && r.clearance < 0.0;
  return r;
}

double traversalProgress(const RobotState& robot, const DoorState& door) {
  // Sway removed: with any heading error the lateral CoM shift would leak into x.
  const double yaw = robot.pelvisPose.yaw();
  const double x = robot.pelvisPose.position.x() + robot.comLateralOffset * std::sin(yaw);
  return x - door.hingeWorldPose.position.x();
}

double SimWorld::ScalarTrajectory::sample(double t) const {
  if (duration <= 0.0) return to;
  return from + (to - from) * smoothstep(std::clamp((t - startTime) / duration, 0.0, 1.0));
}

SimWorld::SimWorld(const ScenarioConfig& scenario, RobotGeometry geometry)
    : scenario_(scenario),
      geometry_(geometry),
      door_(scenario.door),
      walking_(stanceAround(Pose::fromXyYaw(scenario.robotStart.xM, scenario.robotStart.yM, scenario.robotStart.yawRad),
                            scenario.robotStart.stepWidthM)) {
  robot_.shoulderSpan = scenario.robotStart.shoulderSpanFraction * scenario.door.frameWidthM;
  pelvisFrame_ = frames_.addFrame("pelvis", Pose::identity());
  chestFrame_ = frames_.addFrame("chest", Pose::identity());
  updateBody();
  for (Side s : {Side::Left, Side::Right}) {
    robot_.armJointAngles[index(s)] = homeJointAngles();
    const Pose hand = forwardKinematics(armChain(s), homeJointAngles());
    robot_.handPoses[index(s)] = hand;
    commanded_[index(s)] = hand;
    hands_[index(s)].holdInChest = relative(chestPose(), hand);
  }
}

Pose SimWorld::chestPose() const {
  return compose(robot_.pelvisPose, Pose{Vec3(0.0, 0.0, geometry_.chestAbovePelvis), yawQuat(robot_.chestYaw)});
}

Pose SimWorld::cameraPose() const {
  const Quat tilt(Eigen::AngleAxisd(scenario_.sensor.tiltDeg * M_PI / 180.0, Vec3::UnitY()));
  return compose(chestPose(), Pose{geometry_.cameraOffset, tilt});
}

ArmChain SimWorld::armChain(Side side) const {
  Vec3 offset = geometry_.armBaseOffset;
  offset.y() *= lateralSign(side);
  ArmChain chain;
  chain.base = compose(chestPose(), Pose::fromTranslation(offset));
  return chain;
}

ArmChain SimWorld::armChainAtChestGoal(Side side) const {
  ArmChain chain = armChain(side);
  const Pose turn{Vec3::Zero(), yawQuat(chestYawGoal() - robot_.chestYaw)};
  // Rotate the shoulder about the chest axis.
  const Pose chest = chestPose();
  chain.base = compose(compose(chest, compose(turn, inverse(chest))), chain.base);
  return chain;
}

void SimWorld::updateBody() {
  Pose pelvis = walking_.pelvisGround();
  pelvis.position.z() = geometry_.pelvisHeight + robot_.pelvisHeightOffset;
  robot_.pelvisPose = pelvis;
  robot_.footPoses = {walking_.state().feet.left, walking_.state().feet.right};
  robot_.comLateralOffset = walking_.state().comLateralOffset;
  frames_.updateFrame(pelvisFrame_, robot_.pelvisPose);
  frames_.updateFrame(chestFrame_, chestPose());
}

void SimWorld::queueFootsteps(const std::vector<FootstepCommand>& steps) { walking_.enqueue(steps); }

void SimWorld::commandHandTrajectory(Side side, std::vector<TimedPose> samples) {
  if (samples.empty()) return;
  auto& h = hands_[index(side)];
  h.mode = HandMode::Cartesian;
  h.samples = std::move(samples);
  h.startTime = time();
}

void SimWorld::commandHandJoints(Side side, const JointVector& target, double duration) {
  auto& h = hands_[index(side)];
  h.mode = HandMode::Joint;
  h.q0 = robot_.armJointAngles[index(side)];
  h.q1 = target;
  h.duration = duration;
  h.startTime = time();
}

void SimWorld::commandChestYaw(double yaw, double duration) {
  chestTraj_ = {true, robot_.chestYaw, yaw, time(), duration};
}

void SimWorld::commandPelvisHeight(double offset, double duration) {
  pelvisTraj_ = {true, robot_.pelvisHeightOffset, offset, time(), duration};
}

bool SimWorld::handTrajectoryActive(Side side) const { return hands_[index(side)].mode != HandMode::HoldInChest; }

double SimWorld::distanceToGrip(Side side) const {
  return (robot_.handPoses[index(side)].position - door_.gripPoint()).norm();
}

bool SimWorld::closeHand(Side side) {
  handConfig_[index(side)] = HandConfiguration::Closed;
  if (welded(side)) return true;
  if (welded(opposite(side))) return false;
  if (door_.state().mechanismType == MechanismType::PushBar) return false;
  if (distanceToGrip(side) > geometry_.graspRadius) return false;
  weld_[index(side)] = relative(door_.handlePose(), robot_.handPoses[index(side)]);
  return true;
}

void SimWorld::openHand(Side side) {
  handConfig_[index(side)] = HandConfiguration::Open;
  if (!welded(side)) return;
  weld_[index(side)].reset();
  auto& h = hands_[index(side)];
  h.mode = HandMode::HoldInChest;
  h.holdInChest = relative(chestPose(), robot_.handPoses[index(side)]);
  commanded_[index(side)] = robot_.handPoses[index(side)];
}

void SimWorld::halt() {
  walking_.halt();
  chestTraj_.active = pelvisTraj_.active = false;
  for (Side s : {Side::Left, Side::Right}) {
    auto& h = hands_[index(s)];
    h.mode = HandMode::HoldInChest;
    h.holdInChest = relative(chestPose(), robot_.handPoses[index(s)]);
  }
}

Pose SimWorld::targetHandPose(Side side, double t, JointVector* jointsOut) const {
  const auto& h = hands_[index(side)];
  switch (h.mode) {
    case HandMode::HoldInChest:
      return compose(chestPose(), h.holdInChest);
    case HandMode::Cartesian:
      return sampleTrajectory(h.samples, t - h.startTime);
    case HandMode::Joint: {
      const double s = h.duration > 0.0 ? std::clamp((t - h.startTime) / h.duration, 0.0, 1.0) : 1.0;
      const JointVector q = h.q0 + (h.q1 - h.q0) * smoothstep(s);
      if (jointsOut) *jointsOut = q;
      return forwardKinematics(armChain(side), q);
    }
  }
  return Pose::identity();
}

void SimWorld::finishHand(Side side) {
  auto& h = hands_[index(side)];
  const double t = time();
  const bool done = (h.mode == HandMode::Cartesian && t - h.startTime >= h.samples.back().time - 1e-9) ||
                    (h.mode == HandMode::Joint && t - h.startTime >= h.duration - 1e-9);
  if (!done) return;
  h.mode = HandMode::HoldInChest;
  h.holdInChest = relative(chestPose(), commanded_[index(side)]);
}

std::vector<ContactSphere> SimWorld::contactSpheres() const {
  std::vector<ContactSphere> spheres;
  for (Side s : {Side::Left, Side::Right}) {
    if (!welded(s))
      spheres.push_back({kLeftHandSphere + static_cast<int>(index(s)), robot_.handPoses[index(s)].position,
                         geometry_.handRadius, true});
    const double y = lateralSign(s) * (robot_.shoulderSpan / 2.0 - geometry_.shoulderRadius);
    spheres.push_back({kLeftShoulderSphere + static_cast<int>(index(s)),
                       chestPose().transformPoint(Vec3(0.0, y, 0.0)), geometry_.shoulderRadius, false});
  }
  return spheres;
}

void SimWorld::step() {
  ++tick_;
  const double t = time();
  walking_.advance(dt());
  if (chestTraj_.active) {
    robot_.chestYaw = chestTraj_.sample(t);
    if (t - chestTraj_.startTime >= chestTraj_.duration - 1e-9) chestTraj_.active = false;
  }
  if (pelvisTraj_.active) {
    robot_.pelvisHeightOffset = pelvisTraj_.sample(t);
    if (t - pelvisTraj_.startTime >= pelvisTraj_.duration - 1e-9) pelvisTraj_.active = false;
  }
  updateBody();

  const IkOptions tracking = trackingOptions();
  DoorInputs inputs;
  for (Side s : {Side::Left, Side::Right}) {
    const std::size_t i = index(s);
    JointVector q = robot_.armJointAngles[i];
    const bool jointMode = hands_[i].mode == HandMode::Joint;
    commanded_[i] = targetHandPose(s, t, &q);
    if (welded(s)) {
      inputs.weldedHandleTarget = compose(commanded_[i], inverse(*weld_[i]));
      if (jointMode) robot_.armJointAngles[i] = q;
    } else {
      if (!jointMode) q = solveArmIK(armChain(s), commanded_[i], q, tracking).joints;
      robot_.armJointAngles[i] = q;
      robot_.handPoses[i] = forwardKinematics(armChain(s), q);
    }
  }
  inputs.spheres = contactSpheres();
  door_.step(dt(), inputs);

  for (Side s : {Side::Left, Side::Right}) {
    const std::size_t i = index(s);
    if (welded(s)) {
      robot_.handPoses[i] = compose(door_.handlePose(), *weld_[i]);
      if (hands_[i].mode != HandMode::Joint)
        robot_.armJointAngles[i] = solveArmIK(armChain(s), robot_.handPoses[i], robot_.armJointAngles[i], tracking).joints;
    }
    finishHand(s);
  }
}

std::uint64_t SimWorld::stateHash() const {
  Fnv h;
  h.add(tick_);
  h.add(robot_.pelvisPose);
  for (std::size_t i = 0; i < 2; ++i) {
    h.add(robot_.footPoses[i]);
    h.add(robot_.handPoses[i]);
    h.add(commanded_[i]);
    for (int j = 0; j < 7; ++j) h.add(robot_.armJointAngles[i][j]);
    h.add(static_cast<std::int64_t>(weld_[i].has_value()));
  }
  h.add(robot_.chestYaw);
  h.add(robot_.pelvisHeightOffset);
  h.add(robot_.comLateralOffset);
  const DoorState& d = door_.state();
  h.add(d.panelAngle);
  h.add(d.handleAngle);
  h.add(d.pushBarDepression);
  h.add(static_cast<std::int64_t>(d.latched));
  const WalkingState& w = walking_.state();
  h.add(static_cast<std::int64_t>(w.state));
  h.add(w.stateTimer);
  h.add(static_cast<std::int64_t>(w.footstepQueue.size()));
  return h.value();
}

}  // namespace doorway
