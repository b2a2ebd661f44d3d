#include "doorway/runtime/actions.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "doorway/actions/screw.hpp"
#include "doorway/actions/stance.hpp"

namespace doorway {

void to_json(nlohmann::json& j, const TrackingSample& s) {
  j = {{"tick", s.tick},
       {"actionId", toInt(s.actionId)},
       {"cartesianDistanceToGoal", s.cartesianDistanceToGoal},
       {"orientationErrorRad", s.orientationErrorRad},
       {"nominalTimeRemaining", s.nominalTimeRemaining}};
}

namespace {

constexpr int kCartesianSamples = 20;
constexpr double kMaxPlanDistance = 6.0;

double smoothstep(double s) { return s * s * (3.0 - 2.0 * s); }

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(3);
  os << std::fixed << v;
  return os.str();
}

std::optional<Pose> lookupFrame(const SimWorld& world, const std::string& name, std::string* detail) {
  const auto id = world.frames().find(name);
  if (!id) {
    *detail = "frame '" + name + "' not found";
    return std::nullopt;
  }
  return world.frames().worldPose(*id);
}

double remaining(double nominal, double elapsed) { return std::max(0.0, nominal - elapsed); }

}  // namespace

ExitCheck trajectoryExit(double elapsed, double nominal, double posErr, double rotErr, const ExitTolerance& tol) {
  if (elapsed < nominal - 1e-9) return {};
  if (posErr <= tol.positionM && rotErr <= tol.orientationRad) return {ExitResult::Success, {}};
  if (elapsed >= tol.timeoutFactor * nominal - 1e-9)
    return {ExitResult::Failure, "tracking error " + fmt(posErr) + " m, " + fmt(rotErr * 180.0 / M_PI) +
                                     " deg after " + fmt(elapsed) + " s"};
  return {};
}

namespace {

// ---------------------------------------------------------------------------

class FootstepExecutor : public ActionExecutor {
 public:
  FootstepExecutor(std::vector<Footstep> steps, const FootstepPlanParams& p, Stance goal, ExitTolerance tol)
      : steps_(std::move(steps)), params_(p), goal_(std::move(goal)), tol_(tol) {}

  void start(SimWorld& world) override {
    stepsAtStart_ = world.walking().state().stepsTaken;
    std::vector<FootstepCommand> cmds;
    for (const auto& s : steps_) cmds.push_back({s.side, s.pose, params_.swingDurationS, params_.transferDurationS});
    world.queueFootsteps(cmds);
  }

  double nominalDuration() const override {
    return static_cast<double>(steps_.size()) * (params_.swingDurationS + params_.transferDurationS);
  }

  ExitCheck poll(SimWorld& world, double elapsed) override {
    const auto& w = world.walking();
    const bool done = w.idle() && w.state().stepsTaken >= stepsAtStart_ + static_cast<int>(steps_.size());
    if (done) return {ExitResult::Success, {}};
    if (elapsed >= tol_.timeoutFactor * nominalDuration() - 1e-9 && elapsed > 0.0)
      return {ExitResult::Failure, "footsteps unfinished after " + fmt(elapsed) + " s"};
    return {};
  }

  TrackingSample track(const SimWorld& world, double elapsed) const override {
    // Planted feet only, so the distance drops at each touchdown.
    const auto& st = world.walking().state();
    Stance planted = st.feet;
    if (st.state == WalkingPhase::Swing && !st.footstepQueue.empty())
      planted.foot(st.footstepQueue.front().side) = st.swingStart;
    const Pose now = planted.midPose();
    const Pose goal = goal_.midPose();
    TrackingSample s;
    s.cartesianDistanceToGoal = (goal.position - now.position).head<2>().norm();
    s.orientationErrorRad = std::abs(wrapAngle(goal.yaw() - now.yaw()));
    s.nominalTimeRemaining = remaining(nominalDuration(), elapsed);
    return s;
  }

  std::vector<TimedPose> preview() const override {
    std::vector<TimedPose> out;
    const double per = params_.swingDurationS + params_.transferDurationS;
    for (std::size_t i = 0; i < steps_.size(); ++i) out.push_back({per * static_cast<double>(i + 1), steps_[i].pose});
    return out;
  }

 private:
  std::vector<Footstep> steps_;
  FootstepPlanParams params_;
  Stance goal_;
  ExitTolerance tol_;
  int stepsAtStart_ = 0;
};

PreparedAction prepareFootsteps(const BehaviorNode& node, const SimWorld& world, const ExitTolerance& tol) {
  const auto& p = node.params<FootstepPlanParams>();
  PreparedAction out;
  out.report.actionId = node.id;
  std::string detail;
  const auto frame = lookupFrame(world, p.frameName, &detail);
  if (!frame) {
    out.report.entryPassed = false;
    out.report.detail = detail;
    return out;
  }
  const Stance start = world.walking().state().feet;
  TurnWalkTurnLimits limits;
  limits.stepLength = p.stepLengthM;
  limits.stepWidth = p.stepWidthM;
  limits.turnPerStep = p.turnPerStepRad;

  std::vector<Footstep> steps;
  Stance goal = start;
  try {
    if (p.planMode == PlanMode::PreSpecified) {
      for (const auto& s : p.steps) {
        Pose pose = compose(*frame, s.pose);
        pose = Pose::fromXyYaw(pose.position.x(), pose.position.y(), pose.yaw(), 0.0);
        steps.push_back({s.side, pose});
        goal.foot(s.side) = pose;
      }
    } else {
      goal = snapStanceToGround(*p.goalStance, *frame, 0.0, p.stepWidthM);
      const double distance = (goal.midPose().position - start.midPose().position).head<2>().norm();
      if (distance > kMaxPlanDistance) {
        out.report.entryPassed = false;
        out.report.detail = "goal stance " + fmt(distance) + " m away exceeds planner range";
        return out;
      }
      steps = p.planMode == PlanMode::TurnWalkTurn ? planTurnWalkTurn(start, goal, limits)
                                                   : planDirectStance(start, goal, limits);
    }
  } catch (const std::exception& e) {
    out.report.entryPassed = false;
    out.report.detail = std::string("cannot plan footsteps: ") + e.what();
    return out;
  }
  out.executor = std::make_unique<FootstepExecutor>(std::move(steps), p, goal, tol);
  return out;
}

// ---------------------------------------------------------------------------

class ArmExecutor : public ActionExecutor {
 public:
  ArmExecutor(const ArmTrajectoryParams& p, std::optional<Pose> goal, ExitTolerance tol)
      : params_(p), goal_(std::move(goal)), tol_(tol) {}

  void start(SimWorld& world) override {
    const Side side = params_.side;
    samples_.clear();
    if (params_.targetMode == TargetMode::PresetJointAngles) {
      // Same joint-space smoothstep the sim follows, sampled for previews.
      const ArmChain chain = world.armChain(side);
      const JointVector q0 = world.robot().armJointAngles[index(side)];
      const JointVector& q1 = *params_.jointAnglesRad;
      for (int k = 0; k < kCartesianSamples; ++k) {
        const double s = static_cast<double>(k) / (kCartesianSamples - 1);
        samples_.push_back({s * params_.trajectoryTimeS, forwardKinematics(chain, q0 + (q1 - q0) * smoothstep(s))});
      }
      world.commandHandJoints(side, q1, params_.trajectoryTimeS);
      return;
    }
    const Pose from = world.commandedHandPose(side);
    for (int k = 0; k < kCartesianSamples; ++k) {
      const double s = static_cast<double>(k) / (kCartesianSamples - 1);
      samples_.push_back({s * params_.trajectoryTimeS, interpolate(from, *goal_, smoothstep(s))});
    }
    world.commandHandTrajectory(side, samples_);
  }

  double nominalDuration() const override { return params_.trajectoryTimeS; }

  Pose goal(const SimWorld& world) const {
    if (goal_) return *goal_;
    return forwardKinematics(world.armChain(params_.side), *params_.jointAnglesRad);
  }

  ExitCheck poll(SimWorld& world, double elapsed) override {
    const TrackingSample s = track(world, elapsed);
    return trajectoryExit(elapsed, nominalDuration(), s.cartesianDistanceToGoal, s.orientationErrorRad, tol_);
  }

  TrackingSample track(const SimWorld& world, double elapsed) const override {
    const Pose g = goal(world);
    const Pose& hand = world.robot().handPoses[index(params_.side)];
    TrackingSample s;
    s.cartesianDistanceToGoal = (hand.position - g.position).norm();
    s.orientationErrorRad = angleBetween(hand.orientation, g.orientation);
    s.nominalTimeRemaining = remaining(nominalDuration(), elapsed);
    return s;
  }

  std::vector<TimedPose> preview() const override { return samples_; }

 private:
  ArmTrajectoryParams params_;
  std::optional<Pose> goal_;
  ExitTolerance tol_;
  std::vector<TimedPose> samples_;
};

// A target within exit tolerance of the workspace is still worth attempting.
bool reachable(const SimWorld& world, Side side, const Pose& target, const ExitTolerance& tol, double* residual) {
  const ArmChain chain = world.armChainAtChestGoal(side);
  const IkResult r = solveArmIK(chain, target, world.robot().armJointAngles[index(side)]);
  *residual = r.positionError;
  return r.converged || (r.positionError <= tol.positionM && r.orientationError <= tol.orientationRad);
}

PreparedAction prepareArm(const BehaviorNode& node, const SimWorld& world, const ExitTolerance& tol) {
  const auto& p = node.params<ArmTrajectoryParams>();
  PreparedAction out;
  out.report.actionId = node.id;
  std::optional<Pose> goal;
  if (p.targetMode == TargetMode::FrameRelativeHandPose) {
    std::string detail;
    const auto frame = lookupFrame(world, p.frameName, &detail);
    if (!frame) {
      out.report.entryPassed = false;
      out.report.detail = detail;
      return out;
    }
    goal = compose(*frame, *p.handPose);
    double residual = 0.0;
    if (!reachable(world, p.side, *goal, tol, &residual)) {
      out.report.entryPassed = false;
      out.report.detail = "hand pose unreachable by " + std::string(toString(p.side)) + " arm (residual " +
                          fmt(residual) + " m)";
      return out;
    }
  }
  out.executor = std::make_unique<ArmExecutor>(p, goal, tol);
  return out;
}

// ---------------------------------------------------------------------------

class ScrewExecutor : public ActionExecutor {
 public:
  ScrewExecutor(const ScrewTrajectoryParams& p, Vec3 origin, Vec3 direction, ExitTolerance tol)
      : params_(p), origin_(std::move(origin)), direction_(std::move(direction)), tol_(tol) {}

  std::vector<TimedPose> generate(const Pose& start) const {
    return generateScrewTrajectory(start, origin_, direction_, params_.revolutionAngleRad, params_.axialTranslationM,
                                   params_.durationS, params_.sampleCount);
  }

  void start(SimWorld& world) override {
    // Generated from the actual hand pose so an imperfect grasp is preserved.
    samples_ = generate(world.robot().handPoses[index(params_.side)]);
    world.commandHandTrajectory(params_.side, samples_);
  }

  double nominalDuration() const override { return params_.durationS; }

  ExitCheck poll(SimWorld& world, double elapsed) override {
    const TrackingSample s = track(world, elapsed);
    return trajectoryExit(elapsed, nominalDuration(), s.cartesianDistanceToGoal, s.orientationErrorRad, tol_);
  }

  TrackingSample track(const SimWorld& world, double elapsed) const override {
    TrackingSample s;
    s.nominalTimeRemaining = remaining(nominalDuration(), elapsed);
    if (samples_.empty()) return s;
    const Pose& g = samples_.back().pose;
    const Pose& hand = world.robot().handPoses[index(params_.side)];
    s.cartesianDistanceToGoal = (hand.position - g.position).norm();
    s.orientationErrorRad = angleBetween(hand.orientation, g.orientation);
    return s;
  }

  std::vector<TimedPose> preview() const override { return samples_; }

 private:
  ScrewTrajectoryParams params_;
  Vec3 origin_;
  Vec3 direction_;
  ExitTolerance tol_;
  std::vector<TimedPose> samples_;
};

PreparedAction prepareScrew(const BehaviorNode& node, const SimWorld& world, const ExitTolerance& tol) {
  const auto& p = node.params<ScrewTrajectoryParams>();
  PreparedAction out;
  out.report.actionId = node.id;
  std::string detail;
  const auto frame = lookupFrame(world, p.frameName, &detail);
  if (!frame) {
    out.report.entryPassed = false;
    out.report.detail = detail;
    return out;
  }
  const Vec3 origin = frame->transformPoint(p.axisOrigin);
  const Vec3 direction = frame->rotateVector(p.axisDirection.normalized());
  auto exec = std::make_unique<ScrewExecutor>(p, origin, direction, tol);
  // A welded hand is carried by the mechanism; only a free hand must reach the end pose.
  if (!world.welded(p.side)) {
    const auto samples = exec->generate(world.robot().handPoses[index(p.side)]);
    double residual = 0.0;
    if (!reachable(world, p.side, samples.back().pose, tol, &residual)) {
      out.report.entryPassed = false;
      out.report.detail = "screw end pose unreachable (residual " + fmt(residual) + " m)";
      return out;
    }
  }
  out.executor = std::move(exec);
  return out;
}

// ---------------------------------------------------------------------------

class TorsoExecutor : public ActionExecutor {
 public:
  TorsoExecutor(const ChestPelvisTrajectoryParams& p, ExitTolerance tol) : params_(p), tol_(tol) {}

  void start(SimWorld& world) override {
    if (params_.bodyPart == BodyPart::Chest)
      world.commandChestYaw(params_.yawRad, params_.trajectoryTimeS);
    else
      world.commandPelvisHeight(params_.heightOffsetM, params_.trajectoryTimeS);
  }

  double nominalDuration() const override { return params_.trajectoryTimeS; }

  ExitCheck poll(SimWorld& world, double elapsed) override {
    const TrackingSample s = track(world, elapsed);
    return trajectoryExit(elapsed, nominalDuration(), s.cartesianDistanceToGoal, s.orientationErrorRad, tol_);
  }

  TrackingSample track(const SimWorld& world, double elapsed) const override {
    TrackingSample s;
    if (params_.bodyPart == BodyPart::Chest)
      s.orientationErrorRad = std::abs(wrapAngle(world.robot().chestYaw - params_.yawRad));
    else
      s.cartesianDistanceToGoal = std::abs(world.robot().pelvisHeightOffset - params_.heightOffsetM);
    s.nominalTimeRemaining = remaining(nominalDuration(), elapsed);
    return s;
  }

 private:
  ChestPelvisTrajectoryParams params_;
  ExitTolerance tol_;
};

// ---------------------------------------------------------------------------

class HandExecutor : public ActionExecutor {
 public:
  explicit HandExecutor(const HandConfigurationParams& p) : params_(p) {}

  void start(SimWorld& world) override {
    switch (params_.configuration) {
      case HandConfiguration::Closed:
        world.closeHand(params_.side);
        break;
      case HandConfiguration::Open:
        world.openHand(params_.side);
        break;
      case HandConfiguration::Custom:
        world.setHandConfiguration(params_.side, HandConfiguration::Custom);
        break;
    }
  }

  double nominalDuration() const override { return params_.durationS; }

  ExitCheck poll(SimWorld& world, double elapsed) override {
    // Fingers keep closing over the whole duration; a grip that drifts into range still welds.
    if (params_.configuration == HandConfiguration::Closed) world.closeHand(params_.side);
    if (elapsed < params_.durationS - 1e-9) return {};
    if (params_.configuration == HandConfiguration::Closed && !world.welded(params_.side))
      return {ExitResult::Failure, "no grasp: grip " + fmt(world.distanceToGrip(params_.side)) + " m from " +
                                       std::string(toString(params_.side)) + " hand"};
    return {ExitResult::Success, {}};
  }

  TrackingSample track(const SimWorld& world, double elapsed) const override {
    TrackingSample s;
    if (params_.configuration == HandConfiguration::Closed && !world.welded(params_.side))
      s.cartesianDistanceToGoal = world.distanceToGrip(params_.side);
    s.nominalTimeRemaining = remaining(nominalDuration(), elapsed);
    return s;
  }

 private:
  HandConfigurationParams params_;
};

class WaitExecutor : public ActionExecutor {
 public:
  explicit WaitExecutor(double duration) : duration_(duration) {}
  void start(SimWorld&) override {}
  double nominalDuration() const override { return duration_; }
  ExitCheck poll(SimWorld&, double elapsed) override {
    if (elapsed < duration_ - 1e-9) return {};
    return {ExitResult::Success, {}};
  }
  TrackingSample track(const SimWorld&, double elapsed) const override {
    TrackingSample s;
    s.nominalTimeRemaining = remaining(duration_, elapsed);
    return s;
  }

 private:
  double duration_;
};

}  // namespace

PreparedAction prepareAction(const BehaviorNode& action, const SimWorld& world, const ExitTolerance& tolerance) {
  switch (action.kind) {
    case NodeKind::FootstepPlanAction:
      return prepareFootsteps(action, world, tolerance);
    case NodeKind::ArmTrajectoryAction:
      return prepareArm(action, world, tolerance);
    case NodeKind::ScrewTrajectoryAction:
      return prepareScrew(action, world, tolerance);
    case NodeKind::ChestPelvisTrajectoryAction: {
      PreparedAction out;
      out.report.actionId = action.id;
      out.executor = std::make_unique<TorsoExecutor>(action.params<ChestPelvisTrajectoryParams>(), tolerance);
      return out;
    }
    case NodeKind::HandConfigurationAction: {
      PreparedAction out;
      out.report.actionId = action.id;
      out.executor = std::make_unique<HandExecutor>(action.params<HandConfigurationParams>());
      return out;
    }
    case NodeKind::WaitAction: {
      PreparedAction out;
      out.report.actionId = action.id;
      out.executor = std::make_unique<WaitExecutor>(action.params<WaitParams>().durationS);
      return out;
    }
    default:
      break;
  }
  PreparedAction out;
  out.report.actionId = action.id;
  out.report.entryPassed = false;
  out.report.detail = "not an action node";
  return out;
}

}  // namespace doorway
