#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "doorway/sim/world.hpp"

using namespace doorway;

namespace {

DoorConfig doorConfig(MechanismType m, SwingDirection s = SwingDirection::Push, Side hinge = Side::Right) {
  DoorConfig c;
  c.mechanismType = m;
  c.swingDirection = s;
  c.hingeSide = hinge;
  return c;
}

ScenarioConfig scenario(double x = -1.5, double y = 0.0, double stepWidth = 0.24) {
  ScenarioConfig s;
  s.name = "test";
  s.robotStart.xM = x;
  s.robotStart.yM = y;
  s.robotStart.stepWidthM = stepWidth;
  return s;
}

std::vector<FootstepCommand> straightSteps(const Stance& start, double stepLength, int count, double stepWidth) {
  std::vector<FootstepCommand> out;
  Pose mid = start.midPose();
  for (int i = 0; i < count; ++i) {
    const Side side = i % 2 == 0 ? Side::Left : Side::Right;
    mid.position.x() += stepLength / 2.0;
    if (i == count - 1) mid.position.x() += stepLength / 2.0;
    const Stance st = stanceAround(mid, stepWidth);
    out.push_back({side, st.foot(side)});
  }
  // final step brings the trailing foot alongside
  const Side last = count % 2 == 0 ? Side::Left : Side::Right;
  out.push_back({last, stanceAround(mid, stepWidth).foot(last)});
  return out;
}

Door openedPushDoor(double phi, double closerRate) {
  DoorConfig c = doorConfig(MechanismType::LeverHandle);
  c.unlatched = true;
  c.springCloserRateRadS = closerRate;
  Door door(c);
  door.step(0.01, {door.handlePose(phi, 0.0), {}});
  return door;
}

}  // namespace

TEST(Walking, OneStepTakesTransferPlusSwing) {
  WalkingController w(stanceAround(Pose::identity(), 0.24));
  w.enqueue({{Side::Left, Pose::fromXyYaw(0.3, 0.12, 0.0)}});
  const double dt = 1.0 / 120.0;
  for (int i = 0; i < 101; ++i) w.advance(dt);
  EXPECT_EQ(w.state().stepsTaken, 0);
  w.advance(dt);
  EXPECT_EQ(w.state().stepsTaken, 1);
  EXPECT_TRUE(w.idle());
  EXPECT_NEAR(w.state().feet.left.position.x(), 0.3, 1e-12);
}

TEST(Walking, SupportAlternatesAndSwayIsBounded) {
  const double width = 0.24;
  const Stance start = stanceAround(Pose::identity(), width);
  WalkingController w(start);
  w.enqueue(straightSteps(start, 0.3, 3, width));
  std::vector<SupportSide> supports;
  double peak = 0.0;
  while (!w.idle()) {
    w.advance(1.0 / 120.0);
    const auto& s = w.state();
    if (s.state == WalkingPhase::Swing && (supports.empty() || supports.back() != s.supportSide))
      supports.push_back(s.supportSide);
    EXPECT_LE(std::abs(s.comLateralOffset), width / 2.0 + 1e-12);
    peak = std::max(peak, std::abs(s.comLateralOffset));
  }
  EXPECT_EQ(supports, (std::vector<SupportSide>{SupportSide::Right, SupportSide::Left, SupportSide::Right, SupportSide::Left}));
  EXPECT_NEAR(peak, width / 2.0, 1e-3);
}

TEST(Door, LeverUnlatchesPastThreshold) {
  Door door(doorConfig(MechanismType::LeverHandle));
  door.step(0.01, {door.handlePose(0.0, 0.4), {}});
  EXPECT_TRUE(door.state().latched);
  EXPECT_NEAR(door.state().handleAngle, 0.4, 1e-9);
  door.step(0.01, {door.handlePose(0.0, 0.6), {}});
  EXPECT_FALSE(door.state().latched);
}

TEST(Door, HandleFollowsScrewAboutItsAxis) {
  Door door(doorConfig(MechanismType::LeverHandle));
  const Pose rest = door.handlePose(0.0, 0.0);
  const Pose target = compose(screwDisplacement(rest.position, door.handleAxis(0.0), 0.3, 0.0), rest);
  door.step(0.01, {target, {}});
  EXPECT_NEAR(door.state().handleAngle, 0.3, 1e-9);
  EXPECT_NEAR(door.state().panelAngle, 0.0, 1e-12);
}

TEST(Door, KnobAtRestStaysLatchedAndPullHandleHasNoLatch) {
  Door knob(doorConfig(MechanismType::Knob));
  for (int i = 0; i < 100; ++i) knob.step(0.01, {knob.handlePose(0.0, 0.0), {}});
  EXPECT_TRUE(knob.state().latched);
  EXPECT_EQ(knob.state().panelAngle, 0.0);
  Door pull(doorConfig(MechanismType::PullHandle, SwingDirection::Pull));
  EXPECT_FALSE(pull.state().latched);
}

TEST(Door, LatchedDoorDoesNotOpen) {
  Door door(doorConfig(MechanismType::LeverHandle));
  door.step(0.01, {door.handlePose(0.5, 0.0), {}});
  EXPECT_EQ(door.state().panelAngle, 0.0);
}

TEST(Door, SpringClosesAtConfiguredRateAndRelatches) {
  Door door = openedPushDoor(0.5, 0.8);
  ASSERT_NEAR(door.state().panelAngle, 0.5, 1e-9);
  const double dt = 1.0 / 120.0;
  door.step(dt, {});
  EXPECT_NEAR(door.state().panelAngle, 0.5 - 0.8 * dt, 1e-12);
  for (int i = 0; i < 200; ++i) door.step(dt, {});
  EXPECT_EQ(door.state().panelAngle, 0.0);
  EXPECT_TRUE(door.state().latched);
}

TEST(Door, SphereOnApproachSideHoldsDoorAgainstCloser) {
  Door door = openedPushDoor(0.8, 0.5);
  const double rho = 0.5;
  const double psi = 0.4;
  const Vec2 dir = door.panelDirection(psi);
  const Vec2 p = door.hinge() + rho * dir;
  const ContactSphere s{2, Vec3(p.x(), p.y(), 1.2), 0.08, false};
  for (int i = 0; i < 240; ++i) door.step(1.0 / 120.0, {std::nullopt, {s}});
  EXPECT_NEAR(door.state().panelAngle, psi + std::asin(0.08 / rho), 1e-9);
}

TEST(Door, BodyPushesDoorOpenFromApproachSide) {
  DoorConfig c = doorConfig(MechanismType::LeverHandle);
  c.unlatched = true;
  Door door(c);
  const double rho = 0.6;
  for (double psi = -0.3; psi <= 0.7 + 1e-9; psi += 0.01) {
    const Vec2 p = door.hinge() + rho * door.panelDirection(psi);
    door.step(1.0 / 120.0, {std::nullopt, {{3, Vec3(p.x(), p.y(), 1.2), 0.08, false}}});
    EXPECT_GE(door.state().panelAngle, std::clamp(psi + std::asin(0.08 / rho), 0.0, 1.75) - 1e-9);
  }
  EXPECT_NEAR(door.state().panelAngle, 0.7 + std::asin(0.08 / rho), 1e-6);
}

TEST(Door, SwingSideSphereWinsConflict) {
  Door door = openedPushDoor(0.6, 0.0);
  const Vec2 ahead = door.hinge() + 0.5 * door.panelDirection(0.9);
  const Vec2 behind = door.hinge() + 0.5 * door.panelDirection(0.3);
  ContactSphere front{2, Vec3(ahead.x(), ahead.y(), 1.2), 0.08, false};
  ContactSphere back{3, Vec3(behind.x(), behind.y(), 1.2), 0.08, false};
  door.step(0.01, {std::nullopt, {front, back}});
  // move the swing-side sphere past the approach-side bound
  const Vec2 squeeze = door.hinge() + 0.5 * door.panelDirection(0.35);
  front.center = Vec3(squeeze.x(), squeeze.y(), 1.2);
  door.step(0.01, {std::nullopt, {front, back}});
  EXPECT_NEAR(door.state().panelAngle, 0.35 - std::asin(0.08 / 0.5), 1e-9);
}

TEST(Collision, ShoulderWidthRule) {
  DoorState door;
  door.frameWidth = 1.0;
  door.hingeSide = Side::Right;
  door.hingeWorldPose = Pose::fromTranslation(Vec3(0.0, -0.5, 0.0));
  RobotState robot;
  robot.shoulderSpan = 0.85;
  robot.pelvisPose = Pose::fromTranslation(Vec3(0.0, 0.0, 0.85));
  EXPECT_FALSE(doorFrameCollisionCheck(robot, door).collision);
  EXPECT_NEAR(doorFrameCollisionCheck(robot, door).clearance, 0.075, 1e-12);
  robot.pelvisPose.position.y() = 0.12;
  EXPECT_TRUE(doorFrameCollisionCheck(robot, door).collision);
  robot.pelvisPose.position.y() = -0.07;
  EXPECT_FALSE(doorFrameCollisionCheck(robot, door).collision);
  robot.pelvisPose.position = Vec3(-0.31, 0.12, 0.85);
  EXPECT_FALSE(doorFrameCollisionCheck(robot, door).collision);
  robot.pelvisPose.position = Vec3(0.3, 0.12, 0.85);
  EXPECT_TRUE(doorFrameCollisionCheck(robot, door).collision);
}

namespace {
bool walkThroughCollides(double stepWidth) {
  SimWorld world(scenario(-1.0, 0.0, stepWidth));
  const Stance start{world.robot().footPoses[0], world.robot().footPoses[1]};
  world.queueFootsteps(straightSteps(start, 0.3, 9, stepWidth));
  bool collided = false;
  while (!world.walking().idle()) {
    world.step();
    collided = collided || world.collision().collision;
  }
  EXPECT_GT(world.progress(), 0.3);
  return collided;
}
}  // namespace

TEST(Collision, NarrowStepWidthClearsTheFrame) {
  EXPECT_TRUE(walkThroughCollides(0.24));
  EXPECT_FALSE(walkThroughCollides(0.14));
}

TEST(SimWorld, InitialState) {
  SimWorld world(scenario());
  EXPECT_NEAR(world.progress(), -1.5, 1e-12);
  EXPECT_NEAR(world.robot().shoulderSpan, 0.85, 1e-12);
  EXPECT_NEAR(world.robot().pelvisPose.position.z(), 0.85, 1e-12);
  EXPECT_NEAR(world.chestPose().position.z(), 1.2, 1e-12);
  EXPECT_TRUE(world.frames().contains("pelvis"));
  EXPECT_TRUE(world.frames().contains("chest"));
  EXPECT_FALSE(world.closeHand(Side::Left));
  EXPECT_EQ(world.handConfiguration(Side::Left), HandConfiguration::Closed);
}

TEST(SimWorld, ProgressIsZeroAtFramePlane) {
  SimWorld world(scenario(0.0));
  EXPECT_NEAR(world.progress(), 0.0, 1e-12);
}

TEST(SimWorld, IdleHandsHoldRelativeToChest) {
  SimWorld world(scenario());
  const Pose before = relative(world.chestPose(), world.robot().handPoses[0]);
  world.commandChestYaw(0.3, 0.5);
  for (int i = 0; i < 90; ++i) world.step();
  EXPECT_FALSE(world.torsoTrajectoryActive());
  EXPECT_NEAR(world.robot().chestYaw, 0.3, 1e-12);
  const Pose after = relative(world.chestPose(), world.robot().handPoses[0]);
  EXPECT_LT((after.position - before.position).norm(), 2e-3);
}

namespace {
// Robot close to the latch side of a right-hinged push lever door.
SimWorld graspedLever(bool& welded) {
  ScenarioConfig s = scenario(-0.45, 0.15);
  s.door = doorConfig(MechanismType::LeverHandle);
  SimWorld world(s);
  const Pose grip{world.door().gripPoint(), world.door().handlePose().orientation};
  world.commandHandTrajectory(Side::Left, {{0.0, world.robot().handPoses[0]}, {1.0, grip}});
  for (int i = 0; i < 150; ++i) world.step();
  welded = world.closeHand(Side::Left);
  return world;
}
}  // namespace

TEST(SimWorld, GraspTurnAndPushOpensLeverDoor) {
  bool welded = false;
  SimWorld world = graspedLever(welded);
  ASSERT_LT(world.distanceToGrip(Side::Left), 0.05);
  ASSERT_TRUE(welded);
  const Pose weld = relative(world.door().handlePose(), world.robot().handPoses[0]);
  const Door& door = world.door();
  const Pose hand = world.robot().handPoses[0];
  world.commandHandTrajectory(Side::Left,
                              generateScrewTrajectory(hand, door.handlePose().position, door.handleAxis(0.0), 0.7, 0.0, 1.0, 20));
  for (int i = 0; i < 130; ++i) {
    world.step();
    const Pose now = relative(world.door().handlePose(), world.robot().handPoses[0]);
    ASSERT_LT((now.position - weld.position).norm(), 1e-9);
    ASSERT_LT(angleBetween(now.orientation, weld.orientation), 1e-9);
  }
  EXPECT_FALSE(world.door().state().latched);
  EXPECT_NEAR(world.door().state().handleAngle, 0.7, 1e-6);

  const Vec2 c0 = world.door().panelDirection(0.0);
  const Vec2 n0 = world.door().swingNormal(0.0);
  const Vec3 hingeAxis = Vec3(c0.x(), c0.y(), 0.0).cross(Vec3(n0.x(), n0.y(), 0.0));
  const Pose turned = world.robot().handPoses[0];
  world.commandHandTrajectory(Side::Left, generateScrewTrajectory(turned, world.door().state().hingeWorldPose.position,
                                                                  hingeAxis, 0.2, 0.0, 1.0, 20));
  for (int i = 0; i < 130; ++i) world.step();
  EXPECT_NEAR(world.door().state().panelAngle, 0.2, 1e-6);
  world.openHand(Side::Left);
  EXPECT_FALSE(world.welded(Side::Left));
}

TEST(SimWorld, StateHashIsDeterministic) {
  auto run = [](double yaw) {
    SimWorld world(scenario());
    const Stance start{world.robot().footPoses[0], world.robot().footPoses[1]};
    world.queueFootsteps(straightSteps(start, 0.3, 4, 0.24));
    world.commandChestYaw(yaw, 1.0);
    std::vector<std::uint64_t> hashes;
    for (int i = 0; i < 400; ++i) {
      world.step();
      hashes.push_back(world.stateHash());
    }
    return hashes;
  };
  const auto a = run(0.2);
  EXPECT_EQ(a, run(0.2));
  EXPECT_NE(a.back(), run(0.21).back());
  EXPECT_EQ(std::set<std::uint64_t>(a.begin(), a.end()).size(), a.size());
}
