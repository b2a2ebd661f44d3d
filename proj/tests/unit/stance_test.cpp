#include <gtest/gtest.h>

#include <map>
#include <numbers>

#include "doorway/actions/stance.hpp"
#include "test_support.hpp"

using namespace doorway;
using namespace doorway::test;

namespace {
double roll(const Pose& p) {
  const Vec3 z = p.orientation * Vec3::UnitZ();
  return std::acos(std::clamp(z.z(), -1.0, 1.0));
}
}  // namespace

TEST(SnapStance, AxisAligned) {
  StanceGoal g;
  g.pointToStandAt = Vec3::Zero();
  g.pointToFace = Vec3(1, 0, 0);
  const Stance s = snapStanceToGround(g, Pose::identity(), 0.0, 0.24);
  EXPECT_TRUE(s.left.position.isApprox(Vec3(0, 0.12, 0)));
  EXPECT_TRUE(s.right.position.isApprox(Vec3(0, -0.12, 0)));
  EXPECT_NEAR(s.left.yaw(), 0.0, 1e-12);
}

TEST(SnapStance, PitchedMechanismFrameStillYieldsFlatFeet) {
  StanceGoal g;
  g.pointToStandAt = Vec3(-0.6, 0.1, 0);
  g.pointToFace = Vec3(0, 0.1, 0);
  const Pose pitched{Vec3(1, 0.5, 1.0), Quat(Eigen::AngleAxisd(20.0 * std::numbers::pi / 180, Vec3::UnitY()))};
  const Stance s = snapStanceToGround(g, pitched, 0.0, 0.24);
  for (const Pose* f : {&s.left, &s.right}) {
    EXPECT_NEAR(f->position.z(), 0.0, 1e-12);
    EXPECT_LT(roll(*f), 1e-12);
  }
}

TEST(SnapStance, YawAdjustmentRotatesAboutMidpoint) {
  StanceGoal g;
  g.pointToStandAt = Vec3(0.5, 0.5, 0);
  g.pointToFace = Vec3(1.5, 0.5, 0);
  const Stance base = snapStanceToGround(g, Pose::identity(), 0.0, 0.3);
  g.adjustYaw = std::numbers::pi / 2;
  const Stance turned = snapStanceToGround(g, Pose::identity(), 0.0, 0.3);
  // Oracle: rotate the unadjusted feet 90 degrees in the plane about the midpoint.
  const Eigen::Vector2d mid(0.5, 0.5);
  const Eigen::Rotation2Dd r(std::numbers::pi / 2);
  for (Side side : {Side::Left, Side::Right}) {
    const Eigen::Vector2d expected = mid + r * (base.foot(side).position.head<2>() - mid);
    EXPECT_LT((turned.foot(side).position.head<2>() - expected).norm(), 1e-12);
    EXPECT_NEAR(wrapAngle(turned.foot(side).yaw() - base.foot(side).yaw()), std::numbers::pi / 2, 1e-12);
  }
}

TEST(SnapStance, CoincidentPointsRejected) {
  StanceGoal g;
  g.pointToStandAt = Vec3(0, 0, 0);
  g.pointToFace = Vec3(0, 0, 1);
  EXPECT_THROW(snapStanceToGround(g, Pose::identity(), 0.0, 0.24), std::invalid_argument);
}

namespace {
Stance stanceAt(double x, double y, double yaw, double width = 0.24) {
  return stanceAround(Pose::fromXyYaw(x, y, yaw), width);
}

void expectLimits(const Stance& start, const std::vector<Footstep>& steps, const TurnWalkTurnLimits& lim) {
  std::map<Side, Pose> last{{Side::Left, start.left}, {Side::Right, start.right}};
  for (const auto& s : steps) {
    EXPECT_LE((s.pose.position - last[s.side].position).norm(), lim.stepLength + 1e-9);
    EXPECT_LE(std::abs(wrapAngle(s.pose.yaw() - last[s.side].yaw())), lim.turnPerStep + 1e-9);
    last[s.side] = s.pose;
  }
}

Stance finalStance(const Stance& start, const std::vector<Footstep>& steps) {
  Stance s = start;
  for (const auto& f : steps) s.foot(f.side) = f.pose;
  return s;
}
}  // namespace

TEST(TurnWalkTurn, GoalEqualsStartIsEmpty) {
  const Stance s = stanceAt(0.2, -0.1, 0.3);
  EXPECT_TRUE(planTurnWalkTurn(s, s, {}).empty());
}

TEST(TurnWalkTurn, StraightAheadHandCount) {
  TurnWalkTurnLimits lim;
  lim.stepLength = 0.5;
  const auto steps = planTurnWalkTurn(stanceAt(0, 0, 0), stanceAt(1, 0, 0), lim);
  // 4 alternating forward steps plus one closing step.
  ASSERT_EQ(steps.size(), 5u);
  for (std::size_t i = 1; i < steps.size(); ++i) EXPECT_NE(steps[i].side, steps[i - 1].side);
  expectLimits(stanceAt(0, 0, 0), steps, lim);
  const Stance end = finalStance(stanceAt(0, 0, 0), steps);
  EXPECT_LT((end.midPose().position - Vec3(1, 0, 0)).norm(), 0.01);
}

TEST(TurnWalkTurn, TurnAroundIsMonotoneAndBounded) {
  TurnWalkTurnLimits lim;
  const Stance start = stanceAt(0, 0, 0);
  const Stance goal = stanceAt(0, 0, std::numbers::pi - 1e-3);
  const auto steps = planTurnWalkTurn(start, goal, lim);
  ASSERT_FALSE(steps.empty());
  double prev = 0.0;
  for (const auto& s : steps) {
    const double y = s.pose.yaw();
    EXPECT_GE(y, prev - 1e-12);
    prev = y;
  }
  EXPECT_LE(steps.size() / 2, static_cast<std::size_t>(std::ceil(std::numbers::pi / lim.turnPerStep)));
  expectLimits(start, steps, lim);
}

TEST(TurnWalkTurn, RandomGoalsRespectLimitsAndLandOnGoal) {
  std::mt19937_64 rng(20);
  std::uniform_real_distribution<double> xy(-3, 3), yaw(-std::numbers::pi, std::numbers::pi);
  TurnWalkTurnLimits lim;
  for (int i = 0; i < 500; ++i) {
    const Stance start = stanceAt(xy(rng), xy(rng), yaw(rng));
    const Stance goal = stanceAt(xy(rng), xy(rng), yaw(rng));
    const auto steps = planTurnWalkTurn(start, goal, lim);
    expectLimits(start, steps, lim);
    const Stance end = finalStance(start, steps);
    for (Side side : {Side::Left, Side::Right}) {
      EXPECT_LT((end.foot(side).position - goal.foot(side).position).norm(), 0.01);
      EXPECT_LT(std::abs(wrapAngle(end.foot(side).yaw() - goal.foot(side).yaw())), std::numbers::pi / 180);
    }
  }
}

TEST(DirectStance, ShortBackstepRespectsLimits) {
  TurnWalkTurnLimits lim;
  lim.stepLength = 0.2;
  const Stance start = stanceAt(0, 0, 0), goal = stanceAt(-0.3, 0.1, 0.2, 0.3);
  const auto steps = planDirectStance(start, goal, lim);
  expectLimits(start, steps, lim);
  const Stance end = finalStance(start, steps);
  EXPECT_LT((end.left.position - goal.left.position).norm(), 1e-12);
  EXPECT_LT((end.right.position - goal.right.position).norm(), 1e-12);
}
