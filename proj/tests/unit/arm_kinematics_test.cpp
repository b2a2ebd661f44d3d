#include <gtest/gtest.h>

#include "doorway/actions/arm_kinematics.hpp"
#include "test_support.hpp"

using namespace doorway;
using namespace doorway::test;

namespace {
JointVector randomJoints(std::mt19937_64& rng, double limit = 2.6) {
  std::uniform_real_distribution<double> u(-limit, limit);
  JointVector q;
  for (int i = 0; i < 7; ++i) q[i] = u(rng);
  return q;
}

ArmChain offsetChain() {
  ArmChain c;
  c.base = {Vec3(0.1, -0.22, 1.2), yawQuat(0.3)};
  return c;
}
}  // namespace

TEST(ArmKinematics, ZeroConfigurationPointsAlongBaseX) {
  ArmChain c;
  const Pose hand = forwardKinematics(c, JointVector::Zero());
  EXPECT_TRUE(hand.position.isApprox(Vec3(c.reach(), 0, 0)));
}

TEST(ArmKinematics, JacobianMatchesCentralDifferences) {
  std::mt19937_64 rng(30);
  const ArmChain c = offsetChain();
  const double h = 1e-6;
  for (int trial = 0; trial < 100; ++trial) {
    const JointVector q = randomJoints(rng);
    const ArmJacobian j = jacobian(c, q);
    const Pose p0 = forwardKinematics(c, q);
    for (int i = 0; i < 7; ++i) {
      JointVector qp = q, qm = q;
      qp[i] += h;
      qm[i] -= h;
      const Pose pp = forwardKinematics(c, qp), pm = forwardKinematics(c, qm);
      const Vec3 dp = (pp.position - pm.position) / (2 * h);
      const Vec3 dw = (rotationError(p0.orientation, pp.orientation) - rotationError(p0.orientation, pm.orientation)) / (2 * h);
      EXPECT_LT((dp - j.block<3, 1>(0, i)).cwiseAbs().maxCoeff(), 1e-5);
      EXPECT_LT((dw - j.block<3, 1>(3, i)).cwiseAbs().maxCoeff(), 1e-5);
    }
  }
}

TEST(ArmIk, FixedPointReturnsSeed) {
  std::mt19937_64 rng(31);
  const ArmChain c = offsetChain();
  const JointVector seed = randomJoints(rng, 2.0);
  const IkResult r = solveArmIK(c, forwardKinematics(c, seed), seed);
  EXPECT_TRUE(r.converged);
  EXPECT_EQ(r.iterations, 0);
  EXPECT_EQ(r.joints, seed);
}

TEST(ArmIk, OneMillimeterTargetConvergesQuickly) {
  std::mt19937_64 rng(32);
  const ArmChain c = offsetChain();
  for (int trial = 0; trial < 20; ++trial) {
    JointVector seed = homeJointAngles();
    seed[0] += 0.3 * trial / 20.0;
    Pose target = forwardKinematics(c, seed);
    target.position += 1e-3 * (randomQuat(rng) * Vec3::UnitX());
    const IkResult r = solveArmIK(c, target, seed);
    EXPECT_TRUE(r.converged);
    EXPECT_LE(r.iterations, 5);
  }
}

TEST(ArmIk, OutOfReachResidualMatchesSphereDistance) {
  const ArmChain c = offsetChain();
  for (double extra : {0.1, 0.3, 1.0, 9.4}) {
    const Vec3 dir = (c.base.orientation * Vec3(1, -0.3, 0.2)).normalized();
    const Vec3 targetPos = c.shoulder() + (c.reach() + extra) * dir;
    // Orientation pointing along the reach direction so a fully stretched arm is optimal.
    const Quat q = Quat::FromTwoVectors(Vec3::UnitX(), dir);
    const IkResult r = solveArmIK(c, {targetPos, q}, homeJointAngles());
    EXPECT_FALSE(r.converged);
    EXPECT_NEAR(r.positionError, extra, 0.1 * extra) << "extra " << extra;
  }
}

TEST(ArmIk, ReachableTargetsConverge) {
  std::mt19937_64 rng(33);
  const ArmChain c = offsetChain();
  int ok = 0;
  const int n = 300;
  for (int i = 0; i < n; ++i) {
    const IkResult r = solveArmIK(c, forwardKinematics(c, randomJoints(rng)), homeJointAngles());
    ok += r.positionError < 1e-3;
  }
  EXPECT_GE(ok, n * 99 / 100);
}
