#include <gtest/gtest.h>

#include <numbers>

#include "doorway/actions/screw.hpp"
#include "test_support.hpp"

using namespace doorway;
using namespace doorway::test;

TEST(Screw, IdentityScrewHoldsStartPose) {
  std::mt19937_64 rng(10);
  const Pose start = randomPose(rng);
  const auto samples = generateScrewTrajectory(start, Vec3::Zero(), Vec3::UnitZ(), 0.0, 0.0, 1.0, 11);
  ASSERT_EQ(samples.size(), 11u);
  for (const auto& s : samples) {
    EXPECT_LT(positionDistance(s.pose, start), 1e-12);
    EXPECT_LT(poseAngle(s.pose, start), 1e-9);
  }
}

TEST(Screw, FirstSampleIsStartExactly) {
  std::mt19937_64 rng(11);
  const Pose start = randomPose(rng);
  const auto samples = generateScrewTrajectory(start, Vec3(1, 2, 3), Vec3::UnitY(), 1.0, 0.3, 2.0, 5);
  EXPECT_EQ(samples.front().pose.position, start.position);
  EXPECT_EQ(samples.front().pose.orientation.coeffs(), start.orientation.coeffs());
}

TEST(Screw, PureTranslationIsLinear) {
  const Pose start = Pose::fromTranslation({0.3, 0.1, 1.0});
  const auto samples = generateScrewTrajectory(start, Vec3::Zero(), Vec3::UnitZ(), 0.0, 0.1, 1.0, 6);
  for (std::size_t k = 0; k < samples.size(); ++k) {
    const double s = static_cast<double>(k) / 5.0;
    EXPECT_NEAR(samples[k].pose.position.z(), 1.0 + 0.1 * s, 1e-12);
    EXPECT_NEAR(samples[k].time, s, 1e-12);
    EXPECT_LT(rotationAngle(samples[k].pose.orientation), 1e-12);
  }
}

TEST(Screw, QuarterTurnAboutWorldZMatchesAxisAngleOracle) {
  const Pose start = Pose::fromTranslation({1, 0, 0});
  const auto samples =
      generateScrewTrajectory(start, Vec3::Zero(), Vec3::UnitZ(), std::numbers::pi / 2, 0.0, 1.0, 3);
  // Oracle: Rodrigues' rotation of the start position and orientation.
  const Eigen::Matrix3d k = (Eigen::Matrix3d() << 0, -1, 0, 1, 0, 0, 0, 0, 0).finished();
  const Eigen::Matrix3d r = Eigen::Matrix3d::Identity() + k * std::sin(std::numbers::pi / 2) +
                            k * k * (1 - std::cos(std::numbers::pi / 2));
  const Pose& end = samples.back().pose;
  EXPECT_LT((end.position - r * start.position).norm(), 1e-12);
  EXPECT_LT((end.position - Vec3(0, 1, 0)).norm(), 1e-12);
  EXPECT_LT((end.orientation.toRotationMatrix() - r).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Screw, RejectsInvalidParameters) {
  EXPECT_THROW(generateScrewTrajectory(Pose::identity(), Vec3::Zero(), Vec3::UnitZ(), 1, 0, 0.0, 5), std::invalid_argument);
  EXPECT_THROW(generateScrewTrajectory(Pose::identity(), Vec3::Zero(), Vec3::UnitZ(), 1, 0, 1.0, 1), std::invalid_argument);
  EXPECT_THROW(generateScrewTrajectory(Pose::identity(), Vec3::Zero(), Vec3(0, 0, 2), 1, 0, 1.0, 5), std::invalid_argument);
}

TEST(Screw, RadiusPreservedOverRandomDraws) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> angle(-2 * std::numbers::pi, 2 * std::numbers::pi), d(-0.5, 0.5);
  for (int i = 0; i < 200; ++i) {
    const Pose start = randomPose(rng);
    const Vec3 origin = randomPose(rng).position, dir = randomQuat(rng) * Vec3::UnitX();
    const auto samples = generateScrewTrajectory(start, origin, dir, angle(rng), d(rng), 1.0, 20);
    const double r0 = distanceToLine(start.position, origin, dir);
    for (const auto& s : samples) EXPECT_NEAR(distanceToLine(s.pose.position, origin, dir), r0, 1e-9);
  }
}

TEST(Screw, SampleTrajectoryInterpolates) {
  const auto samples = generateScrewTrajectory(Pose::identity(), Vec3::Zero(), Vec3::UnitX(), 0.0, 1.0, 2.0, 3);
  EXPECT_NEAR(sampleTrajectory(samples, 0.5).position.x(), 0.25, 1e-12);
  EXPECT_NEAR(sampleTrajectory(samples, 5.0).position.x(), 1.0, 1e-12);
  EXPECT_NEAR(sampleTrajectory(samples, -1.0).position.x(), 0.0, 1e-12);
}
