#pragma once

#include <string>
#include <vector>

#include "doorway/geometry/pose.hpp"

namespace doorway {

/// Directed line in space. Direction is unit length.
struct ScrewAxis {
  Vec3 origin = Vec3::Zero();
  Vec3 direction = Vec3::UnitZ();
  std::string frameName = "world";
};

struct TimedPose {
  double time = 0.0;
  Pose pose;
};

/// Rotation by `angle` about the axis line followed by `translation` along it.
Pose screwDisplacement(const Vec3& axisOrigin, const Vec3& axisDirection, double angle, double translation);

/// Helical hand trajectory generated from the hand pose at execution start.
/// The axis must already be expressed in the same frame as `start`.
/// Sample k sits at phase k/(n-1); sample 0 is `start` exactly.
std::vector<TimedPose> generateScrewTrajectory(const Pose& start, const Vec3& axisOrigin, const Vec3& axisDirection,
                                               double revolutionAngle, double axialTranslation, double duration,
                                               int sampleCount);

/// Pose along a sampled trajectory at time t, interpolating between samples.
Pose sampleTrajectory(const std::vector<TimedPose>& samples, double t);

double distanceToLine(const Vec3& point, const Vec3& lineOrigin, const Vec3& lineDirection);

}  // namespace doorway
