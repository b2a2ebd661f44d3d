#include "doorway/actions/screw.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace doorway {

Pose screwDisplacement(const Vec3& axisOrigin, const Vec3& axisDirection, double angle, double translation) {
  const Quat r(Eigen::AngleAxisd(angle, axisDirection));
  return {axisOrigin - r * axisOrigin + translation * axisDirection, r};
}

std::vector<TimedPose> generateScrewTrajectory(const Pose& start, const Vec3& axisOrigin, const Vec3& axisDirection,
                                               double revolutionAngle, double axialTranslation, double duration,
                                               int sampleCount) {
  if (!(duration > 0.0)) throw std::invalid_argument("screw trajectory duration must be positive");
  if (sampleCount < 2) throw std::invalid_argument("screw trajectory needs at least two samples");
  const double n = axisDirection.norm();
  if (std::abs(n - 1.0) > 1e-6) throw std::invalid_argument("screw axis direction must be unit length");
  const Vec3 dir = axisDirection / n;

  std::vector<TimedPose> samples;
  samples.reserve(static_cast<std::size_t>(sampleCount));
  samples.push_back({0.0, start});
  for (int k = 1; k < sampleCount; ++k) {
    const double s = static_cast<double>(k) / (sampleCount - 1);
    samples.push_back({s * duration, compose(screwDisplacement(axisOrigin, dir, s * revolutionAngle, s * axialTranslation), start)});
  }
  return samples;
}

Pose sampleTrajectory(const std::vector<TimedPose>& samples, double t) {
  if (samples.empty()) throw std::invalid_argument("empty trajectory");
  if (t <= samples.front().time) return samples.front().pose;
  if (t >= samples.back().time) return samples.back().pose;
  auto hi = std::upper_bound(samples.begin(), samples.end(), t,
                             [](double v, const TimedPose& s) { return v < s.time; });
  auto lo = hi - 1;
  const double s = (t - lo->time) / (hi->time - lo->time);
  return interpolate(lo->pose, hi->pose, s);
}

double distanceToLine(const Vec3& point, const Vec3& lineOrigin, const Vec3& lineDirection) {
  const Vec3 d = point - lineOrigin;
  return (d - d.dot(lineDirection) * lineDirection).norm();
}

}  // namespace doorway
