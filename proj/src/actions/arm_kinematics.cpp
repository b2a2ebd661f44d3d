#include "doorway/actions/arm_kinematics.hpp"

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <vector>
#include <cmath>

namespace doorway {

namespace {

Quat rot(const Vec3& axis, double a) { return Quat(Eigen::AngleAxisd(a, axis)); }

struct JointFrames {
  std::array<Vec3, 7> origin;
  std::array<Vec3, 7> axis;
  Pose tip;
};

// Joint axes in their local frames, in chain order.
const std::array<Vec3, 7> kAxes = {Vec3::UnitZ(), Vec3::UnitY(), Vec3::UnitX(), Vec3::UnitY(),
                                   Vec3::UnitX(), Vec3::UnitY(), Vec3::UnitZ()};

JointFrames walk(const ArmChain& c, const JointVector& q, const Pose& base) {
  JointFrames f;
  Pose t = base;
  for (int i = 0; i < 7; ++i) {
    f.origin[i] = t.position;
    f.axis[i] = t.orientation * kAxes[i];
    t.orientation = (t.orientation * rot(kAxes[i], q[i])).normalized();
    if (i == 2) t.position += t.orientation * Vec3(c.upperArm, 0, 0);
    if (i == 3) t.position += t.orientation * Vec3(c.forearm, 0, 0);
    if (i == 6) t.position += t.orientation * Vec3(c.hand, 0, 0);
  }
  f.tip = t;
  return f;
}

}  // namespace

Pose forwardKinematicsLocal(const ArmChain& chain, const JointVector& q) { return walk(chain, q, Pose::identity()).tip; }

Pose forwardKinematics(const ArmChain& chain, const JointVector& q) { return walk(chain, q, chain.base).tip; }

ArmJacobian jacobian(const ArmChain& chain, const JointVector& q) {
  const JointFrames f = walk(chain, q, chain.base);
  ArmJacobian j;
  for (int i = 0; i < 7; ++i) {
    j.block<3, 1>(0, i) = f.axis[i].cross(f.tip.position - f.origin[i]);
    j.block<3, 1>(3, i) = f.axis[i];
  }
  return j;
}

namespace {

IkResult descend(const ArmChain& chain, const Pose& target, const JointVector& seed, const IkOptions& options) {
  IkResult best;
  double bestCost = std::numeric_limits<double>::infinity();
  JointVector q = seed.cwiseMax(-chain.jointLimit).cwiseMin(chain.jointLimit);
  const double lambda2 = options.damping * options.damping;

  for (int it = 0;; ++it) {
    const Pose hand = forwardKinematics(chain, q);
    Eigen::Matrix<double, 6, 1> e;
    e.head<3>() = target.position - hand.position;
    e.tail<3>() = rotationError(hand.orientation, target.orientation);
    const double pe = e.head<3>().norm();
    const double oe = e.tail<3>().norm();
    const double cost = pe + 0.1 * oe;
    if (cost < bestCost) {
      bestCost = cost;
      best = {q, false, it, pe, oe};
    }
    if (pe < options.positionTolerance && oe < options.orientationTolerance) {
      best = {q, true, it, pe, oe};
      return best;
    }
    if (it >= options.maxIterations) break;

    const ArmJacobian jac = jacobian(chain, q);
    const Eigen::Matrix<double, 6, 6> jjt = jac * jac.transpose() + lambda2 * Eigen::Matrix<double, 6, 6>::Identity();
    JointVector dq = jac.transpose() * jjt.ldlt().solve(e);
    const double largest = dq.cwiseAbs().maxCoeff();
    if (largest > options.maxStep) dq *= options.maxStep / largest;
    q = (q + dq).cwiseMax(-chain.jointLimit).cwiseMin(chain.jointLimit);
  }
  best.iterations = options.maxIterations;
  return best;
}

// Fallback seeds spread over the joint space, tried in order when the caller's
// seed lands in a joint-limit local minimum. Fixed so results are reproducible.
const std::vector<JointVector>& restartSeeds() {
  static const std::vector<JointVector> seeds = [] {
    std::vector<JointVector> s;
    s.push_back(JointVector::Zero());
    std::uint64_t state = 0x9e3779b97f4a7c15ull;
    for (int k = 0; k < 15; ++k) {
      JointVector q;
      for (int i = 0; i < 7; ++i) {
        state = state * 6364136223846793005ull + 1442695040888963407ull;
        q[i] = (static_cast<double>(state >> 11) / 9007199254740992.0 * 2.0 - 1.0) * 2.0;
      }
      s.push_back(q);
    }
    return s;
  }();
  return seeds;
}

}  // namespace

IkResult solveArmIK(const ArmChain& chain, const Pose& target, const JointVector& seed, const IkOptions& options) {
  IkResult best = descend(chain, target, seed, options);
  int total = best.iterations;
  for (std::size_t r = 0; r < std::min<std::size_t>(options.restarts, restartSeeds().size()) && !best.converged; ++r) {
    IkResult attempt = descend(chain, target, restartSeeds()[r], options);
    total += attempt.iterations;
    if (attempt.converged || attempt.positionError + 0.1 * attempt.orientationError <
                                 best.positionError + 0.1 * best.orientationError)
      best = attempt;
  }
  best.iterations = total;
  return best;
}

JointVector homeJointAngles() {
  JointVector q;
  q << 0.0, 1.4, 0.0, -2.4, 0.0, 1.0, 0.0;
  return q;
}

}  // namespace doorway
