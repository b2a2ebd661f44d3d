#pragma once

#include <Eigen/Core>

#include "doorway/geometry/pose.hpp"

namespace doorway {

using JointVector = Eigen::Matrix<double, 7, 1>;
using ArmJacobian = Eigen::Matrix<double, 6, 7>;

/// Seven revolute joints: shoulder yaw/pitch/roll, elbow pitch, wrist
/// roll/pitch/yaw. At zero the arm points straight along the base X axis.
struct ArmChain {
  Pose base;  ///< shoulder frame in world
  double upperArm = 0.25;
  double forearm = 0.25;
  double hand = 0.08;
  double jointLimit = 2.6;

  double reach() const { return upperArm + forearm + hand; }
  Vec3 shoulder() const { return base.position; }
};

/// Hand pose in the chain base frame.
Pose forwardKinematicsLocal(const ArmChain& chain, const JointVector& q);
/// Hand pose in world.
Pose forwardKinematics(const ArmChain& chain, const JointVector& q);

/// Geometric Jacobian in world coordinates: rows 0-2 linear, 3-5 angular.
ArmJacobian jacobian(const ArmChain& chain, const JointVector& q);

struct IkOptions {
  double damping = 0.05;
  double maxStep = 0.2;
  int maxIterations = 200;
  int restarts = 16;  ///< extra fixed seeds tried after the caller's seed fails
  double positionTolerance = 1e-3;
  double orientationTolerance = 0.5 * 3.14159265358979323846 / 180.0;
};

struct IkResult {
  JointVector joints = JointVector::Zero();
  bool converged = false;
  int iterations = 0;
  double positionError = 0.0;
  double orientationError = 0.0;
};

/// Damped least squares on the full 6-D pose error, at most maxIterations per
/// seed. When the caller's seed does not converge, a fixed list of restart
/// seeds is tried. Returns the best iterate seen; the convergence flag is set
/// only when both tolerances are met. `iterations` counts all descent steps.
IkResult solveArmIK(const ArmChain& chain, const Pose& targetHandPose, const JointVector& seed,
                    const IkOptions& options = {});

/// Nominal "hands ready" posture used at scenario start.
JointVector homeJointAngles();

}  // namespace doorway
