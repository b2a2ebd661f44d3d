#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "doorway/model/behavior_tree.hpp"
#include "doorway/sim/world.hpp"

namespace doorway {

struct ExitTolerance {
  double positionM = 0.01;
  double orientationRad = 5.0 * 3.14159265358979323846 / 180.0;
  double timeoutFactor = 1.5;  ///< of the nominal duration
};

/// One live tracking value per executing action.
struct TrackingSample {
  std::int64_t tick = 0;
  NodeId actionId{};
  double cartesianDistanceToGoal = 0.0;
  double orientationErrorRad = 0.0;
  double nominalTimeRemaining = 0.0;
};
void to_json(nlohmann::json& j, const TrackingSample& s);

struct ExitCheck {
  ExitResult result = ExitResult::NotYetEvaluated;
  std::string detail;
};

/// Exit rule shared by trajectories: judged once the nominal duration has
/// passed, Failure once timeoutFactor x nominal has passed without success.
ExitCheck trajectoryExit(double elapsed, double nominal, double positionError, double orientationError,
                         const ExitTolerance& tolerance);

/// Executes one action node against the sim. Created by prepareAction once
/// the entry condition holds; started on dispatch; polled every tick.
class ActionExecutor {
 public:
  virtual ~ActionExecutor() = default;

  virtual void start(SimWorld& world) = 0;
  /// Seconds the action nominally takes; fixed once prepared.
  virtual double nominalDuration() const = 0;
  /// `elapsed` is sim time since start.
  virtual ExitCheck poll(SimWorld& world, double elapsed) = 0;
  virtual TrackingSample track(const SimWorld& world, double elapsed) const = 0;
  /// World-frame hand or foot poses the action will pass through, for previews.
  virtual std::vector<TimedPose> preview() const { return {}; }
};

struct PreparedAction {
  std::unique_ptr<ActionExecutor> executor;
  ConditionReport report;
};

/// Entry condition and executor construction. Fails with a detail string when
/// a referenced frame is missing, the IK target is out of reach, or a goal
/// stance cannot be planned.
PreparedAction prepareAction(const BehaviorNode& action, const SimWorld& world, const ExitTolerance& tolerance = {});

}  // namespace doorway
