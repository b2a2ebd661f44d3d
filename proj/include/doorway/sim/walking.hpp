#pragma once

#include <deque>
#include <vector>

#include "doorway/actions/stance.hpp"
#include "doorway/common.hpp"
#include "doorway/geometry/pose.hpp"

namespace doorway {

enum class WalkingPhase { Standing, Transfer, Swing };
enum class SupportSide { Left, Right, Both };
NLOHMANN_JSON_SERIALIZE_ENUM(WalkingPhase, {{WalkingPhase::Standing, "Standing"},
                                            {WalkingPhase::Transfer, "Transfer"},
                                            {WalkingPhase::Swing, "Swing"}})
NLOHMANN_JSON_SERIALIZE_ENUM(SupportSide, {{SupportSide::Left, "Left"}, {SupportSide::Right, "Right"}, {SupportSide::Both, "Both"}})

struct FootstepCommand {
  Side side = Side::Left;
  Pose target;
  double swingDuration = 0.6;
  double transferDuration = 0.25;
};

struct WalkingState {
  WalkingPhase state = WalkingPhase::Standing;
  std::deque<FootstepCommand> footstepQueue;
  SupportSide supportSide = SupportSide::Both;
  double stateTimer = 0.0;  ///< time spent in the current state
  Stance feet;
  Pose swingStart;
  /// Signed lateral CoM offset in the stance frame, + toward the left foot.
  double comLateralOffset = 0.0;
  int stepsTaken = 0;
};

/// Kinematic standing / transfer / swing state machine. During transfer the
/// CoM sways toward the support foot by half the foot separation, shaped as
/// a half sine over the transfer duration.
class WalkingController {
 public:
  static constexpr double kSwingHeight = 0.05;

  explicit WalkingController(Stance start);

  void enqueue(const std::vector<FootstepCommand>& steps);
  /// Drops queued steps; a swing in progress lands where it is.
  void halt();
  void advance(double dt);

  const WalkingState& state() const { return state_; }
  bool idle() const { return state_.state == WalkingPhase::Standing && state_.footstepQueue.empty(); }

  /// Ground-plane pelvis pose: feet midpoint shifted by the sway, mean foot yaw.
  Pose pelvisGround() const;
  /// Unit lateral axis of the current stance frame.
  Vec3 lateralAxis() const;

 private:
  WalkingState state_;
};

}  // namespace doorway
