#include "doorway/sim/walking.hpp"

#include <algorithm>
#include <cmath>

namespace doorway {

namespace {
constexpr double kTimeEpsilon = 1e-9;
double smoothstep(double s) { return s * s * (3.0 - 2.0 * s); }
}  // namespace

WalkingController::WalkingController(Stance start) { state_.feet = std::move(start); }

void WalkingController::enqueue(const std::vector<FootstepCommand>& steps) {
  for (const auto& s : steps) state_.footstepQueue.push_back(s);
}

void WalkingController::halt() {
  state_.footstepQueue.clear();
  if (state_.state != WalkingPhase::Standing) {
    for (Side s : {Side::Left, Side::Right}) state_.feet.foot(s).position.z() = 0.0;
    state_.state = WalkingPhase::Standing;
    state_.supportSide = SupportSide::Both;
    state_.stateTimer = 0.0;
    state_.comLateralOffset = 0.0;
  }
}

Vec3 WalkingController::lateralAxis() const { return state_.feet.midPose().rotateVector(Vec3::UnitY()); }

Pose WalkingController::pelvisGround() const {
  Pose mid = state_.feet.midPose();
  mid.position += state_.comLateralOffset * lateralAxis();
  mid.position.z() = 0.0;
  return mid;
}

void WalkingController::advance(double dt) {
  double remaining = dt;
  while (remaining > 0.0) {
    switch (state_.state) {
      case WalkingPhase::Standing:
        if (state_.footstepQueue.empty()) return;
        state_.state = WalkingPhase::Transfer;
        state_.stateTimer = 0.0;
        state_.supportSide = SupportSide::Both;
        break;
      case WalkingPhase::Transfer: {
        const FootstepCommand& next = state_.footstepQueue.front();
        const double T = next.transferDuration;
        const double used = std::min(remaining, T - state_.stateTimer);
        state_.stateTimer += used;
        remaining -= used;
        const Side support = opposite(next.side);
        const Pose mid = state_.feet.midPose();
        const double halfSeparation =
            std::abs(relative(mid, state_.feet.foot(support)).position.y());
        const double phase = std::clamp(state_.stateTimer / T, 0.0, 1.0);
        state_.comLateralOffset = lateralSign(support) * halfSeparation * std::sin(M_PI * phase);
        if (state_.stateTimer >= T - kTimeEpsilon) {
          state_.comLateralOffset = 0.0;
          state_.state = WalkingPhase::Swing;
          state_.stateTimer = 0.0;
          state_.supportSide = support == Side::Left ? SupportSide::Left : SupportSide::Right;
          state_.swingStart = state_.feet.foot(next.side);
          if (used <= 0.0 && remaining <= 0.0) return;
        }
        break;
      }
      case WalkingPhase::Swing: {
        const FootstepCommand next = state_.footstepQueue.front();
        const double T = next.swingDuration;
        const double used = std::min(remaining, T - state_.stateTimer);
        state_.stateTimer += used;
        remaining -= used;
        const double s = std::clamp(state_.stateTimer / T, 0.0, 1.0);
        Pose foot = interpolate(state_.swingStart, next.target, smoothstep(s));
        foot.position.z() += kSwingHeight * std::sin(M_PI * s);
        state_.feet.foot(next.side) = foot;
        if (state_.stateTimer >= T - kTimeEpsilon) {
          state_.feet.foot(next.side) = next.target;
          state_.footstepQueue.pop_front();
          ++state_.stepsTaken;
          state_.stateTimer = 0.0;
          state_.supportSide = SupportSide::Both;
          state_.state = state_.footstepQueue.empty() ? WalkingPhase::Standing : WalkingPhase::Transfer;
          if (state_.state == WalkingPhase::Standing) return;
        }
        break;
      }
    }
  }
}

}  // namespace doorway
