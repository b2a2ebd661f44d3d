#include "doorway/actions/stance.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace doorway {

Pose Stance::midPose() const {
  const double yl = left.yaw(), yr = right.yaw();
  const double yaw = yr + 0.5 * wrapAngle(yl - yr);
  const Vec3 mid = 0.5 * (left.position + right.position);
  return Pose::fromXyYaw(mid.x(), mid.y(), yaw, mid.z());
}

Stance stanceAround(const Pose& midpoint, double stepWidth) {
  const Pose mid = Pose::fromXyYaw(midpoint.position.x(), midpoint.position.y(), midpoint.yaw(), midpoint.position.z());
  return {compose(mid, Pose::fromTranslation({0, 0.5 * stepWidth, 0})),
          compose(mid, Pose::fromTranslation({0, -0.5 * stepWidth, 0}))};
}

Stance snapStanceToGround(const StanceGoal& goal, const Pose& mechanismFrameInWorld, double groundHeight,
                          double stepWidth) {
  const Vec3 stand = mechanismFrameInWorld.transformPoint(goal.pointToStandAt);
  const Vec3 face = mechanismFrameInWorld.transformPoint(goal.pointToFace);
  const Eigen::Vector2d horizontal = (face - stand).head<2>();
  if (horizontal.norm() < 1e-6) throw std::invalid_argument("point to face is directly above or below point to stand at");
  const double yaw = std::atan2(horizontal.y(), horizontal.x());
  const Pose stanceFrame = Pose::fromXyYaw(stand.x(), stand.y(), yaw, groundHeight);
  const Pose adjusted = compose(stanceFrame, Pose::fromXyYaw(goal.adjustX, goal.adjustY, goal.adjustYaw));
  return stanceAround(adjusted, stepWidth);
}

namespace {

struct Planner {
  Stance current;
  std::vector<Footstep> steps;

  void place(Side side, const Pose& pose) {
    current.foot(side) = pose;
    steps.push_back({side, pose});
  }

  /// Rotates in place about the current midpoint to `targetYaw`, in
  /// increments no larger than the limit, lead foot on the turning side.
  void turnTo(double targetYaw, double width, double turnPerStep, double minTurn) {
    const Pose mid = current.midPose();
    const double delta = wrapAngle(targetYaw - mid.yaw());
    if (std::abs(delta) < std::max(1e-9, std::min(minTurn, turnPerStep))) return;
    const int n = static_cast<int>(std::ceil(std::abs(delta) / turnPerStep - 1e-12));
    const Side lead = delta > 0 ? Side::Left : Side::Right;
    for (int k = 1; k <= n; ++k) {
      const double yaw = mid.yaw() + delta * k / n;
      const Stance s = stanceAround(Pose::fromXyYaw(mid.position.x(), mid.position.y(), yaw, mid.position.z()), width);
      place(lead, s.foot(lead));
      place(opposite(lead), s.foot(opposite(lead)));
    }
  }
};

}  // namespace

std::vector<Footstep> planTurnWalkTurn(const Stance& start, const Stance& goal, const TurnWalkTurnLimits& limits) {
  if (limits.stepLength <= 0 || limits.turnPerStep <= 0) throw std::invalid_argument("step limits must be positive");
  Planner p{start, {}};
  const Pose from = start.midPose();
  const Pose to = goal.midPose();
  const Eigen::Vector2d travel = (to.position - from.position).head<2>();
  const double distance = travel.norm();

  if (distance > 1e-6) {
    double heading = std::atan2(travel.y(), travel.x());
    double direction = 1.0;
    if (distance <= limits.maxBackwardDistance &&
        std::abs(wrapAngle(heading + std::numbers::pi - from.yaw())) < std::abs(wrapAngle(heading - from.yaw()))) {
      heading = wrapAngle(heading + std::numbers::pi);
      direction = -1.0;
    }
    p.turnTo(heading, limits.stepWidth, limits.turnPerStep, limits.minTurn);

    // Leapfrog along the line; each foot moves at most stepLength per step.
    const Pose line = p.current.midPose();
    const int n = static_cast<int>(std::ceil(2.0 * distance / limits.stepLength - 1e-12));
    const Vec3 unit(std::cos(heading) * direction, std::sin(heading) * direction, 0.0);
    const Pose end = Pose::fromXyYaw(line.position.x() + unit.x() * distance, line.position.y() + unit.y() * distance,
                                     heading, line.position.z());
    const auto walkLine = [&](Planner q, const Stance& last) {
      // Stepping foot: the one not last moved, else left.
      Side side = q.steps.empty() ? Side::Left : opposite(q.steps.back().side);
      for (int k = 1; k <= n; ++k) {
        const double along = distance * k / n;
        const Pose mid = Pose::fromXyYaw(line.position.x() + unit.x() * along, line.position.y() + unit.y() * along,
                                         heading, line.position.z());
        q.place(side, k == n ? last.foot(side) : stanceAround(mid, limits.stepWidth).foot(side));
        side = opposite(side);
      }
      q.place(side, last.foot(side));
      return q;
    };
    const Planner beforeWalk = p;
    p = walkLine(beforeWalk, stanceAround(end, limits.stepWidth));
    // When no final turn is needed the last two steps land on the goal feet
    // directly, unless that would stretch a stride past the limits.
    if (std::abs(wrapAngle(to.yaw() - heading)) < std::min(limits.minTurn, limits.turnPerStep) &&
        (to.position - end.position).head<2>().norm() < 1e-6) {
      const Planner landed = walkLine(beforeWalk, goal);
      Stance prev = beforeWalk.current;
      bool within = true;
      for (std::size_t i = beforeWalk.steps.size(); i < landed.steps.size(); ++i) {
        const Footstep& f = landed.steps[i];
        const Pose& before = prev.foot(f.side);
        within = within && (f.pose.position - before.position).norm() <= limits.stepLength + 1e-9 &&
                 angleBetween(f.pose.orientation, before.orientation) <= limits.turnPerStep + 1e-9;
        prev.foot(f.side) = f.pose;
      }
      if (within) p = landed;
    }
  }

  p.turnTo(to.yaw(), limits.stepWidth, limits.turnPerStep, limits.minTurn);

  // Close onto the exact goal feet if they still differ (e.g. different width).
  for (Side s : {Side::Left, Side::Right}) {
    const Pose& want = goal.foot(s);
    const Pose& have = p.current.foot(s);
    if ((want.position - have.position).norm() > 1e-9 || angleBetween(want.orientation, have.orientation) > 1e-9)
      p.place(s, want);
  }
  return p.steps;
}

std::vector<Footstep> planDirectStance(const Stance& start, const Stance& goal, const TurnWalkTurnLimits& limits) {
  if (limits.stepLength <= 0 || limits.turnPerStep <= 0) throw std::invalid_argument("step limits must be positive");
  Planner p{start, {}};
  const Pose from = start.midPose();
  const Pose to = goal.midPose();
  const double distance = (to.position - from.position).head<2>().norm();
  const double dyaw = wrapAngle(to.yaw() - from.yaw());
  // Width changes also displace feet; include them in the per-step budget.
  const double width0 = (start.left.position - start.right.position).head<2>().norm();
  const double width1 = (goal.left.position - goal.right.position).head<2>().norm();
  const double footTravel = distance + 0.5 * std::abs(width1 - width0) + 0.5 * width1 * std::abs(dyaw);
  const int n = std::max(static_cast<int>(std::ceil(footTravel / limits.stepLength - 1e-12)),
                         static_cast<int>(std::ceil(std::abs(dyaw) / limits.turnPerStep - 1e-12)));
  if (n == 0) return {};
  const Vec3 lateral = from.orientation * Vec3::UnitY();
  const Side lead = (to.position - from.position).dot(lateral) >= 0 ? Side::Left : Side::Right;
  for (int k = 1; k <= n; ++k) {
    const double s = static_cast<double>(k) / n;
    const Vec3 pos = from.position + s * (to.position - from.position);
    const Stance st = k == n ? goal
                             : stanceAround(Pose::fromXyYaw(pos.x(), pos.y(), from.yaw() + s * dyaw, pos.z()),
                                            width0 + s * (width1 - width0));
    p.place(lead, st.foot(lead));
    p.place(opposite(lead), st.foot(opposite(lead)));
  }
  return p.steps;
}

}  // namespace doorway
