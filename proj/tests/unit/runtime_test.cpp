#include <gtest/gtest.h>

#include <cmath>
#include <functional>

#include "doorway/fixtures/reference.hpp"
#include "doorway/runtime/runtime.hpp"

using namespace doorway;

namespace {

ScenarioConfig quietScenario() { return buildReferenceScenario(referenceVariant("right-push-bar")); }

BehaviorNode sequenceOf(std::vector<BehaviorNode> actions) {
  BehaviorNode root;
  root.id = NodeId{1};
  root.kind = NodeKind::ActionSequence;
  root.name = "root";
  root.parameters = SequenceParams{};
  std::int64_t id = 2;
  std::optional<NodeId> prev;
  for (auto& a : actions) {
    a.id = NodeId{id++};
    a.executeAfterId = prev;
    prev = a.id;
    root.children.push_back(std::move(a));
  }
  return root;
}

BehaviorNode armTo(const Pose& target, std::string frame = "world", Side side = Side::Left) {
  BehaviorNode a;
  a.kind = NodeKind::ArmTrajectoryAction;
  a.name = "Reach out";
  ArmTrajectoryParams p;
  p.side = side;
  p.targetMode = TargetMode::FrameRelativeHandPose;
  p.handPose = target;
  p.frameName = std::move(frame);
  p.trajectoryTimeS = 1.0;
  a.parameters = p;
  return a;
}

BehaviorNode walkTo(double x, double y, PlanMode mode = PlanMode::TurnWalkTurn) {
  BehaviorNode a;
  a.kind = NodeKind::FootstepPlanAction;
  a.name = "Walk";
  FootstepPlanParams p;
  p.planMode = mode;
  p.goalStance = StanceGoal{Vec3(x, y, 0.0), Vec3(x + 1.0, y, 0.0)};
  a.parameters = p;
  return a;
}

const BehaviorNode* byName(const BehaviorNode& root, const std::string& name) {
  if (root.name == name) return &root;
  for (const auto& c : root.children)
    if (auto* n = byName(c, name)) return n;
  return nullptr;
}

BehaviorNode* byName(BehaviorNode& root, const std::string& name) {
  return const_cast<BehaviorNode*>(byName(static_cast<const BehaviorNode&>(root), name));
}

bool hasToken(const std::string& events, const std::string& token) {
  std::size_t from = 0;
  while (from <= events.size()) {
    const std::size_t end = std::min(events.find(';', from), events.size());
    if (events.compare(from, end - from, token) == 0) return true;
    from = end + 1;
  }
  return false;
}

}  // namespace

TEST(TrajectoryExit, JudgedOnlyOnceNominalTimeHasPassed) {
  const ExitTolerance tol;
  EXPECT_EQ(trajectoryExit(0.5, 1.0, 0.0, 0.0, tol).result, ExitResult::NotYetEvaluated);
  EXPECT_EQ(trajectoryExit(1.0, 1.0, 0.004, 0.0, tol).result, ExitResult::Success);
  EXPECT_EQ(trajectoryExit(1.0, 1.0, 0.0, 4.9 * M_PI / 180.0, tol).result, ExitResult::Success);
  EXPECT_EQ(trajectoryExit(1.2, 1.0, 0.011, 0.0, tol).result, ExitResult::NotYetEvaluated);
  EXPECT_EQ(trajectoryExit(1.2, 1.0, 0.0, 5.1 * M_PI / 180.0, tol).result, ExitResult::NotYetEvaluated);
  const ExitCheck late = trajectoryExit(1.5, 1.0, 0.02, 0.0, tol);
  EXPECT_EQ(late.result, ExitResult::Failure);
  EXPECT_NE(late.detail.find("tracking error"), std::string::npos);
}

TEST(Entry, ArmTargetTenMetersAwayIsRejected) {
  const SimWorld world(quietScenario());
  const Pose shoulder = world.armChain(Side::Left).base;
  BehaviorNode a = armTo(compose(shoulder, Pose{Vec3(10.0, 0.0, 0.0), Quat::Identity()}));
  a.id = NodeId{5};
  const PreparedAction p = prepareAction(a, world);
  EXPECT_FALSE(p.report.entryPassed);
  EXPECT_EQ(p.executor, nullptr);
  EXPECT_NE(p.report.detail.find("unreachable"), std::string::npos) << p.report.detail;
}

TEST(Entry, MissingFrameIsNamed) {
  const SimWorld world(quietScenario());
  BehaviorNode a = armTo(Pose{}, "nowhere");
  const PreparedAction p = prepareAction(a, world);
  EXPECT_FALSE(p.report.entryPassed);
  EXPECT_NE(p.report.detail.find("'nowhere'"), std::string::npos) << p.report.detail;
}

TEST(Entry, FootstepGoalWithinPlannerRangePasses) {
  const SimWorld world(quietScenario());
  EXPECT_TRUE(prepareAction(walkTo(-0.5, 0.3), world).report.entryPassed);
  const PreparedAction far = prepareAction(walkTo(8.0, 0.0), world);
  EXPECT_FALSE(far.report.entryPassed);
  EXPECT_NE(far.report.detail.find("planner range"), std::string::npos);
}

TEST(Exit, TerminalErrorInsideToleranceSucceeds) {
  // A target 4 mm past full arm extension: the best the arm can do ends 4 mm short.
  const ScenarioConfig scenario = quietScenario();
  const ArmChain chain = SimWorld(scenario).armChain(Side::Left);
  const Pose target = compose(chain.base, Pose{Vec3(chain.reach() + 0.004, 0.0, 0.0), Quat::Identity()});
  Runtime rt(sequenceOf({armTo(target)}), scenario);
  ASSERT_EQ(rt.runToCompletion(), RunStatus::Succeeded);
  const Pose& hand = rt.world().robot().handPoses[index(Side::Left)];
  const double terminalError = (hand.position - target.position).norm();
  EXPECT_NEAR(terminalError, 0.004, 5e-4);
  EXPECT_LT(terminalError, ExitTolerance{}.positionM);
}

TEST(Tracking, FootstepDistanceIsPlanarEuclidean) {
  const ScenarioConfig scenario = quietScenario();
  const double x0 = scenario.robotStart.xM, y0 = scenario.robotStart.yM;
  Runtime rt(sequenceOf({walkTo(x0 + 0.3, y0 + 0.4, PlanMode::OnlineGoalStance)}), scenario);
  while (rt.tracking().empty()) rt.tick();
  EXPECT_NEAR(rt.tracking().front().cartesianDistanceToGoal, 0.5, 1e-9);
}

TEST(Tracking, FootstepPlotDropsOnlyAtTouchdowns) {
  const ScenarioConfig scenario = quietScenario();
  Runtime rt(sequenceOf({walkTo(scenario.robotStart.xM + 1.0, scenario.robotStart.yM)}), scenario);
  std::vector<double> distance;
  std::vector<int> steps;
  while (rt.status() == RunStatus::Running) {
    const int before = rt.world().walking().state().stepsTaken;
    rt.tick();
    if (!rt.tracking().empty()) {
      distance.push_back(rt.tracking().front().cartesianDistanceToGoal);
      steps.push_back(before);
    }
  }
  ASSERT_EQ(rt.status(), RunStatus::Succeeded);
  ASSERT_GT(distance.size(), 2u);
  int jumps = 0;
  for (std::size_t i = 1; i < distance.size(); ++i) {
    if (std::abs(distance[i] - distance[i - 1]) < 1e-12) continue;
    ++jumps;
    EXPECT_LT(distance[i], distance[i - 1]) << "tick " << i;
    EXPECT_NE(steps[i], steps[i - 1]) << "distance moved between touchdowns at sample " << i;
  }
  EXPECT_GE(jumps, 2);
  EXPECT_LT(distance.back(), 0.05);
}

TEST(Runtime, StalledScrewFailsAtTimeoutAndLogsIt) {
  // Knob never turned, so the latched door holds the welded hand in place.
  const DoorVariant& v = referenceVariant("right-push-knob");
  BehaviorNode tree = buildReferenceBehavior(v);
  byName(tree, "Turn handle")->params<ScrewTrajectoryParams>().revolutionAngleRad = 0.0;
  const BehaviorNode* push = byName(tree, "Push door open");
  ASSERT_NE(push, nullptr);
  const double nominal = push->params<ScrewTrajectoryParams>().durationS;
  const std::string id = std::to_string(toInt(push->id));

  Runtime rt(tree, buildReferenceScenario(v));
  std::vector<LogRecord> logs;
  std::optional<double> started, failed;
  while (rt.status() == RunStatus::Running && !failed) {
    rt.tick();
    for (auto& r : rt.drainLogs()) logs.push_back(std::move(r));
    const auto& row = rt.metrics().samples().back();
    if (!started && hasToken(row.events, "start:" + id)) started = row.time;
    if (started && hasToken(row.events, "fail:" + id)) failed = row.time;
  }
  ASSERT_TRUE(started && failed);
  EXPECT_NEAR(*failed - *started, ExitTolerance{}.timeoutFactor * nominal, 2.0 / 120.0);
  bool logged = false;
  for (const auto& r : logs)
    if (r.level == LogLevel::Error && r.message.find("'Push door open' failed: tracking error") != std::string::npos)
      logged = true;
  EXPECT_TRUE(logged);
}

TEST(Runtime, PreviewLeavesTheWorldUntouched) {
  const ScenarioConfig scenario = quietScenario();
  Runtime rt(sequenceOf({walkTo(scenario.robotStart.xM + 1.0, scenario.robotStart.yM)}), scenario,
             {.mode = ExecutionMode::ManualStep});
  const auto hash = rt.world().stateHash();
  const auto poses = rt.previewAction(NodeId{2});
  EXPECT_GE(poses.size(), 3u);
  EXPECT_EQ(rt.world().stateHash(), hash);
  for (std::size_t i = 1; i < poses.size(); ++i) EXPECT_GT(poses[i].time, poses[i - 1].time);
  EXPECT_THROW(rt.previewAction(NodeId{1}), std::invalid_argument);
}

TEST(Runtime, ManualModeWaitsForTheOperator) {
  const ScenarioConfig scenario = quietScenario();
  BehaviorNode w1, w2;
  w1.kind = w2.kind = NodeKind::WaitAction;
  w1.name = "w1";
  w2.name = "w2";
  w1.parameters = w2.parameters = WaitParams{0.1};
  Runtime rt(sequenceOf({w1, w2}), scenario, {.mode = ExecutionMode::ManualStep});
  for (int i = 0; i < 60; ++i) rt.tick();
  EXPECT_EQ(rt.status(), RunStatus::Running);
  EXPECT_EQ(rt.executeNextAction(), std::vector<NodeId>{NodeId{2}});
  for (int i = 0; i < 30; ++i) rt.tick();
  EXPECT_EQ(rt.executeNextAction(), std::vector<NodeId>{NodeId{3}});
  for (int i = 0; i < 30 && rt.status() == RunStatus::Running; ++i) rt.tick();
  EXPECT_EQ(rt.status(), RunStatus::Succeeded);
}
