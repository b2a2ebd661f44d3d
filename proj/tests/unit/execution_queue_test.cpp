#include <gtest/gtest.h>

#include <random>

#include "doorway/engine/execution_queue.hpp"
#include "schedule_oracle.hpp"

using namespace doorway;
using namespace doorway::test;

namespace {
const ActionStarter kAccept = [](const ActionSlot&) { return ConditionReport{}; };

std::vector<ActionSlot> slots(const std::vector<std::optional<std::size_t>>& links) {
  std::vector<ActionSlot> out(links.size());
  for (std::size_t i = 0; i < links.size(); ++i) {
    out[i].id = NodeId{static_cast<std::int64_t>(i + 100)};
    out[i].executeAfter = links[i];
  }
  return out;
}
}  // namespace

TEST(ShouldExecute, FollowsDependencyStatus) {
  ExecutionQueue q(slots({std::nullopt, 0}));
  EXPECT_TRUE(q.shouldExecute(0));
  q.updateDispatch(0, [](const ActionSlot&) { return ConditionReport{}; });
  // a0 executing, a1 waits on it.
  EXPECT_EQ(q.at(0).status, ActionStatus::Executing);
  EXPECT_FALSE(q.shouldExecute(1));
  q.complete(0, true, 5);
  EXPECT_TRUE(q.shouldExecute(1));
}

TEST(Dispatch, FirstActionWithoutDependencyStartsImmediately) {
  ExecutionQueue q(slots({std::nullopt}));
  const auto started = q.updateDispatch(0, kAccept);
  ASSERT_EQ(started.size(), 1u);
  EXPECT_EQ(q.at(0).startTick, 0);
}

TEST(Dispatch, ManualModesDoNothingOnTick) {
  ExecutionQueue q(slots({std::nullopt, std::nullopt}), ExecutionMode::ManualStep);
  EXPECT_TRUE(q.updateDispatch(0, kAccept).empty());
}

TEST(Dispatch, SerialDurationsGiveExpectedStarts) {
  const auto s = simulateNominalSchedule({2, 3, 1}, serialLinks(3), 100.0);
  EXPECT_EQ(s.startTick, (std::vector<std::int64_t>{0, 200, 500}));
  EXPECT_DOUBLE_EQ(s.makespanSeconds, 6.0);
}

TEST(Dispatch, SharedDependencyLayersActions) {
  const std::vector<std::optional<std::size_t>> links{std::nullopt, 0, 0};
  const auto s = simulateNominalSchedule({2, 3, 1}, links, 100.0);
  const auto oracle = oracleSchedule({2, 3, 1}, links);
  EXPECT_EQ(oracle.start, (std::vector<double>{0, 2, 2}));
  EXPECT_EQ(s.startTick, (std::vector<std::int64_t>{0, 200, 200}));
  EXPECT_DOUBLE_EQ(s.makespanSeconds, 5.0);
}

TEST(Dispatch, EntryFailureFreezesQueue) {
  ExecutionQueue q(slots({std::nullopt, std::nullopt, std::nullopt}));
  const auto started = q.updateDispatch(0, [](const ActionSlot& s) {
    ConditionReport r;
    r.entryPassed = s.id != NodeId{101};
    r.detail = "unreachable";
    return r;
  });
  EXPECT_EQ(started.size(), 1u);
  EXPECT_EQ(q.at(1).status, ActionStatus::Failed);
  EXPECT_EQ(q.at(2).status, ActionStatus::Pending);
  EXPECT_TRUE(q.frozen());
  ASSERT_TRUE(q.failure());
  EXPECT_EQ(q.failure()->actionId, NodeId{101});
  EXPECT_FALSE(q.failure()->entryPassed);
}

TEST(Dispatch, ExitFailureFreezesAndResetResumes) {
  ExecutionQueue q(slots({std::nullopt, 0, 1}));
  q.updateDispatch(0, kAccept);
  q.complete(0, true, 1);
  q.updateDispatch(1, kAccept);
  q.complete(1, false, 2, "grasp missed");
  EXPECT_TRUE(q.updateDispatch(3, kAccept).empty());
  q.resetFrom(1);
  EXPECT_EQ(q.nextIndex(), 1u);
  EXPECT_EQ(q.at(1).status, ActionStatus::Pending);
  EXPECT_EQ(q.updateDispatch(4, kAccept).size(), 1u);
}

TEST(ManualStep, NonConcurrentStartsOneAtATime) {
  ExecutionQueue q(slots({std::nullopt, std::nullopt, std::nullopt}), ExecutionMode::ManualStep);
  EXPECT_EQ(q.step(0, kAccept).size(), 1u);
  EXPECT_TRUE(q.step(1, kAccept).empty());
  q.complete(0, true, 2);
  EXPECT_EQ(q.step(3, kAccept).size(), 1u);
}

TEST(ManualStep, ConcurrentStartsWholeReadyLayer) {
  ExecutionQueue q(slots({std::nullopt, std::nullopt, 1, std::nullopt}), ExecutionMode::ManualStepConcurrent);
  EXPECT_EQ(q.step(0, kAccept).size(), 2u);
  q.complete(1, true, 1);
  EXPECT_EQ(q.step(2, kAccept).size(), 2u);
}

TEST(ManualStep, NonConcurrentNeverOverlapsOnRandomSessions) {
  std::mt19937_64 rng(40);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 10;
    std::vector<std::optional<std::size_t>> links(n);
    for (std::size_t i = 1; i < n; ++i)
      if (rng() % 2) links[i] = rng() % i;
    ExecutionQueue q(slots(links), ExecutionMode::ManualStep);
    for (std::int64_t tick = 0; !q.finished() && tick < 1000; ++tick) {
      if (rng() % 3 == 0) q.step(tick, kAccept);
      for (std::size_t i = 0; i < n; ++i)
        if (q.at(i).status == ActionStatus::Executing && rng() % 4 == 0) q.complete(i, true, tick);
      int executing = 0;
      for (const auto& s : q.actions()) executing += s.status == ActionStatus::Executing;
      EXPECT_LE(executing, 1);
    }
    EXPECT_TRUE(q.allSucceeded());
  }
}

TEST(Dispatch, RandomQueuesMatchOracleAndPreserveOrder) {
  std::mt19937_64 rng(41);
  const double rate = 120.0;
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 1 + rng() % 20;
    std::vector<double> durations(n);
    std::vector<std::optional<std::size_t>> links(n);
    for (std::size_t i = 0; i < n; ++i) {
      durations[i] = static_cast<double>(rng() % 600) / rate;
      if (i > 0 && rng() % 4 != 0) links[i] = rng() % i;
    }
    const auto engine = simulateNominalSchedule(durations, links, rate);
    const auto oracle = oracleSchedule(durations, links);
    for (std::size_t i = 0; i < n; ++i) {
      EXPECT_LE(std::abs(engine.startTick[i] / rate - oracle.start[i]), 1.0 / rate + 1e-9);
      if (i > 0) EXPECT_LE(engine.startTick[i - 1], engine.startTick[i]);
    }
    EXPECT_LE(std::abs(engine.makespanSeconds - oracle.makespan), 1.0 / rate + 1e-9);
    EXPECT_LE(engine.makespanSeconds, simulateNominalSchedule(durations, serialLinks(n), rate).makespanSeconds + 1e-9);
  }
}

TEST(Dispatch, AbortFailsRunningActions) {
  ExecutionQueue q(slots({std::nullopt, std::nullopt}));
  q.updateDispatch(0, kAccept);
  q.abort(3);
  EXPECT_EQ(q.at(0).status, ActionStatus::Failed);
  EXPECT_EQ(q.at(1).status, ActionStatus::Failed);
  EXPECT_TRUE(q.frozen());
}

TEST(ExecutionQueue, RejectsForwardLinks) {
  EXPECT_THROW(ExecutionQueue(slots({1, std::nullopt})), std::invalid_argument);
}
