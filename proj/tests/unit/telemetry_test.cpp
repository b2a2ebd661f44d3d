#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "doorway/fixtures/reference.hpp"
#include "doorway/runtime/runtime.hpp"
#include "doorway/telemetry/telemetry.hpp"

using namespace doorway;

namespace {

std::filesystem::path tempPath(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("doorway_" + std::to_string(::getpid()) + "_" + name);
}

std::vector<std::string> splitTokens(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string t;
  while (std::getline(ss, t, ';'))
    if (!t.empty()) out.push_back(t);
  return out;
}

}  // namespace

TEST(Metrics, EmptyRunIsHeaderOnly) {
  std::ostringstream os;
  RunMetrics{}.writeCsv(os);
  EXPECT_EQ(os.str(), "time_s,progress_m,phase,event\n");
}

TEST(Metrics, RowsNeedIncreasingTime) {
  RunMetrics m;
  m.record(0.0, -1.5, Phase::Approach);
  EXPECT_THROW(m.record(0.0, -1.5, Phase::Approach), std::logic_error);
  m.record(0.1, -1.4, Phase::Approach);
  m.addEvent("start:3");
  m.addEvent("phase:UnlatchAndOpen");
  std::ostringstream os;
  m.writeCsv(os);
  EXPECT_EQ(os.str(),
            "time_s,progress_m,phase,event\n"
            "0.000000,-1.500000,Approach,\n"
            "0.100000,-1.400000,Approach,start:3;phase:UnlatchAndOpen\n");
  EXPECT_EQ(m.countEvents("start:3"), 1u);
}

TEST(EventLog, WritesEveryRecordInOrder) {
  const auto path = tempPath("events.jsonl");
  {
    EventLog log(path);
    for (int i = 0; i < 5000; ++i) {
      LogRecord r;
      r.tick = i;
      r.level = i % 2 ? LogLevel::Info : LogLevel::Warn;
      if (i % 3 == 0) r.nodeId = i;
      r.message = "message " + std::to_string(i);
      ASSERT_TRUE(log.append(r));
    }
    log.flush();
    EXPECT_EQ(log.appended(), 5000u);
    EXPECT_EQ(log.written(), 5000u);
    EXPECT_EQ(log.dropped(), 0u);
  }
  std::ifstream in(path);
  std::string line;
  int expected = 0;
  while (std::getline(in, line)) {
    const LogRecord r = nlohmann::json::parse(line).get<LogRecord>();
    EXPECT_EQ(r.tick, expected);
    EXPECT_EQ(r.nodeId.has_value(), expected % 3 == 0);
    ++expected;
  }
  EXPECT_EQ(expected, 5000);
  std::filesystem::remove(path);
}

TEST(EventLog, FullQueueDropsInsteadOfBlocking) {
  const auto path = tempPath("tiny.jsonl");
  EventLog log(path, 2);
  for (int i = 0; i < 20000; ++i) log.append(LogRecord{i, LogLevel::Debug, std::nullopt, std::string(64, 'x')});
  log.flush();
  EXPECT_EQ(log.appended() + log.dropped(), 20000u);
  EXPECT_EQ(log.written(), log.appended());
  std::filesystem::remove(path);
}

TEST(RunTelemetry, EveryActionStartsAndEndsExactlyOnce) {
  const DoorVariant& v = referenceVariant("right-push-bar");
  const BehaviorNode tree = buildReferenceBehavior(v);
  Runtime rt(tree, buildReferenceScenario(v));
  ASSERT_EQ(rt.runToCompletion(), RunStatus::Succeeded);

  std::map<std::string, int> count;
  for (const auto& s : rt.metrics().samples())
    for (const auto& t : splitTokens(s.events)) ++count[t];

  std::size_t actions = 0;
  for (const BehaviorNode* scope : executionScopes(tree))
    for (const BehaviorNode* a : actionLeaves(*scope)) {
      ++actions;
      const auto id = std::to_string(toInt(a->id));
      EXPECT_EQ(count["start:" + id], 1) << a->name;
      EXPECT_EQ(count["stop:" + id], 1) << a->name;
      EXPECT_EQ(count["fail:" + id], 0) << a->name;
    }
  EXPECT_GT(actions, 0u);
  EXPECT_EQ(count["behaviorSucceeded"], 1);
  EXPECT_EQ(count["phase:UnlatchAndOpen"], 1);
  EXPECT_EQ(count["phase:WalkThrough"], 1);
}

TEST(RunTelemetry, ProgressNeverDropsDuringWalkThrough) {
  for (const char* name : {"right-push-bar", "left-push-bar", "right-push-knob"}) {
    SCOPED_TRACE(name);
    const DoorVariant& v = referenceVariant(name);
    Runtime rt(buildReferenceBehavior(v), buildReferenceScenario(v));
    ASSERT_EQ(rt.runToCompletion(), RunStatus::Succeeded);
    const auto& rows = rt.metrics().samples();
    double prev = -1e9;
    int walkRows = 0;
    for (const auto& r : rows) {
      if (r.phase != Phase::WalkThrough) continue;
      EXPECT_GE(r.progress, prev - 1e-12) << "t=" << r.time;
      prev = r.progress;
      ++walkRows;
    }
    EXPECT_GT(walkRows, 100);
    EXPECT_GT(rows.back().progress, 0.0);
  }
}
