#include <gtest/gtest.h>

#include <chrono>
#include <set>

#include <boost/asio/connect.hpp>
#include <boost/asio/ip/tcp.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>

#include "doorway/fixtures/reference.hpp"
#include "doorway/service/command_processor.hpp"
#include "doorway/service/service.hpp"

using namespace doorway;
using nlohmann::json;

namespace {

std::string command(std::int64_t seq, const std::string& name, json args = json::object()) {
  return json{{"v", 1}, {"type", "Command"}, {"payload", {{"seq", seq}, {"command", name}, {"args", args}}}}.dump();
}

const BehaviorNode* byName(const BehaviorNode& root, const std::string& name) {
  if (root.name == name) return &root;
  for (const auto& c : root.children)
    if (auto* n = byName(c, name)) return n;
  return nullptr;
}

std::int64_t idOf(const Runtime& rt, const std::string& name) {
  const BehaviorNode* n = byName(rt.tree().root(), name);
  if (!n) throw std::runtime_error("no node " + name);
  return toInt(n->id);
}

std::unique_ptr<Runtime> referenceRuntime(const std::string& variant, ExecutionMode mode) {
  const DoorVariant& v = referenceVariant(variant);
  return std::make_unique<Runtime>(buildReferenceBehavior(v), buildReferenceScenario(v), RuntimeOptions{.mode = mode});
}

void tickUntil(Runtime& rt, const std::function<bool()>& done, int limit = 20000) {
  for (int i = 0; i < limit && !done(); ++i) rt.tick();
  ASSERT_TRUE(done());
}

const json& payloadOf(const json& ack) { return ack.at("payload"); }

}  // namespace

TEST(Protocol, MalformedMessagesAreRejectedWithReason) {
  auto rt = referenceRuntime("right-push-bar", ExecutionMode::ManualStep);
  CommandProcessor proc(*rt);

  json ack = proc.handle("{not json");
  EXPECT_EQ(ack.at("type"), "CommandAck");
  EXPECT_EQ(ack.at("v"), 1);
  EXPECT_FALSE(payloadOf(ack).at("ok"));
  EXPECT_TRUE(payloadOf(ack).at("seq").is_null());
  EXPECT_FALSE(payloadOf(ack).at("reason").get<std::string>().empty());

  ack = proc.handle(json{{"v", 2}, {"type", "Command"}, {"payload", {{"seq", 4}, {"command", "abort"}}}}.dump());
  EXPECT_FALSE(payloadOf(ack).at("ok"));
  EXPECT_EQ(payloadOf(ack).at("seq"), 4);
  EXPECT_NE(payloadOf(ack).at("reason").get<std::string>().find("version"), std::string::npos);

  ack = proc.handle(command(5, "fly"));
  EXPECT_FALSE(payloadOf(ack).at("ok"));
  EXPECT_EQ(payloadOf(ack).at("seq"), 5);

  ack = proc.handle(command(6, "removeNode", {{"nodeId", "three"}}));
  EXPECT_FALSE(payloadOf(ack).at("ok"));
  EXPECT_EQ(rt->status(), RunStatus::Running);
}

TEST(Protocol, EveryCommandIsAcknowledgedOnceInOrder) {
  auto rt = referenceRuntime("right-push-bar", ExecutionMode::ManualStep);
  CommandProcessor proc(*rt);
  const std::vector<std::string> batch = {
      command(1, "setMode", {{"mode", "manual"}}),
      command(2, "setConcurrencyAllowed", {{"allowed", true}}),
      command(3, "saveBehavior"),
      command(4, "setMode", {{"mode", "sideways"}}),
      command(5, "previewAction", {{"nodeId", 999}}),
  };
  std::vector<std::int64_t> seqs;
  for (const auto& m : batch) seqs.push_back(payloadOf(proc.handle(m)).at("seq").get<std::int64_t>());
  EXPECT_EQ(seqs, (std::vector<std::int64_t>{1, 2, 3, 4, 5}));
}

TEST(Commands, ManualStepStartsExactlyOneAction) {
  auto rt = referenceRuntime("right-pull-lever", ExecutionMode::ManualStep);
  CommandProcessor proc(*rt);
  tickUntil(*rt, [&] { return rt->tree().coordinator().selectedSubtree.has_value(); });

  json ack = proc.handle(command(1, "executeNextAction"));
  ASSERT_TRUE(payloadOf(ack).at("ok")) << ack.dump();
  EXPECT_EQ(payloadOf(ack).at("result").at("started").size(), 1u);

  // Nothing more until the running action finishes.
  ack = proc.handle(command(2, "executeNextAction"));
  EXPECT_TRUE(payloadOf(ack).at("result").at("started").empty());
}

TEST(Commands, ConcurrencyAllowedStartsTheWholeReadyLayer) {
  auto rt = referenceRuntime("right-pull-lever", ExecutionMode::ManualStep);
  CommandProcessor proc(*rt);
  tickUntil(*rt, [&] { return rt->tree().coordinator().selectedSubtree.has_value(); });
  ASSERT_TRUE(payloadOf(proc.handle(command(1, "executeNextAction"))).at("ok"));
  const std::int64_t settle = idOf(*rt, "Let detection settle");
  tickUntil(*rt, [&] {
    return findNode(rt->tree().root(), NodeId{settle})->runtime.status == ActionStatus::Succeeded;
  });

  // Oracle: following the queue order, every action whose dependency is done,
  // up to the first one that must wait.
  std::set<std::int64_t> done;
  std::vector<std::int64_t> expected;
  const BehaviorNode* scope = findNode(rt->tree().root(), *rt->tree().coordinator().selectedSubtree);
  for (const BehaviorNode* a : actionLeaves(*scope)) {
    if (a->runtime.status == ActionStatus::Succeeded) {
      done.insert(toInt(a->id));
      continue;
    }
    if (a->executeAfterId && !done.count(toInt(*a->executeAfterId))) break;
    expected.push_back(toInt(a->id));
  }
  ASSERT_GE(expected.size(), 2u);

  ASSERT_TRUE(payloadOf(proc.handle(command(2, "setConcurrencyAllowed", {{"allowed", true}}))).at("ok"));
  const json ack = proc.handle(command(3, "executeNextAction"));
  std::vector<std::int64_t> started;
  for (const auto& id : payloadOf(ack).at("result").at("started")) started.push_back(id.get<std::int64_t>());
  EXPECT_EQ(started, expected);
}

TEST(Commands, EditedScrewParametersApplyOnTheNextExecution) {
  auto rt = referenceRuntime("right-pull-lever", ExecutionMode::Autonomous);
  CommandProcessor proc(*rt);
  const std::int64_t turn = idOf(*rt, "Turn handle");
  tickUntil(*rt, [&] { return rt->tree().coordinator().phase == Phase::UnlatchAndOpen; });
  ASSERT_EQ(findNode(rt->tree().root(), NodeId{turn})->runtime.status, ActionStatus::Pending);

  const json ack =
      proc.handle(command(1, "setNodeParameters", {{"nodeId", turn}, {"parameters", {{"revolutionAngleRad", 0.6}}}}));
  ASSERT_TRUE(payloadOf(ack).at("ok")) << ack.dump();
  EXPECT_EQ(rt->tree().coordinator().phase, Phase::UnlatchAndOpen);

  double maxHandle = 0.0;
  while (findNode(rt->tree().root(), NodeId{turn})->runtime.status != ActionStatus::Succeeded) {
    ASSERT_EQ(rt->status(), RunStatus::Running);
    rt->tick();
    maxHandle = std::max(maxHandle, std::abs(rt->world().door().state().handleAngle));
  }
  EXPECT_NEAR(maxHandle, 0.6, 0.02);
  EXPECT_EQ(rt->runToCompletion(), RunStatus::Succeeded);
}

TEST(Commands, InvalidParametersLeaveTheTreeAlone) {
  auto rt = referenceRuntime("right-pull-lever", ExecutionMode::ManualStep);
  CommandProcessor proc(*rt);
  const auto before = saveTree(rt->tree().root());
  const auto revision = rt->treeRevision();
  const json ack = proc.handle(command(
      1, "setNodeParameters", {{"nodeId", idOf(*rt, "Turn handle")}, {"parameters", {{"revolutionAngleRad", "abc"}}}}));
  EXPECT_FALSE(payloadOf(ack).at("ok"));
  EXPECT_EQ(saveTree(rt->tree().root()), before);
  EXPECT_EQ(rt->treeRevision(), revision);
}

TEST(Commands, StructuralEditsShowUpInTheNextSnapshot) {
  auto rt = referenceRuntime("right-push-bar", ExecutionMode::ManualStep);
  CommandProcessor proc(*rt);
  proc.collectOutgoing(false);  // initial snapshot
  const std::int64_t approach = idOf(*rt, "Approach");

  json ack = proc.handle(command(1, "addNode",
                                 {{"parentId", approach},
                                  {"index", 0},
                                  {"node", {{"kind", "WaitAction"}, {"name", "Pause"}, {"parameters", {{"durationS", 0.2}}}}}}));
  ASSERT_TRUE(payloadOf(ack).at("ok")) << ack.dump();
  const std::int64_t added = payloadOf(ack).at("result").at("nodeId");

  auto out = proc.collectOutgoing(false);
  ASSERT_FALSE(out.empty());
  EXPECT_EQ(out.front().at("type"), "TreeSnapshot");
  const BehaviorNode snap = loadTree(out.front().at("payload").at("behavior"));
  const BehaviorNode* parent = findNode(snap, NodeId{approach});
  ASSERT_NE(parent, nullptr);
  EXPECT_EQ(toInt(parent->children.front().id), added);
  EXPECT_EQ(parent->children.front().name, "Pause");

  std::vector<std::int64_t> order;
  for (const auto& c : parent->children) order.insert(order.begin(), toInt(c.id));
  ack = proc.handle(command(2, "reorderChildren", {{"parentId", approach}, {"order", order}}));
  // Reversing breaks the dependency order, so it is refused and nothing changes.
  EXPECT_FALSE(payloadOf(ack).at("ok"));
  EXPECT_TRUE(proc.collectOutgoing(false).empty());

  ack = proc.handle(command(3, "removeNode", {{"nodeId", added}}));
  ASSERT_TRUE(payloadOf(ack).at("ok"));
  out = proc.collectOutgoing(false);
  ASSERT_FALSE(out.empty());
  EXPECT_EQ(findNode(loadTree(out.front().at("payload").at("behavior")), NodeId{added}), nullptr);
}

TEST(Commands, SaveAndLoadBehaviorRoundTrip) {
  auto rt = referenceRuntime("left-pull-lever", ExecutionMode::ManualStep);
  CommandProcessor proc(*rt);
  const json saved = payloadOf(proc.handle(command(1, "saveBehavior"))).at("result").at("behavior");
  EXPECT_TRUE(structurallyEqual(loadTree(saved), rt->tree().root()));
  const auto revision = rt->treeRevision();
  const json ack = proc.handle(command(2, "loadBehavior", {{"behavior", saved}}));
  ASSERT_TRUE(payloadOf(ack).at("ok"));
  EXPECT_GT(rt->treeRevision(), revision);
  EXPECT_TRUE(structurallyEqual(loadTree(saved), rt->tree().root()));
}

TEST(Commands, AbortHaltsTheRobotMidWalk) {
  auto rt = referenceRuntime("right-push-bar", ExecutionMode::Autonomous);
  CommandProcessor proc(*rt);
  tickUntil(*rt, [&] { return rt->world().walking().state().state == WalkingPhase::Swing; });
  ASSERT_TRUE(payloadOf(proc.handle(command(1, "abort"))).at("ok"));
  const json world = proc.worldSnapshot();
  EXPECT_TRUE(world.at("robot").at("footstepQueue").empty());
  EXPECT_EQ(world.at("status"), "Failed");
  const auto hash = rt->world().stateHash();
  rt->tick();
  EXPECT_EQ(rt->world().stateHash(), hash);
}

TEST(Commands, PreviewReturnsSampledPoses) {
  auto rt = referenceRuntime("right-push-bar", ExecutionMode::ManualStep);
  CommandProcessor proc(*rt);
  const json ack = proc.handle(command(1, "previewAction", {{"nodeId", idOf(*rt, "Raise arm")}}));
  ASSERT_TRUE(payloadOf(ack).at("ok")) << ack.dump();
  EXPECT_GE(payloadOf(ack).at("result").at("poses").size(), 2u);
}

TEST(Commands, RemovingAnExecutingActionIsRefused) {
  auto rt = referenceRuntime("right-push-bar", ExecutionMode::Autonomous);
  CommandProcessor proc(*rt);
  const std::int64_t settle = idOf(*rt, "Let detection settle");
  tickUntil(*rt, [&] {
    return findNode(rt->tree().root(), NodeId{settle})->runtime.status == ActionStatus::Executing;
  });
  const json ack = proc.handle(command(1, "removeNode", {{"nodeId", settle}}));
  EXPECT_FALSE(payloadOf(ack).at("ok"));
  EXPECT_NE(findNode(rt->tree().root(), NodeId{settle}), nullptr);
}

namespace {

namespace beast = boost::beast;
namespace websocket = beast::websocket;
using tcp = boost::asio::ip::tcp;

class Client {
 public:
  explicit Client(unsigned short port) : ws_(ioc_) {
    tcp::resolver resolver(ioc_);
    boost::asio::connect(ws_.next_layer(), resolver.resolve("127.0.0.1", std::to_string(port)));
    ws_.handshake("127.0.0.1", "/");
  }
  void send(const std::string& text) { ws_.write(boost::asio::buffer(text)); }
  json read() {
    beast::flat_buffer buf;
    ws_.read(buf);
    return json::parse(beast::buffers_to_string(buf.data()));
  }
  /// Reads until a message of `type` arrives; others are counted.
  json readUntil(const std::string& type, std::map<std::string, int>* seen = nullptr) {
    for (;;) {
      json m = read();
      if (seen) ++(*seen)[m.at("type").get<std::string>()];
      if (m.at("type") == type) return m;
    }
  }
  void close() { ws_.close(websocket::close_code::normal); }

 private:
  boost::asio::io_context ioc_;
  websocket::stream<tcp::socket> ws_;
};

}  // namespace

TEST(LiveService, WebSocketSessionRoundTrip) {
  auto runtime = referenceRuntime("right-push-bar", ExecutionMode::ManualStep);
  const std::int64_t approach = idOf(*runtime, "Approach");
  RuntimeService service(std::move(runtime), ServiceOptions{.realtimeFactor = 1.0});
  service.start();
  {
    Client a(service.port());
    json first = a.read();
    EXPECT_EQ(first.at("v"), 1);
    EXPECT_EQ(first.at("type"), "TreeSnapshot");

    a.send(command(10, "addNode",
                   {{"parentId", approach},
                    {"node", {{"kind", "WaitAction"}, {"name", "Extra pause"}, {"executeAfterId", nullptr}}}}));
    const json ack = a.readUntil("CommandAck");
    EXPECT_EQ(ack.at("payload").at("seq"), 10);
    ASSERT_TRUE(ack.at("payload").at("ok")) << ack.dump();
    const std::int64_t added = ack.at("payload").at("result").at("nodeId");
    const json snap = a.readUntil("TreeSnapshot");
    const BehaviorNode tree = loadTree(snap.at("payload").at("behavior"));
    const BehaviorNode* parent = findNode(tree, NodeId{approach});
    ASSERT_NE(parent, nullptr);
    EXPECT_EQ(toInt(parent->children.back().id), added);

    // The independent pause can move ahead of its neighbour in one command.
    std::vector<std::int64_t> order;
    for (const auto& c : parent->children) order.push_back(toInt(c.id));
    std::swap(order[order.size() - 1], order[order.size() - 2]);
    a.send(command(11, "reorderChildren", {{"parentId", approach}, {"order", order}}));
    const json reorderAck = a.readUntil("CommandAck");
    ASSERT_TRUE(reorderAck.at("payload").at("ok")) << reorderAck.dump();
    const BehaviorNode reordered = loadTree(a.readUntil("TreeSnapshot").at("payload").at("behavior"));
    std::vector<std::int64_t> got;
    for (const auto& c : findNode(reordered, NodeId{approach})->children) got.push_back(toInt(c.id));
    EXPECT_EQ(got, order);

    a.send("garbage");
    const json nack = a.readUntil("CommandAck");
    EXPECT_FALSE(nack.at("payload").at("ok"));
    EXPECT_TRUE(nack.at("payload").at("seq").is_null());

    // Periodic world state at about 10 Hz of sim time.
    std::map<std::string, int> seen;
    const auto t0 = std::chrono::steady_clock::now();
    int worlds = 0;
    std::int64_t firstTick = -1, lastTick = -1;
    while (worlds < 6) {
      const json w = a.readUntil("WorldSnapshot", &seen);
      if (firstTick < 0) firstTick = w.at("payload").at("tick");
      lastTick = w.at("payload").at("tick");
      ++worlds;
    }
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    EXPECT_EQ(lastTick - firstTick, 5 * 12);
    EXPECT_GT(wall, 0.3);
    EXPECT_GE(seen["TrackingUpdate"], 4);
    a.close();
  }
  {
    // A later client still finds the service and the edited tree.
    Client b(service.port());
    const json snap = b.readUntil("TreeSnapshot");
    EXPECT_NE(byName(loadTree(snap.at("payload").at("behavior")), "Extra pause"), nullptr);
    b.send(command(1, "setMode", {{"mode", "auto"}}));
    EXPECT_TRUE(b.readUntil("CommandAck").at("payload").at("ok"));
    b.close();
  }
  service.stop();
  service.join();
  EXPECT_EQ(service.runtime().status(), RunStatus::Running);
  EXPECT_EQ(service.runtime().tree().mode(), ExecutionMode::Autonomous);
}
