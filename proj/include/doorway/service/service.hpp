#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <string>
#include <thread>
#include <vector>

#include "doorway/runtime/runtime.hpp"
#include "doorway/service/command_processor.hpp"

namespace doorway {

struct Inbound {
  enum class Kind { Connected, Message };
  Kind kind = Kind::Message;
  std::uint64_t client = 0;
  std::string text;
};

/// Connection handler. Owns the sockets and runs them on its own thread;
/// the tick thread talks to it only through the inbox and the posted sends.
class WebSocketServer {
 public:
  /// Binds immediately; port 0 picks a free port.
  WebSocketServer(const std::string& address, unsigned short port);
  ~WebSocketServer();
  WebSocketServer(const WebSocketServer&) = delete;
  WebSocketServer& operator=(const WebSocketServer&) = delete;

  void start();
  void stop();
  unsigned short port() const;
  std::size_t clientCount() const;

  std::vector<Inbound> drainInbox();
  void send(std::uint64_t client, std::shared_ptr<const std::string> text);
  void broadcast(std::shared_ptr<const std::string> text);

  struct Impl;

 private:
  std::unique_ptr<Impl> impl_;
};

struct ServiceOptions {
  std::string address = "127.0.0.1";
  unsigned short port = 0;
  /// Sim seconds per wall second; 0 or less ticks as fast as possible.
  double realtimeFactor = 1.0;
  double broadcastHz = 10.0;
};

/// Tick loop plus connection handler. Commands are applied between ticks,
/// so a snapshot reflects all or none of a command.
class RuntimeService {
 public:
  RuntimeService(std::unique_ptr<Runtime> runtime, ServiceOptions options, EventLog* eventLog = nullptr);
  ~RuntimeService();

  unsigned short port() const { return server_.port(); }

  /// Runs the tick loop on the calling thread until stop().
  void run();
  /// Thread-safe.
  void stop() { stop_ = true; }
  /// run() on a background thread.
  void start();
  void join();

  /// Only valid while the loop is not running.
  const Runtime& runtime() const { return *runtime_; }

 private:
  void processInbox();
  void broadcast(const std::vector<nlohmann::json>& messages);

  std::unique_ptr<Runtime> runtime_;
  ServiceOptions options_;
  CommandProcessor processor_;
  WebSocketServer server_;
  std::atomic<bool> stop_{false};
  std::thread loop_;
};

}  // namespace doorway
