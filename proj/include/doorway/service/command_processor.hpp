#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "doorway/runtime/runtime.hpp"
#include "doorway/service/protocol.hpp"

namespace doorway {

/// Applies operator commands to a runtime and produces the outgoing message
/// stream. Owned by the tick thread; every call happens between ticks.
class CommandProcessor {
 public:
  explicit CommandProcessor(Runtime& runtime);

  /// Parses and applies one wire message. Always returns exactly one
  /// CommandAck; never throws.
  nlohmann::json handle(std::string_view text);

  /// Messages due after a tick or a batch of commands: a TreeSnapshot when
  /// the tree structure changed, pending LogEvents, and with `periodic` set
  /// a WorldSnapshot plus a TrackingUpdate.
  std::vector<nlohmann::json> collectOutgoing(bool periodic);

  nlohmann::json treeSnapshot() const;
  nlohmann::json worldSnapshot() const;
  nlohmann::json trackingUpdate() const;

  /// Also append drained log records to this file log.
  void setLogSink(EventLog* sink) { sink_ = sink; }

  bool manual() const { return manual_; }
  bool concurrencyAllowed() const { return concurrent_; }

 private:
  nlohmann::json apply(const WireCommand& c);
  void applyMode();

  Runtime& rt_;
  bool manual_;
  bool concurrent_;
  std::uint64_t sentRevision_ = 0;
  bool sentTree_ = false;
  EventLog* sink_ = nullptr;
};

}  // namespace doorway
