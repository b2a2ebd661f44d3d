#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

namespace doorway {

inline constexpr int kWireVersion = 1;

/// One JSON object per WebSocket text frame:
/// {"v": 1, "type": <MessageType>, "payload": {...}}.
enum class MessageType { TreeSnapshot, WorldSnapshot, TrackingUpdate, LogEvent, Command, CommandAck };
NLOHMANN_JSON_SERIALIZE_ENUM(MessageType, {{MessageType::TreeSnapshot, "TreeSnapshot"},
                                           {MessageType::WorldSnapshot, "WorldSnapshot"},
                                           {MessageType::TrackingUpdate, "TrackingUpdate"},
                                           {MessageType::LogEvent, "LogEvent"},
                                           {MessageType::Command, "Command"},
                                           {MessageType::CommandAck, "CommandAck"}})

nlohmann::json makeMessage(MessageType type, nlohmann::json payload);

/// Command payload: {"seq": <int>, "command": <name>, "args": {...}}.
struct WireCommand {
  std::int64_t seq = 0;
  std::string name;
  nlohmann::json args = nlohmann::json::object();
};

/// Throws ParseError on anything that is not a v:1 Command. `seqOut` receives
/// the sequence number whenever one could be read, so the rejection can
/// still be matched to its command.
WireCommand parseCommand(std::string_view text, std::optional<std::int64_t>* seqOut = nullptr);

/// {"seq", "ok", "reason"?, "result"?}; seq is null when the message had none.
nlohmann::json makeAck(std::optional<std::int64_t> seq, bool ok, const std::string& reason = {},
                       nlohmann::json result = nullptr);

}  // namespace doorway
