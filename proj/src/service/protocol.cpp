#include "doorway/service/protocol.hpp"

#include "doorway/common.hpp"

namespace doorway {

using nlohmann::json;

json makeMessage(MessageType type, json payload) {
  return json{{"v", kWireVersion}, {"type", type}, {"payload", std::move(payload)}};
}

WireCommand parseCommand(std::string_view text, std::optional<std::int64_t>* seqOut) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) throw ParseError("message is not valid JSON");
  if (!j.is_object()) throw ParseError("message must be a JSON object");
  const json* payload = j.contains("payload") ? &j.at("payload") : nullptr;
  if (payload && payload->is_object() && payload->contains("seq") && payload->at("seq").is_number_integer() &&
      seqOut)
    *seqOut = payload->at("seq").get<std::int64_t>();

  if (!j.contains("v") || !j.at("v").is_number_integer()) throw ParseError("missing integer field 'v'");
  if (j.at("v").get<int>() != kWireVersion)
    throw ParseError("unsupported protocol version " + j.at("v").dump() + ", expected 1");
  if (!j.contains("type") || j.at("type") != "Command") throw ParseError("only Command messages are accepted");
  if (!payload || !payload->is_object()) throw ParseError("missing object field 'payload'");
  if (!payload->contains("seq") || !payload->at("seq").is_number_integer())
    throw ParseError("missing integer field 'payload.seq'");
  if (!payload->contains("command") || !payload->at("command").is_string())
    throw ParseError("missing string field 'payload.command'");

  WireCommand c;
  c.seq = payload->at("seq").get<std::int64_t>();
  c.name = payload->at("command").get<std::string>();
  if (payload->contains("args")) {
    if (!payload->at("args").is_object()) throw ParseError("'payload.args' must be an object");
    c.args = payload->at("args");
  }
  return c;
}

json makeAck(std::optional<std::int64_t> seq, bool ok, const std::string& reason, json result) {
  json p{{"seq", seq ? json(*seq) : json(nullptr)}, {"ok", ok}};
  if (!reason.empty()) p["reason"] = reason;
  if (!result.is_null()) p["result"] = std::move(result);
  return makeMessage(MessageType::CommandAck, std::move(p));
}

}  // namespace doorway
