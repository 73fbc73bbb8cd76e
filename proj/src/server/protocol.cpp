#include "xwalk/server/protocol.hpp"

#include "xwalk/errors.hpp"

namespace xwalk::server {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

constexpr std::pair<CommandType, std::string_view> kNames[] = {
    {CommandType::Move, "Move"},   {CommandType::SetGaze, "SetGaze"}, {CommandType::Start, "Start"},
    {CommandType::Pause, "Pause"}, {CommandType::Reset, "Reset"},     {CommandType::SelectInterface, "SelectInterface"},
};

CommandType command_type(std::string_view name) {
  for (const auto& [type, n] : kNames) {
    if (n == name) return type;
  }
  throw ProtocolError("unknown command kind '" + std::string(name) + "'");
}

ClientCommand parse_command(const json& payload) {
  if (!payload.is_object() || !payload.contains("kind") || !payload.at("kind").is_string()) {
    throw ProtocolError("command payload needs a string 'kind'");
  }
  ClientCommand cmd;
  cmd.type = command_type(payload.at("kind").get<std::string>());
  switch (cmd.type) {
    case CommandType::Move:
      if (!payload.contains("dy") || !payload.at("dy").is_number()) throw ProtocolError("Move needs a numeric 'dy'");
      cmd.dy = payload.at("dy").get<double>();
      break;
    case CommandType::SetGaze:
      if (!payload.contains("on") || !payload.at("on").is_boolean()) throw ProtocolError("SetGaze needs a boolean 'on'");
      cmd.on = payload.at("on").get<bool>();
      break;
    case CommandType::SelectInterface:
      if (!payload.contains("interface") || !payload.at("interface").is_string()) {
        throw ProtocolError("SelectInterface needs a string 'interface'");
      }
      try {
        cmd.interface = ehmi::interface_from_string(payload.at("interface").get<std::string>());
      } catch (const std::exception& ex) {
        throw ProtocolError(ex.what());
      }
      break;
    case CommandType::Start:
    case CommandType::Pause:
    case CommandType::Reset:
      break;
  }
  return cmd;
}

}  // namespace

std::string_view to_string(CommandType type) {
  for (const auto& [t, n] : kNames) {
    if (t == type) return n;
  }
  return "Start";
}

ClientMessage parse_client_message(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& ex) {
    throw ProtocolError(std::string("message is not JSON: ") + ex.what());
  }
  if (!j.is_object() || !j.contains("type") || !j.at("type").is_string()) {
    throw ProtocolError("message needs a string 'type'");
  }
  if (j.contains("version") && (!j.at("version").is_number_integer() || j.at("version").get<int>() != kProtocolVersion)) {
    throw ProtocolError("unsupported protocol version");
  }
  const std::string type = j.at("type").get<std::string>();
  const json payload = j.contains("payload") ? j.at("payload") : json::object();
  ClientMessage msg;
  if (type == "open") {
    msg.kind = ClientMessage::Kind::Open;
    if (!payload.is_object()) throw ProtocolError("open payload must be an object");
    msg.config = payload;
  } else if (type == "command") {
    msg.kind = ClientMessage::Kind::Command;
    msg.command = parse_command(payload);
  } else if (type == "close") {
    msg.kind = ClientMessage::Kind::Close;
  } else {
    throw ProtocolError("unknown message type '" + type + "'");
  }
  return msg;
}

std::string encode(std::string_view type, ordered_json payload) {
  ordered_json j;
  j["type"] = type;
  j["version"] = kProtocolVersion;
  j["payload"] = std::move(payload);
  return j.dump();
}

ordered_json to_json(const ClientCommand& command) {
  ordered_json p;
  p["kind"] = to_string(command.type);
  switch (command.type) {
    case CommandType::Move:
      p["dy"] = command.dy;
      break;
    case CommandType::SetGaze:
      p["on"] = command.on;
      break;
    case CommandType::SelectInterface:
      p["interface"] = std::string(1, ehmi::letter(command.interface));
      break;
    default:
      break;
  }
  return p;
}

std::string encode_command(const ClientCommand& command) { return encode("command", to_json(command)); }

}  // namespace xwalk::server
