#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "json.hpp"
#include "xwalk/ehmi.hpp"

namespace xwalk::server {

inline constexpr int kProtocolVersion = 1;
inline constexpr unsigned short kDefaultPort = 8137;

enum class CommandType { Move, SetGaze, Start, Pause, Reset, SelectInterface };

std::string_view to_string(CommandType type);

struct ClientCommand {
  CommandType type = CommandType::Start;
  double dy = 0.0;  // Move: lateral velocity intent in m/s, held until the next Move
  bool on = false;  // SetGaze
  ehmi::InterfaceKind interface = ehmi::InterfaceKind::Baseline;  // SelectInterface
};

struct ClientMessage {
  enum class Kind { Open, Command, Close };
  Kind kind = Kind::Command;
  ClientCommand command{};
  // Open: config overrides in the config-file schema.
  nlohmann::json config = nlohmann::json::object();
};

/// Messages are {"type", "version", "payload"}. Throws ProtocolError.
ClientMessage parse_client_message(std::string_view text);

std::string encode(std::string_view type, nlohmann::ordered_json payload);
nlohmann::ordered_json to_json(const ClientCommand& command);
std::string encode_command(const ClientCommand& command);

}  // namespace xwalk::server
