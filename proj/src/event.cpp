#include "xwalk/event.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include "xwalk/errors.hpp"

namespace xwalk::core {

using nlohmann::ordered_json;

namespace {

constexpr std::pair<EventKind, std::string_view> kKindNames[] = {
    {EventKind::Spawned, "Spawned"},
    {EventKind::DetectionStart, "DetectionStart"},
    {EventKind::BrakeStart, "BrakeStart"},
    {EventKind::Horn, "Horn"},
    {EventKind::VehicleStopped, "VehicleStopped"},
    {EventKind::VehicleRestart, "VehicleRestart"},
    {EventKind::PedestrianEnteredRoad, "PedestrianEnteredRoad"},
    {EventKind::PedestrianReachedOpposite, "PedestrianReachedOpposite"},
    {EventKind::PedestrianAborted, "PedestrianAborted"},
    {EventKind::Collision, "Collision"},
    {EventKind::DisplayChanged, "DisplayChanged"},
    {EventKind::Despawned, "Despawned"},
};

ordered_json optional_number(const std::optional<double>& value) {
  if (!value || !std::isfinite(*value)) return nullptr;
  return *value;
}

std::optional<double> read_optional(const ordered_json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<double>();
}

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

ordered_json payload_json(const Payload& payload) {
  return std::visit(
      Overloaded{
          [](const SpawnedPayload& p) {
            return ordered_json{{"vehicle_id", p.vehicle_id},
                                {"x", p.x},
                                {"v", p.v},
                                {"gap_class", vehicle::to_string(p.gap_class)},
                                {"yielding", p.yielding}};
          },
          [](const DetectionPayload& p) {
            return ordered_json{
                {"vehicle_id", p.vehicle_id}, {"x", p.x}, {"v", p.v}, {"d_to_line", p.d_to_line}, {"ped_y", p.ped_y}};
          },
          [](const BrakePayload& p) {
            return ordered_json{{"vehicle_id", p.vehicle_id},
                                {"x", p.x},
                                {"v", p.v},
                                {"a_req", optional_number(p.a_req)},
                                {"stop_x", p.stop_x}};
          },
          [](const VehicleStoppedPayload& p) {
            return ordered_json{
                {"vehicle_id", p.vehicle_id}, {"x", p.x}, {"queued", p.queued}, {"detected", p.detected}};
          },
          [](const VehiclePayload& p) { return ordered_json{{"vehicle_id", p.vehicle_id}, {"x", p.x}}; },
          [](const EnteredRoadPayload& p) {
            ordered_json vehicle = nullptr;
            if (p.vehicle) {
              const auto& n = *p.vehicle;
              vehicle = ordered_json{{"vehicle_id", n.vehicle_id},
                                     {"d", n.d},
                                     {"v", n.v},
                                     {"mode", vehicle::to_string(n.mode)},
                                     {"queued", n.queued},
                                     {"yielding", n.yielding},
                                     {"detected", n.detected},
                                     {"gap_class", vehicle::to_string(n.gap_class)}};
            }
            return ordered_json{{"origin", pedestrian::to_string(p.origin)}, {"y", p.y}, {"vehicle", vehicle}};
          },
          [](const PedestrianZonePayload& p) {
            return ordered_json{{"zone", pedestrian::to_string(p.zone)}, {"y", p.y}};
          },
          [](const CollisionPayload& p) {
            return ordered_json{{"vehicle_id", p.vehicle_id}, {"x", p.x}, {"v", p.v}, {"ped_y", p.ped_y}};
          },
          [](const DisplayPayload& p) {
            ordered_json id = nullptr;
            if (p.vehicle_id) id = *p.vehicle_id;
            return ordered_json{{"target", p.vehicle_id ? "vehicle" : "road"},
                                {"vehicle_id", id},
                                {"v", p.v},
                                {"a", p.a},
                                {"display", ehmi::to_json(p.display)}};
          },
      },
      payload);
}

Payload payload_from_json(EventKind kind, const ordered_json& j) {
  switch (kind) {
    case EventKind::Spawned:
      return SpawnedPayload{j.at("vehicle_id").get<int>(), j.at("x").get<double>(), j.at("v").get<double>(),
                            vehicle::gap_class_from_string(j.at("gap_class").get<std::string>()),
                            j.at("yielding").get<bool>()};
    case EventKind::DetectionStart:
      return DetectionPayload{j.at("vehicle_id").get<int>(), j.at("x").get<double>(), j.at("v").get<double>(),
                              j.at("d_to_line").get<double>(), j.at("ped_y").get<double>()};
    case EventKind::BrakeStart:
    case EventKind::Horn:
      return BrakePayload{j.at("vehicle_id").get<int>(), j.at("x").get<double>(), j.at("v").get<double>(),
                          read_optional(j, "a_req"), j.at("stop_x").get<double>()};
    case EventKind::VehicleStopped:
      return VehicleStoppedPayload{j.at("vehicle_id").get<int>(), j.at("x").get<double>(), j.at("queued").get<bool>(),
                                   j.at("detected").get<bool>()};
    case EventKind::VehicleRestart:
    case EventKind::Despawned:
      return VehiclePayload{j.at("vehicle_id").get<int>(), j.at("x").get<double>()};
    case EventKind::PedestrianEnteredRoad: {
      EnteredRoadPayload p;
      p.origin = pedestrian::zone_from_string(j.at("origin").get<std::string>());
      p.y = j.at("y").get<double>();
      const auto& v = j.at("vehicle");
      if (!v.is_null()) {
        p.vehicle = NegotiatingVehicle{v.at("vehicle_id").get<int>(),
                                       v.at("d").get<double>(),
                                       v.at("v").get<double>(),
                                       vehicle::mode_from_string(v.at("mode").get<std::string>()),
                                       v.at("queued").get<bool>(),
                                       v.at("yielding").get<bool>(),
                                       v.at("detected").get<bool>(),
                                       vehicle::gap_class_from_string(v.at("gap_class").get<std::string>())};
      }
      return p;
    }
    case EventKind::PedestrianReachedOpposite:
    case EventKind::PedestrianAborted:
      return PedestrianZonePayload{pedestrian::zone_from_string(j.at("zone").get<std::string>()),
                                   j.at("y").get<double>()};
    case EventKind::Collision:
      return CollisionPayload{j.at("vehicle_id").get<int>(), j.at("x").get<double>(), j.at("v").get<double>(),
                              j.at("ped_y").get<double>()};
    case EventKind::DisplayChanged: {
      DisplayPayload p;
      if (!j.at("vehicle_id").is_null()) p.vehicle_id = j.at("vehicle_id").get<int>();
      p.v = j.at("v").get<double>();
      p.a = j.at("a").get<double>();
      p.display = ehmi::display_from_json(j.at("display"));
      return p;
    }
  }
  throw MalformedLog("unhandled event kind");
}

}  // namespace

std::string_view to_string(EventKind kind) {
  for (const auto& [k, n] : kKindNames) {
    if (k == kind) return n;
  }
  return "Spawned";
}

EventKind event_kind_from_string(std::string_view name) {
  for (const auto& [k, n] : kKindNames) {
    if (n == name) return k;
  }
  throw MalformedLog("unknown event kind '" + std::string(name) + "'");
}

ordered_json to_json(const Event& event) {
  ordered_json j;
  j["t"] = event.t;
  j["kind"] = to_string(event.kind);
  j["seq"] = event.seq;
  j["payload"] = payload_json(event.payload);
  return j;
}

Event event_from_json(const ordered_json& j) {
  try {
    Event e;
    e.t = j.at("t").get<double>();
    e.kind = event_kind_from_string(j.at("kind").get<std::string>());
    e.seq = j.at("seq").get<std::uint64_t>();
    e.payload = payload_from_json(e.kind, j.at("payload"));
    return e;
  } catch (const nlohmann::json::exception& ex) {
    throw MalformedLog(std::string("bad event: ") + ex.what());
  }
}

std::string serialize_line(const Event& event) { return to_json(event).dump(); }

std::string serialize_log(const EventLog& log) {
  std::ostringstream out;
  write_log(out, log);
  return out.str();
}

void write_log(std::ostream& out, const EventLog& log) {
  for (const Event& e : log) out << serialize_line(e) << '\n';
}

EventLog read_log(std::istream& in) {
  EventLog log;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.empty()) continue;
    try {
      log.push_back(event_from_json(ordered_json::parse(line)));
    } catch (const std::exception& ex) {
      throw MalformedLog("line " + std::to_string(number) + ": " + ex.what());
    }
  }
  return log;
}

EventLog parse_log(std::string_view text) {
  std::istringstream in{std::string(text)};
  return read_log(in);
}

void validate_order(const EventLog& log) {
  for (std::size_t i = 1; i < log.size(); ++i) {
    const Event& prev = log[i - 1];
    const Event& cur = log[i];
    if (cur.t < prev.t || cur.seq <= prev.seq) {
      throw MalformedLog("event " + std::to_string(i) + " breaks (t, seq) ordering");
    }
  }
}

}  // namespace xwalk::core
