#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "json.hpp"
#include "xwalk/ehmi.hpp"
#include "xwalk/pedestrian.hpp"
#include "xwalk/vehicle.hpp"

namespace xwalk::core {

enum class EventKind {
  Spawned,
  DetectionStart,
  BrakeStart,
  Horn,
  VehicleStopped,
  VehicleRestart,
  PedestrianEnteredRoad,
  PedestrianReachedOpposite,
  PedestrianAborted,
  Collision,
  DisplayChanged,
  Despawned,
};

std::string_view to_string(EventKind kind);
EventKind event_kind_from_string(std::string_view name);

struct SpawnedPayload {
  int vehicle_id = 0;
  double x = 0.0;
  double v = 0.0;
  vehicle::GapClass gap_class = vehicle::GapClass::G45;
  bool yielding = true;
  friend bool operator==(const SpawnedPayload&, const SpawnedPayload&) = default;
};

struct DetectionPayload {
  int vehicle_id = 0;
  double x = 0.0;
  double v = 0.0;
  double d_to_line = 0.0;
  double ped_y = 0.0;
  friend bool operator==(const DetectionPayload&, const DetectionPayload&) = default;
};

/// BrakeStart and Horn. a_req is absent when the pedestrian is already inside the stop offset.
struct BrakePayload {
  int vehicle_id = 0;
  double x = 0.0;
  double v = 0.0;
  std::optional<double> a_req;
  double stop_x = 0.0;
  friend bool operator==(const BrakePayload&, const BrakePayload&) = default;
};

struct VehicleStoppedPayload {
  int vehicle_id = 0;
  double x = 0.0;
  bool queued = false;
  bool detected = false;
  friend bool operator==(const VehicleStoppedPayload&, const VehicleStoppedPayload&) = default;
};

/// VehicleRestart and Despawned.
struct VehiclePayload {
  int vehicle_id = 0;
  double x = 0.0;
  friend bool operator==(const VehiclePayload&, const VehiclePayload&) = default;
};

/// The vehicle a pedestrian negotiates with when stepping onto the road.
struct NegotiatingVehicle {
  int vehicle_id = 0;
  double d = 0.0;
  double v = 0.0;
  vehicle::Mode mode = vehicle::Mode::Cruise;
  bool queued = false;
  bool yielding = true;
  bool detected = false;
  vehicle::GapClass gap_class = vehicle::GapClass::G45;
  friend bool operator==(const NegotiatingVehicle&, const NegotiatingVehicle&) = default;
};

struct EnteredRoadPayload {
  pedestrian::Zone origin = pedestrian::Zone::SidewalkA;
  double y = 0.0;
  std::optional<NegotiatingVehicle> vehicle;
  friend bool operator==(const EnteredRoadPayload&, const EnteredRoadPayload&) = default;
};

/// PedestrianReachedOpposite and PedestrianAborted.
struct PedestrianZonePayload {
  pedestrian::Zone zone = pedestrian::Zone::SidewalkA;
  double y = 0.0;
  friend bool operator==(const PedestrianZonePayload&, const PedestrianZonePayload&) = default;
};

struct CollisionPayload {
  int vehicle_id = 0;
  double x = 0.0;
  double v = 0.0;
  double ped_y = 0.0;
  friend bool operator==(const CollisionPayload&, const CollisionPayload&) = default;
};

/// Either a vehicle-mounted display (vehicle_id set) or the smart road.
struct DisplayPayload {
  std::optional<int> vehicle_id;
  double v = 0.0;
  double a = 0.0;
  ehmi::DisplayState display = ehmi::Baseline{};
  friend bool operator==(const DisplayPayload&, const DisplayPayload&) = default;
};

using Payload = std::variant<SpawnedPayload, DetectionPayload, BrakePayload, VehicleStoppedPayload, VehiclePayload,
                             EnteredRoadPayload, PedestrianZonePayload, CollisionPayload, DisplayPayload>;

struct Event {
  double t = 0.0;
  EventKind kind = EventKind::Spawned;
  std::uint64_t seq = 0;
  Payload payload = SpawnedPayload{};

  template <typename P>
  const P& as() const {
    return std::get<P>(payload);
  }
  friend bool operator==(const Event&, const Event&) = default;
};

using EventLog = std::vector<Event>;

/// Field order is fixed: t, kind, seq, payload.
nlohmann::ordered_json to_json(const Event& event);
Event event_from_json(const nlohmann::ordered_json& j);

std::string serialize_line(const Event& event);
std::string serialize_log(const EventLog& log);
void write_log(std::ostream& out, const EventLog& log);
/// Throws MalformedLog with the offending line number.
EventLog read_log(std::istream& in);
EventLog parse_log(std::string_view text);

/// Checks (t, seq) ordering; throws MalformedLog.
void validate_order(const EventLog& log);

}  // namespace xwalk::core
