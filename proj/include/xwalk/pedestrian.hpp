#pragma once

#include <optional>
#include <string_view>

#include "xwalk/constants.hpp"

namespace xwalk::pedestrian {

// Sidewalk A lies at y <= 0, sidewalk B at y >= road width; the road is in between.
enum class Zone { SidewalkA, Road, SidewalkB };

std::string_view to_string(Zone zone);
Zone zone_from_string(std::string_view name);

struct PedestrianParams {
  double walk_speed = constants::kWalkSpeed;
  double road_width = constants::kRoadWidth;
  double sidewalk_depth = 2.0;
  double footprint = constants::kPedestrianSize;
  double edge_proximity = constants::kEdgeProximity;
};

struct PedestrianState {
  double x = 0.0;  // along the road; the crossing line is x = 0
  double y = 0.0;
  double speed = 0.0;
  bool gaze = false;
  Zone zone = Zone::SidewalkA;
  // Sidewalk the current crossing attempt started from; set only while on the road.
  std::optional<Zone> attempt_origin;

  friend bool operator==(const PedestrianState&, const PedestrianState&) = default;
};

enum class CommandKind { Wait, StartCrossing, ContinueCrossing, Abort, Move };

std::string_view to_string(CommandKind kind);
CommandKind command_kind_from_string(std::string_view name);

/// One engine step worth of pedestrian input. `dy` is only read for Move and is
/// the requested lateral displacement for this step (clamped to walk speed).
struct PedestrianCommand {
  CommandKind kind = CommandKind::Wait;
  bool gaze = false;
  double dy = 0.0;

  friend bool operator==(const PedestrianCommand&, const PedestrianCommand&) = default;
};

enum class Transition { None, EnteredRoad, ReachedOpposite, Aborted };

Zone zone_of(double y, double road_width);

/// Distance to the nearest sidewalk edge (y = 0 or y = road width).
double edge_distance(const PedestrianState& state, double road_width);

PedestrianState apply_command(const PedestrianState& state, const PedestrianCommand& cmd,
                              const PedestrianParams& params, double dt);

Transition classify_transition(const PedestrianState& before, const PedestrianState& after);

/// Standing at the edge of sidewalk A, not looking.
PedestrianState initial_state();

}  // namespace xwalk::pedestrian
