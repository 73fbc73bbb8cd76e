#include "xwalk/pedestrian.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "xwalk/errors.hpp"

namespace xwalk::pedestrian {

std::string_view to_string(Zone zone) {
  switch (zone) {
    case Zone::SidewalkA:
      return "SidewalkA";
    case Zone::Road:
      return "Road";
    case Zone::SidewalkB:
      return "SidewalkB";
  }
  return "SidewalkA";
}

Zone zone_from_string(std::string_view name) {
  if (name == "SidewalkA") return Zone::SidewalkA;
  if (name == "Road") return Zone::Road;
  if (name == "SidewalkB") return Zone::SidewalkB;
  throw MalformedLog("unknown zone '" + std::string(name) + "'");
}

std::string_view to_string(CommandKind kind) {
  switch (kind) {
    case CommandKind::Wait:
      return "Wait";
    case CommandKind::StartCrossing:
      return "StartCrossing";
    case CommandKind::ContinueCrossing:
      return "ContinueCrossing";
    case CommandKind::Abort:
      return "Abort";
    case CommandKind::Move:
      return "Move";
  }
  return "Wait";
}

CommandKind command_kind_from_string(std::string_view name) {
  if (name == "Wait") return CommandKind::Wait;
  if (name == "StartCrossing") return CommandKind::StartCrossing;
  if (name == "ContinueCrossing") return CommandKind::ContinueCrossing;
  if (name == "Abort") return CommandKind::Abort;
  if (name == "Move") return CommandKind::Move;
  throw ConfigError("unknown pedestrian command '" + std::string(name) + "'");
}

Zone zone_of(double y, double road_width) {
  if (y <= 0.0) return Zone::SidewalkA;
  if (y >= road_width) return Zone::SidewalkB;
  return Zone::Road;
}

double edge_distance(const PedestrianState& state, double road_width) {
  return std::min(std::abs(state.y), std::abs(state.y - road_width));
}

namespace {

double step_toward(double y, double target, double max_step) {
  if (y < target) return std::min(target, y + max_step);
  if (y > target) return std::max(target, y - max_step);
  return y;
}

}  // namespace

PedestrianState apply_command(const PedestrianState& state, const PedestrianCommand& cmd,
                              const PedestrianParams& params, double dt) {
  PedestrianState next = state;
  next.gaze = cmd.gaze;
  const double max_step = params.walk_speed * dt;
  const double width = params.road_width;

  // The sidewalk the pedestrian is heading away from.
  const Zone origin = state.zone == Zone::Road ? state.attempt_origin.value_or(Zone::SidewalkA)
                                               : state.zone;
  const double far_edge = origin == Zone::SidewalkA ? width : 0.0;
  const double near_edge = origin == Zone::SidewalkA ? 0.0 : width;

  switch (cmd.kind) {
    case CommandKind::Wait:
      break;
    case CommandKind::StartCrossing:
    case CommandKind::ContinueCrossing:
      next.y = step_toward(state.y, far_edge, max_step);
      break;
    case CommandKind::Abort:
      if (state.zone == Zone::Road) next.y = step_toward(state.y, near_edge, max_step);
      break;
    case CommandKind::Move: {
      const double dy = std::isfinite(cmd.dy) ? std::clamp(cmd.dy, -max_step, max_step) : 0.0;
      next.y = std::clamp(state.y + dy, -params.sidewalk_depth, width + params.sidewalk_depth);
      break;
    }
  }

  next.speed = std::abs(next.y - state.y) / dt;
  next.zone = zone_of(next.y, width);
  if (next.zone == Zone::Road) {
    next.attempt_origin = state.zone == Zone::Road ? state.attempt_origin : state.zone;
  } else {
    next.attempt_origin.reset();
  }
  return next;
}

Transition classify_transition(const PedestrianState& before, const PedestrianState& after) {
  if (before.zone != Zone::Road && after.zone == Zone::Road) return Transition::EnteredRoad;
  if (before.zone == Zone::Road && after.zone != Zone::Road) {
    return after.zone == before.attempt_origin ? Transition::Aborted : Transition::ReachedOpposite;
  }
  // A single step that jumps over the whole road cannot happen at walk speed.
  return Transition::None;
}

PedestrianState initial_state() { return PedestrianState{}; }

}  // namespace xwalk::pedestrian
