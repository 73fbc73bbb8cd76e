#include "xwalk/policy.hpp"

#include <cmath>
#include <limits>

#include "xwalk/errors.hpp"

namespace xwalk::pedestrian {

std::string_view to_string(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::WaitFullStop:
      return "wait-full-stop";
    case PolicyKind::GapAcceptance:
      return "gap-acceptance";
    case PolicyKind::InterfaceReactive:
      return "interface-reactive";
    case PolicyKind::External:
      return "external";
  }
  return "wait-full-stop";
}

PolicyKind policy_kind_from_string(std::string_view name) {
  if (name == "wait-full-stop" || name == "always-wait-full-stop") return PolicyKind::WaitFullStop;
  if (name == "gap-acceptance") return PolicyKind::GapAcceptance;
  if (name == "interface-reactive") return PolicyKind::InterfaceReactive;
  if (name == "external") return PolicyKind::External;
  throw ConfigError("unknown pedestrian policy '" + std::string(name) + "'");
}

double time_to_arrival(const VehicleObservation& vehicle, double accel, double top_speed) {
  if (vehicle.v <= 0.0) return std::numeric_limits<double>::infinity();
  if (vehicle.d <= 0.0) return 0.0;
  if (vehicle.a <= 0.0 || vehicle.v >= top_speed) return vehicle.d / vehicle.v;
  const double t_top = (top_speed - vehicle.v) / accel;
  const double d_top = vehicle.v * t_top + 0.5 * accel * t_top * t_top;
  if (d_top >= vehicle.d) {
    return (-vehicle.v + std::sqrt(vehicle.v * vehicle.v + 2.0 * accel * vehicle.d)) / accel;
  }
  return t_top + (vehicle.d - d_top) / top_speed;
}

bool interface_trigger(const PolicySpec& spec, const Observation& obs) {
  if (!obs.nearest) return true;  // nothing visible on the road
  const VehicleObservation& car = *obs.nearest;
  if (const auto* s = std::get_if<ehmi::Smile>(&obs.display)) return s->shape == ehmi::Smile::Shape::Smile;
  if (const auto* p = std::get_if<ehmi::Projection>(&obs.display)) {
    return p->road == ehmi::Projection::Road::GreenCrosswalk;
  }
  if (const auto* m = std::get_if<ehmi::SmartRoad>(&obs.display)) {
    return m->state == ehmi::SmartRoad::State::SafeApproach;
  }
  if (const auto* f = std::get_if<ehmi::SafeRoads>(&obs.display)) return f->arrow_len < car.d - spec.arrow_margin;
  if (const auto* e = std::get_if<ehmi::SafeRoadsExt>(&obs.display)) return e->blue_head_x.has_value();
  return time_to_arrival(car) >= spec.baseline_tta;
}

PedestrianCommand Policy::decide(const Observation& obs, double dt) {
  PedestrianCommand cmd;
  cmd.gaze = true;
  const PedestrianState& self = obs.self;

  if (spec_.kind == PolicyKind::External) {
    cmd.gaze = false;
    return cmd;
  }

  if (self.zone == Zone::Road) {
    trigger_held_ = 0.0;
    cmd.kind = CommandKind::ContinueCrossing;
    if (spec_.kind == PolicyKind::GapAcceptance && spec_.abort_tta > 0.0 && obs.nearest) {
      const Zone origin = self.attempt_origin.value_or(Zone::SidewalkA);
      const double covered = origin == Zone::SidewalkA ? self.y : params_.road_width - self.y;
      if (covered < 0.5 * params_.road_width && time_to_arrival(*obs.nearest) < spec_.abort_tta) {
        cmd.kind = CommandKind::Abort;
      }
    }
    return cmd;
  }

  bool go = false;
  switch (spec_.kind) {
    case PolicyKind::WaitFullStop:
      go = obs.nearest && obs.nearest->v == 0.0;
      break;
    case PolicyKind::GapAcceptance:
      go = !obs.nearest || time_to_arrival(*obs.nearest) > spec_.tta_threshold;
      break;
    case PolicyKind::InterfaceReactive:
      if (interface_trigger(spec_, obs)) {
        trigger_held_ += dt;
      } else {
        trigger_held_ = 0.0;
      }
      // Compare in whole steps so a reaction time of k*dt waits exactly k steps.
      go = trigger_held_ + 0.5 * dt >= spec_.reaction_time + dt;
      break;
    case PolicyKind::External:
      break;
  }
  cmd.kind = go ? CommandKind::StartCrossing : CommandKind::Wait;
  return cmd;
}

}  // namespace xwalk::pedestrian
