#include "xwalk/vehicle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "xwalk/errors.hpp"

namespace xwalk::vehicle {

double gap_meters(GapClass gap) { return constants::kGapMeters[static_cast<std::size_t>(gap_index(gap))]; }

int gap_index(GapClass gap) {
  switch (gap) {
    case GapClass::G45:
      return 0;
    case GapClass::G60:
      return 1;
    case GapClass::G100:
      return 2;
  }
  return 0;
}

std::string_view to_string(GapClass gap) {
  switch (gap) {
    case GapClass::G45:
      return "45";
    case GapClass::G60:
      return "60";
    case GapClass::G100:
      return "100";
  }
  return "45";
}

GapClass gap_class_from_string(std::string_view name) {
  if (name == "45") return GapClass::G45;
  if (name == "60") return GapClass::G60;
  if (name == "100") return GapClass::G100;
  throw MalformedLog("unknown gap class '" + std::string(name) + "'");
}

std::string_view to_string(Mode mode) {
  switch (mode) {
    case Mode::Cruise:
      return "Cruise";
    case Mode::Braking:
      return "Braking";
    case Mode::Stopped:
      return "Stopped";
    case Mode::Restarting:
      return "Restarting";
  }
  return "Cruise";
}

Mode mode_from_string(std::string_view name) {
  if (name == "Cruise") return Mode::Cruise;
  if (name == "Braking") return Mode::Braking;
  if (name == "Stopped") return Mode::Stopped;
  if (name == "Restarting") return Mode::Restarting;
  throw MalformedLog("unknown vehicle mode '" + std::string(name) + "'");
}

double PidController::update(double v_target, double v, double dt) {
  const double error = v_target - v;
  // Derivative on measurement, so set-point steps do not kick the output.
  const double derivative = primed_ ? -(v - last_measurement_) / dt : 0.0;
  const double integral = integral_ + error * dt;
  const double raw = gains_.kp * error + gains_.ki * integral + gains_.kd * derivative;
  const double clamped = std::clamp(raw, gains_.min_output, gains_.max_output);
  const double max_delta = gains_.jerk_limit * dt;
  const double shaped = std::clamp(clamped, last_output_ - max_delta, last_output_ + max_delta);
  if (shaped == raw) integral_ = integral;
  last_output_ = shaped;
  last_measurement_ = v;
  primed_ = true;
  return shaped;
}

void PidController::reset() {
  integral_ = 0.0;
  last_output_ = 0.0;
  last_measurement_ = 0.0;
  primed_ = false;
}

double required_deceleration(double v, double d_stop) {
  if (!(d_stop > 0.0)) throw DomainError("required_deceleration: stopping distance must be positive");
  return v * v / (2.0 * d_stop);
}

BrakePlan plan_brake(double v, double d_to_pedestrian, const VehicleParams& params) {
  BrakePlan plan;
  plan.stop_x = -params.stop_offset;
  const double d_stop = d_to_pedestrian - params.stop_offset;
  if (!(d_stop > 0.0)) {
    plan.decision = BrakePlan::Decision::Horn;
    plan.a_req = std::numeric_limits<double>::infinity();
    return plan;
  }
  plan.a_req = required_deceleration(v, d_stop);
  plan.decision = plan.a_req <= params.max_decel ? BrakePlan::Decision::Brake : BrakePlan::Decision::Horn;
  return plan;
}

double stopping_distance(double v, double a_ref) {
  if (!(a_ref > 0.0)) throw DomainError("stopping_distance: reference deceleration must be positive");
  return v * v / (2.0 * a_ref);
}

double select_brake_curve(double a_current) {
  if (!(a_current >= 0.0) || a_current > constants::kMaxDecel) {
    throw DomainError("select_brake_curve: deceleration outside [0, 6] m/s^2");
  }
  return a_current <= constants::kComfortDecel ? constants::kComfortDecel : constants::kMaxDecel;
}

bool detect(const VehicleState& vehicle, const pedestrian::PedestrianState& ped,
            const VehicleParams& params, const pedestrian::PedestrianParams& ped_params) {
  if (!vehicle.yielding || !ped.gaze) return false;
  const double d_to_line = ped.x - vehicle.x;
  if (d_to_line > params.detection_range) return false;
  // Front bumper already at or past the pedestrian's footprint.
  if (vehicle.x > ped.x - 0.5 * ped_params.footprint) return false;
  return pedestrian::edge_distance(ped, ped_params.road_width) <= ped_params.edge_proximity;
}

double follow_speed_cap(double follower_x, const LeaderView& leader, const VehicleParams& params) {
  const double slot = leader.rear_x - params.stopped_headway;
  const double leader_travel = leader.v > 0.0 ? stopping_distance(leader.v, leader.stop_decel) : 0.0;
  const double room = slot + leader_travel - follower_x;
  if (room <= 0.01) return 0.0;
  // Largest v with v^2 / (2 b) + T v <= room.
  const double b = params.follow_decel;
  const double t = params.time_headway;
  return b * (-t + std::sqrt(t * t + 2.0 * room / b));
}

LeaderView leader_view(const VehicleState& leader, const VehicleParams& params) {
  LeaderView view;
  view.rear_x = leader.rear(params.length);
  view.v = leader.v;
  // A braking leader may be held back further by its own leader, so the
  // follower always assumes the hardest stop it could make.
  view.stop_decel = params.max_decel;
  return view;
}

AccelCommand command_acceleration(VehicleState& vehicle, const std::optional<LeaderView>& leader,
                                  const VehicleParams& params, double dt) {
  AccelCommand cmd;
  switch (vehicle.mode) {
    case Mode::Stopped:
      return cmd;
    case Mode::Braking:
      cmd.a = vehicle.plan ? -vehicle.plan->a_req : 0.0;
      break;
    case Mode::Cruise:
    case Mode::Restarting:
      cmd.a = vehicle.pid.update(params.cruise_speed, vehicle.v, dt);
      break;
  }
  if (leader) {
    const double cap = follow_speed_cap(vehicle.x, *leader, params);
    const double a_cap = (cap - vehicle.v) / dt;
    if (a_cap < cmd.a) {
      cmd.a = a_cap;
      cmd.follow_bound = true;
    }
  }
  cmd.a = std::clamp(cmd.a, -params.max_decel, params.max_accel);
  if (vehicle.mode != Mode::Braking) vehicle.pid.sync_output(cmd.a);
  return cmd;
}

void integrate(VehicleState& vehicle, double a, double dt) {
  vehicle.a = a;
  const double v_next = vehicle.v + a * dt;
  if (a < 0.0 && v_next <= 0.0) {
    vehicle.x += vehicle.v * vehicle.v / (2.0 * -a);
    vehicle.v = 0.0;
    return;
  }
  vehicle.x += vehicle.v * dt + 0.5 * a * dt * dt;
  vehicle.v = std::max(0.0, v_next);
}

void begin_restart(VehicleState& vehicle, double now) {
  vehicle.mode = Mode::Restarting;
  vehicle.mode_since = now;
  vehicle.detected_pedestrian = false;
  vehicle.plan.reset();
  vehicle.pid.reset();
}

}  // namespace xwalk::vehicle
