#include "xwalk/world.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>

#include "xwalk/errors.hpp"

namespace xwalk::core {

using pedestrian::CommandKind;
using pedestrian::PedestrianCommand;
using pedestrian::Zone;
using vehicle::Mode;
using vehicle::VehicleState;

WorldState make_world(const SessionConfig& config) {
  validate(config);
  WorldState w;
  w.dt = config.timestep;
  w.road.width = config.pedestrian.road_width;
  w.road.visibility_range = config.scenario.visibility_range;
  w.rng.seed(config.seed);
  w.interface = config.interface;
  w.vehicle_params = config.vehicle;
  w.ped_params = config.pedestrian;
  w.scenario = config.scenario;
  w.ehmi_params = config.ehmi;
  w.display_tolerance = config.display_tolerance;
  w.traffic.pattern = scenario::generate_pattern(w.rng, config.scenario.max_generated_vehicles, config.scenario);
  return w;
}

Event make_event(WorldState& world, double t, EventKind kind, Payload payload) {
  Event e;
  e.t = t;
  e.kind = kind;
  e.seq = world.event_count++;
  e.payload = std::move(payload);
  return e;
}

std::optional<std::size_t> negotiation_leader(const WorldState& world) {
  const double limit = world.pedestrian.x - 0.5 * world.ped_params.footprint;
  for (std::size_t i = 0; i < world.vehicles.size(); ++i) {
    if (world.vehicles[i].x <= limit) return i;
  }
  return std::nullopt;
}

std::optional<std::size_t> nearest_visible(const WorldState& world) {
  const auto leader = negotiation_leader(world);
  if (!leader) return std::nullopt;
  if (world.pedestrian.x - world.vehicles[*leader].x > world.road.visibility_range) return std::nullopt;
  return leader;
}

namespace {

std::optional<std::size_t> smart_road_vehicle(const WorldState& world) {
  const double lo = world.pedestrian.x - world.road.visibility_range;
  const double hi = world.pedestrian.x + world.vehicle_params.stop_offset;
  for (std::size_t i = 0; i < world.vehicles.size(); ++i) {
    const double x = world.vehicles[i].x;
    if (x < hi && x >= lo) return i;
  }
  return std::nullopt;
}

ehmi::DisplayState smart_road_display(const WorldState& world, double t) {
  const auto idx = smart_road_vehicle(world);
  if (!idx) return ehmi::update_smart_road(std::nullopt, false);
  return ehmi::update_smart_road(ehmi::context_of(world.vehicles[*idx], t), true);
}

bool boxes_overlap(double ax0, double ax1, double ay0, double ay1, double bx0, double bx1, double by0, double by1) {
  return ax0 < bx1 && bx0 < ax1 && ay0 < by1 && by0 < ay1;
}

void negotiate(WorldState& w, VehicleState& veh, double now, std::vector<Event>& events) {
  const double d = w.pedestrian.x - veh.x;
  const vehicle::BrakePlan plan = vehicle::plan_brake(veh.v, d, w.vehicle_params);
  veh.negotiated = true;
  veh.detected_pedestrian = true;
  veh.detect_time = now;
  veh.plan = plan;
  events.push_back(
      make_event(w, now, EventKind::DetectionStart, DetectionPayload{veh.id, veh.x, veh.v, d, w.pedestrian.y}));
  std::optional<double> a_req;
  if (std::isfinite(plan.a_req)) a_req = plan.a_req;
  if (plan.brakes()) {
    veh.mode = Mode::Braking;
    veh.mode_since = now;
    veh.brake_start_v = veh.v;
    events.push_back(make_event(w, now, EventKind::BrakeStart, BrakePayload{veh.id, veh.x, veh.v, a_req, plan.stop_x}));
  } else {
    veh.horn_fired = true;
    events.push_back(make_event(w, now, EventKind::Horn, BrakePayload{veh.id, veh.x, veh.v, a_req, plan.stop_x}));
  }
}

bool should_release(const WorldState& w, std::size_t i, double now) {
  const VehicleState& veh = w.vehicles[i];
  if (veh.mode != Mode::Stopped) return false;
  const auto& ped = w.pedestrian;
  const bool ped_on_road = ped.zone == Zone::Road;
  if (veh.detected_pedestrian) {
    if (ped_on_road) return false;
    const bool attempt_done = w.last_attempt_end >= veh.detect_time;
    const bool intent_lost = w.intent_lost_since && now - *w.intent_lost_since >= w.vehicle_params.intent_grace;
    const bool timed_out = now - veh.mode_since >= w.vehicle_params.max_wait;
    if (!(attempt_done || intent_lost || timed_out)) return false;
  } else {
    const double d = ped.x - veh.x;
    const bool holding = veh.yielding && ped_on_road && d >= 0.0 && d <= w.vehicle_params.detection_range;
    if (holding) return false;
  }
  if (i > 0) {
    const auto view = vehicle::leader_view(w.vehicles[i - 1], w.vehicle_params);
    if (vehicle::follow_speed_cap(veh.x, view, w.vehicle_params) <= 0.5) return false;
  }
  return true;
}

}  // namespace

pedestrian::Observation observe(const WorldState& world) {
  pedestrian::Observation obs;
  obs.self = world.pedestrian;
  const double t = world.t();
  if (const auto idx = nearest_visible(world)) {
    const VehicleState& veh = world.vehicles[*idx];
    obs.nearest = pedestrian::VehicleObservation{veh.id, world.pedestrian.x - veh.x, veh.v, veh.a};
    if (world.interface != ehmi::InterfaceKind::SmartRoad) {
      obs.display = ehmi::vehicle_display(world.interface, ehmi::context_of(veh, t), world.ehmi_params);
    }
  }
  if (world.interface == ehmi::InterfaceKind::SmartRoad) obs.display = smart_road_display(world, t);
  return obs;
}

std::vector<Event> refresh_displays(WorldState& w, double t) {
  std::vector<Event> events;
  const auto changed = [&](const std::optional<ehmi::DisplayState>& logged, const ehmi::DisplayState& now) {
    return !logged || !ehmi::approximately_equal(*logged, now, w.display_tolerance);
  };
  for (const VehicleState& veh : w.vehicles) {
    ehmi::DisplayState d = ehmi::vehicle_display(w.interface, ehmi::context_of(veh, t), w.ehmi_params);
    w.displays[veh.id] = d;
    auto it = w.logged_displays.find(veh.id);
    const std::optional<ehmi::DisplayState> logged =
        it == w.logged_displays.end() ? std::nullopt : std::optional<ehmi::DisplayState>(it->second);
    if (changed(logged, d)) {
      w.logged_displays[veh.id] = d;
      events.push_back(make_event(w, t, EventKind::DisplayChanged, DisplayPayload{veh.id, veh.v, veh.a, d}));
    }
  }
  if (w.interface == ehmi::InterfaceKind::SmartRoad) {
    ehmi::DisplayState d = smart_road_display(w, t);
    w.road_display = d;
    if (changed(w.logged_road_display, d)) {
      w.logged_road_display = d;
      const auto idx = smart_road_vehicle(w);
      const double v = idx ? w.vehicles[*idx].v : 0.0;
      const double a = idx ? w.vehicles[*idx].a : 0.0;
      events.push_back(make_event(w, t, EventKind::DisplayChanged, DisplayPayload{std::nullopt, v, a, d}));
    }
  }
  return events;
}

std::vector<Event> step(WorldState& w, const PedestrianCommand& command) {
  std::vector<Event> events;
  const double dt = w.dt;
  const double now = static_cast<double>(w.step_index + 1) * dt;
  const auto& vp = w.vehicle_params;
  const auto& pp = w.ped_params;

  // Pedestrian.
  const pedestrian::PedestrianState before = w.pedestrian;
  const pedestrian::PedestrianState after = pedestrian::apply_command(before, command, pp, dt);
  const pedestrian::Transition transition = pedestrian::classify_transition(before, after);
  std::optional<NegotiatingVehicle> negotiator;
  if (transition == pedestrian::Transition::EnteredRoad) {
    if (const auto idx = nearest_visible(w)) {
      const VehicleState& veh = w.vehicles[*idx];
      negotiator = NegotiatingVehicle{veh.id,      before.x - veh.x,        veh.v,        veh.mode,
                                      veh.queued,  veh.yielding,            veh.detected_pedestrian,
                                      veh.gap_class};
    }
  }
  w.pedestrian = after;
  switch (transition) {
    case pedestrian::Transition::EnteredRoad:
      events.push_back(make_event(w, now, EventKind::PedestrianEnteredRoad,
                                  EnteredRoadPayload{before.zone, after.y, negotiator}));
      break;
    case pedestrian::Transition::ReachedOpposite:
      w.last_attempt_end = now;
      events.push_back(
          make_event(w, now, EventKind::PedestrianReachedOpposite, PedestrianZonePayload{after.zone, after.y}));
      break;
    case pedestrian::Transition::Aborted:
      w.last_attempt_end = now;
      events.push_back(make_event(w, now, EventKind::PedestrianAborted, PedestrianZonePayload{after.zone, after.y}));
      break;
    case pedestrian::Transition::None:
      break;
  }
  const bool signalling = after.zone == Zone::Road ||
                          (after.gaze && pedestrian::edge_distance(after, pp.road_width) <= pp.edge_proximity);
  if (signalling) {
    w.intent_lost_since.reset();
  } else if (!w.intent_lost_since) {
    w.intent_lost_since = now;
  }

  // Detection by the negotiation leader.
  if (const auto idx = negotiation_leader(w)) {
    VehicleState& veh = w.vehicles[*idx];
    if (!veh.negotiated && !veh.queued && vehicle::detect(veh, after, vp, pp)) negotiate(w, veh, now, events);
  }

  // Stopped vehicles that may move on.
  for (std::size_t i = 0; i < w.vehicles.size(); ++i) {
    if (should_release(w, i, now)) {
      VehicleState& veh = w.vehicles[i];
      vehicle::begin_restart(veh, now);
      events.push_back(make_event(w, now, EventKind::VehicleRestart, VehiclePayload{veh.id, veh.x}));
    }
  }

  // Accelerations from the pre-step states, then integration.
  const std::vector<VehicleState> previous = w.vehicles;
  std::vector<vehicle::AccelCommand> commands(w.vehicles.size());
  for (std::size_t i = 0; i < w.vehicles.size(); ++i) {
    std::optional<vehicle::LeaderView> leader;
    if (i > 0) leader = vehicle::leader_view(previous[i - 1], vp);
    commands[i] = vehicle::command_acceleration(w.vehicles[i], leader, vp, dt);
  }
  for (std::size_t i = 0; i < w.vehicles.size(); ++i) {
    VehicleState& veh = w.vehicles[i];
    const vehicle::AccelCommand& cmd = commands[i];
    if (veh.mode == Mode::Stopped) {
      veh.a = 0.0;
      continue;
    }
    vehicle::integrate(veh, cmd.a, dt);
    if (cmd.follow_bound && veh.v < vp.cruise_speed - 0.5) {
      veh.queued = true;
      veh.queued_behind = previous[i - 1].id;
    }
    bool stopped = false;
    if (veh.mode == Mode::Braking && veh.v == 0.0) {
      stopped = true;
    } else if ((veh.mode == Mode::Cruise || veh.mode == Mode::Restarting) && veh.v == 0.0 && cmd.follow_bound) {
      stopped = true;
    } else if (veh.mode == Mode::Restarting && veh.v >= vp.cruise_speed - 0.05) {
      veh.mode = Mode::Cruise;
      veh.mode_since = now;
    }
    if (stopped) {
      veh.mode = Mode::Stopped;
      veh.mode_since = now;
      veh.a = 0.0;
      events.push_back(make_event(w, now, EventKind::VehicleStopped,
                                  VehicleStoppedPayload{veh.id, veh.x, veh.queued, veh.detected_pedestrian}));
    }
    if (veh.mode == Mode::Cruise && !cmd.follow_bound && veh.v >= vp.cruise_speed - 0.05) {
      veh.queued = false;
      veh.queued_behind.reset();
    }
    if (veh.horn_fired && veh.detected_pedestrian && veh.x > after.x) veh.detected_pedestrian = false;
  }

  // Collisions, on the rising edge of overlap.
  const double half = 0.5 * pp.footprint;
  const double lane_lo = 0.5 * (w.road.width - vp.width);
  const double lane_hi = lane_lo + vp.width;
  for (const VehicleState& veh : w.vehicles) {
    const bool overlap = boxes_overlap(veh.rear(vp.length), veh.x, lane_lo, lane_hi, after.x - half, after.x + half,
                                       after.y - half, after.y + half);
    if (overlap && !w.overlapping.count(veh.id)) {
      w.overlapping.insert(veh.id);
      events.push_back(make_event(w, now, EventKind::Collision, CollisionPayload{veh.id, veh.x, veh.v, after.y}));
    } else if (!overlap) {
      w.overlapping.erase(veh.id);
    }
  }

  while (!w.vehicles.empty() && w.vehicles.front().x > w.scenario.despawn_x) {
    const VehicleState& veh = w.vehicles.front();
    events.push_back(make_event(w, now, EventKind::Despawned, VehiclePayload{veh.id, veh.x}));
    w.displays.erase(veh.id);
    w.logged_displays.erase(veh.id);
    w.overlapping.erase(veh.id);
    w.vehicles.erase(w.vehicles.begin());
  }

  ++w.step_index;
  auto display_events = refresh_displays(w, now);
  events.insert(events.end(), display_events.begin(), display_events.end());
  return events;
}

Session::Session(const SessionConfig& config) : config_(config), world_(make_world(config)) {}

bool Session::terminated() const {
  if (world_.t() >= config_.max_duration - 0.5 * world_.dt) return true;
  return scenario::check_termination(progress_, config_.scenario);
}

void Session::account(const Event& e) {
  switch (e.kind) {
    case EventKind::Spawned:
      progress_.vehicles_generated = world_.traffic.generated;
      break;
    case EventKind::PedestrianEnteredRoad: {
      const auto& p = e.as<EnteredRoadPayload>();
      std::optional<vehicle::GapClass> gap;
      bool valid = true;
      if (p.vehicle) {
        gap = p.vehicle->gap_class;
        valid = !p.vehicle->queued;
      }
      attempt_ = std::make_pair(valid, gap);
      break;
    }
    case EventKind::Collision:
      if (attempt_) attempt_->first = false;
      break;
    case EventKind::PedestrianReachedOpposite:
      if (attempt_ && attempt_->first) {
        ++progress_.valid_crossings_total;
        if (attempt_->second) ++progress_.valid_crossings_by_class[vehicle::gap_index(*attempt_->second)];
      }
      attempt_.reset();
      break;
    case EventKind::PedestrianAborted:
      attempt_.reset();
      break;
    default:
      break;
  }
}

std::vector<Event> Session::advance(const PedestrianCommand& command) {
  std::vector<Event> events = scenario::spawn_and_queue(world_);
  auto stepped = step(world_, command);
  events.insert(events.end(), stepped.begin(), stepped.end());
  trace_.push_back(command);
  for (const Event& e : events) {
    account(e);
    log_.push_back(e);
  }
  return events;
}

SessionResult run_session(const SessionConfig& config) {
  Session session(config);
  pedestrian::Policy policy(config.policy, config.pedestrian);
  while (!session.terminated()) {
    const auto obs = observe(session.world());
    session.advance(policy.decide(obs, config.timestep));
  }
  SessionResult result;
  result.log = session.log();
  result.trace = session.trace();
  result.progress = session.progress();
  result.duration = session.world().t();
  result.pattern = session.world().traffic.pattern;
  return result;
}

EventLog run(const SessionConfig& config, const pedestrian::PolicySpec& policy, ehmi::InterfaceKind interface) {
  SessionConfig c = config;
  c.policy = policy;
  c.interface = interface;
  return run_session(c).log;
}

EventLog replay(const SessionConfig& config, const CommandTrace& trace) {
  Session session(config);
  for (std::size_t i = 0; i < trace.size(); ++i) {
    if (session.terminated()) {
      throw TraceMismatch("trace has " + std::to_string(trace.size()) + " commands but the session ended after " +
                          std::to_string(i));
    }
    session.advance(trace[i]);
  }
  return session.log();
}

WorldState make_tutorial_world(scenario::TutorialCondition condition, const SessionConfig& config) {
  WorldState w = make_world(config);
  w.traffic.enabled = false;
  VehicleState veh;
  veh.id = w.traffic.next_vehicle_id++;
  veh.x = w.pedestrian.x - scenario::tutorial_distance(condition);
  veh.v = w.vehicle_params.cruise_speed;
  veh.yielding = true;
  veh.pid = vehicle::PidController(w.vehicle_params.pid);
  w.vehicles.push_back(veh);
  w.pedestrian.gaze = true;
  return w;
}

EventLog run_tutorial(scenario::TutorialCondition condition, const SessionConfig& config) {
  WorldState w = make_tutorial_world(condition, config);
  EventLog log = refresh_displays(w, w.t());
  pedestrian::PolicySpec spec;
  spec.kind = pedestrian::PolicyKind::WaitFullStop;
  pedestrian::Policy policy(spec, w.ped_params);
  const double limit = 120.0;
  while (w.t() < limit) {
    if (w.vehicles.empty() && w.pedestrian.zone != Zone::Road) break;
    const auto events = step(w, policy.decide(observe(w), w.dt));
    log.insert(log.end(), events.begin(), events.end());
  }
  return log;
}

nlohmann::ordered_json to_json(const PedestrianCommand& cmd) {
  nlohmann::ordered_json j;
  j["kind"] = pedestrian::to_string(cmd.kind);
  j["gaze"] = cmd.gaze;
  if (cmd.kind == CommandKind::Move) j["dy"] = std::isfinite(cmd.dy) ? nlohmann::ordered_json(cmd.dy) : nullptr;
  return j;
}

PedestrianCommand command_from_json(const nlohmann::json& j) {
  PedestrianCommand cmd;
  try {
    cmd.kind = pedestrian::command_kind_from_string(j.at("kind").get<std::string>());
    cmd.gaze = j.value("gaze", false);
    if (j.contains("dy") && !j.at("dy").is_null()) cmd.dy = j.at("dy").get<double>();
  } catch (const nlohmann::json::exception& ex) {
    throw MalformedLog(std::string("bad command: ") + ex.what());
  }
  return cmd;
}

void write_trace(std::ostream& out, const CommandTrace& trace) {
  std::size_t i = 0;
  while (i < trace.size()) {
    std::size_t j = i + 1;
    while (j < trace.size() && trace[j] == trace[i]) ++j;
    nlohmann::ordered_json line;
    line["n"] = j - i;
    line["cmd"] = to_json(trace[i]);
    out << line.dump() << '\n';
    i = j;
  }
}

CommandTrace read_trace(std::istream& in) {
  CommandTrace trace;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      const auto n = j.at("n").get<std::size_t>();
      const PedestrianCommand cmd = command_from_json(j.at("cmd"));
      trace.insert(trace.end(), n, cmd);
    } catch (const std::exception& ex) {
      throw MalformedLog("trace line " + std::to_string(number) + ": " + ex.what());
    }
  }
  return trace;
}

}  // namespace xwalk::core
