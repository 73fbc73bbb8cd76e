#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <vector>

#include "xwalk/config.hpp"
#include "xwalk/ehmi.hpp"
#include "xwalk/event.hpp"
#include "xwalk/pedestrian.hpp"
#include "xwalk/policy.hpp"
#include "xwalk/scenario.hpp"
#include "xwalk/vehicle.hpp"

namespace xwalk::core {

struct RoadGeometry {
  double width = constants::kRoadWidth;
  double visibility_range = constants::kVisibilityRange;
};

struct TrafficState {
  std::vector<scenario::PatternEntry> pattern;
  std::size_t next_entry = 0;
  int generated = 0;
  int next_vehicle_id = 0;
  // Pattern spawning off: the world holds only the vehicles placed by hand.
  bool enabled = true;
};

struct WorldState {
  std::int64_t step_index = 0;
  double dt = constants::kTimestep;
  // Front-most vehicle first.
  std::vector<vehicle::VehicleState> vehicles;
  pedestrian::PedestrianState pedestrian = pedestrian::initial_state();
  RoadGeometry road{};
  std::mt19937_64 rng{};
  std::uint64_t event_count = 0;

  ehmi::InterfaceKind interface = ehmi::InterfaceKind::Baseline;
  vehicle::VehicleParams vehicle_params{};
  pedestrian::PedestrianParams ped_params{};
  scenario::ScenarioParams scenario{};
  ehmi::EhmiParams ehmi_params{};
  double display_tolerance = 1e-3;

  TrafficState traffic{};

  // Displays as currently shown, and as last written to the log.
  std::map<int, ehmi::DisplayState> displays;
  std::map<int, ehmi::DisplayState> logged_displays;
  std::optional<ehmi::DisplayState> road_display;
  std::optional<ehmi::DisplayState> logged_road_display;

  // Negotiation bookkeeping for releasing stopped vehicles.
  double last_attempt_end = -1.0;
  std::optional<double> intent_lost_since;
  std::set<int> overlapping;

  double t() const { return static_cast<double>(step_index) * dt; }
};

/// Empty road, pedestrian at the edge of sidewalk A, RNG seeded and the
/// vehicle pattern drawn from it.
WorldState make_world(const SessionConfig& config);

Event make_event(WorldState& world, double t, EventKind kind, Payload payload);

/// Nearest vehicle whose front bumper is still upstream of the pedestrian.
std::optional<std::size_t> negotiation_leader(const WorldState& world);
/// The negotiation leader, if it is within visibility range.
std::optional<std::size_t> nearest_visible(const WorldState& world);

pedestrian::Observation observe(const WorldState& world);

/// Advances the world by one timestep and returns the events of that step.
std::vector<Event> step(WorldState& world, const pedestrian::PedestrianCommand& command);

/// Recomputes every display and returns DisplayChanged events for those that changed.
std::vector<Event> refresh_displays(WorldState& world, double t);

using CommandTrace = std::vector<pedestrian::PedestrianCommand>;

struct SessionResult {
  EventLog log;
  CommandTrace trace;
  scenario::SessionProgress progress;
  double duration = 0.0;
  std::vector<scenario::PatternEntry> pattern;
};

/// Runs until check_termination holds (or max_duration elapses).
SessionResult run_session(const SessionConfig& config);
EventLog run(const SessionConfig& config, const pedestrian::PolicySpec& policy, ehmi::InterfaceKind interface);

/// Steps exactly trace.size() times. Throws TraceMismatch if the session
/// terminates while commands remain.
EventLog replay(const SessionConfig& config, const CommandTrace& trace);

/// Drives one step of a live session: spawn, step, termination bookkeeping.
class Session {
 public:
  explicit Session(const SessionConfig& config);

  /// Returns the events of this step (spawns first).
  std::vector<Event> advance(const pedestrian::PedestrianCommand& command);
  bool terminated() const;

  const WorldState& world() const { return world_; }
  const scenario::SessionProgress& progress() const { return progress_; }
  const EventLog& log() const { return log_; }
  const CommandTrace& trace() const { return trace_; }
  const SessionConfig& config() const { return config_; }

 private:
  SessionConfig config_;
  WorldState world_;
  scenario::SessionProgress progress_{};
  // Valid crossings are counted from the log as it grows.
  std::map<int, vehicle::GapClass> gap_of_;
  std::optional<std::pair<bool, std::optional<vehicle::GapClass>>> attempt_;
  EventLog log_;
  CommandTrace trace_;
  void account(const Event& event);
};

/// Single vehicle placed at the condition's distance, pedestrian waiting at the
/// edge with gaze on under the WaitFullStop policy.
WorldState make_tutorial_world(scenario::TutorialCondition condition, const SessionConfig& config);
/// Runs the tutorial until the vehicle leaves and the pedestrian is off the road.
EventLog run_tutorial(scenario::TutorialCondition condition, const SessionConfig& config);

/// Run-length encoded JSON Lines: {"n": count, "cmd": {...}}.
void write_trace(std::ostream& out, const CommandTrace& trace);
CommandTrace read_trace(std::istream& in);
nlohmann::ordered_json to_json(const pedestrian::PedestrianCommand& cmd);
pedestrian::PedestrianCommand command_from_json(const nlohmann::json& j);

}  // namespace xwalk::core
