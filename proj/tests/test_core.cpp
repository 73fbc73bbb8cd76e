#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "sim_helpers.hpp"
#include "xwalk/errors.hpp"
#include "xwalk/world.hpp"

using namespace xwalk;
using namespace xwalk::core;
using pedestrian::CommandKind;
using pedestrian::PedestrianCommand;
using pedestrian::PolicyKind;

namespace {

WorldState quiet_world(ehmi::InterfaceKind kind = ehmi::InterfaceKind::Baseline) {
  SessionConfig config;
  config.interface = kind;
  WorldState w = make_world(config);
  w.traffic.enabled = false;
  return w;
}

vehicle::VehicleState car(int id, double x, bool yielding = true) {
  vehicle::VehicleState v;
  v.id = id;
  v.x = x;
  v.v = 14.0;
  v.yielding = yielding;
  return v;
}

std::size_t count(const EventLog& log, EventKind kind) {
  return static_cast<std::size_t>(std::count_if(log.begin(), log.end(), [&](const Event& e) { return e.kind == kind; }));
}

struct Box {
  double x0, x1, y0, y1;
};

bool overlap(const Box& a, const Box& b) { return a.x0 < b.x1 && b.x0 < a.x1 && a.y0 < b.y1 && b.y0 < a.y1; }

}  // namespace

TEST_CASE("empty world steps in silence") {
  WorldState w = quiet_world();
  for (auto kind : {CommandKind::Wait, CommandKind::Wait, CommandKind::Move}) {
    const double t0 = w.t();
    const auto events = step(w, PedestrianCommand{kind, true, 0.0});
    CHECK(w.t() == doctest::Approx(t0 + 0.01));
    CHECK(events.empty());
  }
}

TEST_CASE("detection at the range boundary") {
  WorldState w = quiet_world();
  w.vehicles.push_back(car(0, -60.0));
  const auto events = step(w, PedestrianCommand{CommandKind::Wait, true, 0.0});
  std::vector<EventKind> kinds;
  for (const auto& e : events) {
    if (e.kind != EventKind::DisplayChanged) kinds.push_back(e.kind);
  }
  CHECK(kinds == std::vector<EventKind>{EventKind::DetectionStart, EventKind::BrakeStart});
  const auto& brake = std::find_if(events.begin(), events.end(), [](const Event& e) {
                        return e.kind == EventKind::BrakeStart;
                      })->as<BrakePayload>();
  CHECK(*brake.a_req == doctest::Approx(196.0 / 110.0).epsilon(1e-12));
  CHECK(brake.stop_x == doctest::Approx(-5.0));
}

TEST_CASE("collision matches a box-overlap scan of the trajectories") {
  WorldState w = quiet_world();
  w.vehicles.push_back(car(0, -22.0, false));
  const auto& vp = w.vehicle_params;
  const auto& pp = w.ped_params;
  const double lane_lo = 0.5 * (pp.road_width - vp.width), lane_hi = lane_lo + vp.width;
  std::vector<double> collision_times, overlap_onsets;
  bool was = false;
  for (int i = 0; i < 600 && !w.vehicles.empty(); ++i) {
    for (const auto& e : step(w, PedestrianCommand{CommandKind::ContinueCrossing, true, 0.0})) {
      if (e.kind == EventKind::Collision) collision_times.push_back(e.t);
    }
    if (w.vehicles.empty()) break;
    const auto& v = w.vehicles.front();
    const auto& p = w.pedestrian;
    const double h = 0.5 * pp.footprint;
    const bool now = overlap({v.x - vp.length, v.x, lane_lo, lane_hi}, {p.x - h, p.x + h, p.y - h, p.y + h});
    if (now && !was) overlap_onsets.push_back(w.t());
    was = now;
  }
  REQUIRE(overlap_onsets.size() == 1);
  CHECK(collision_times == overlap_onsets);
}

TEST_CASE("wait-full-stop crosses only in front of stopped vehicles") {
  const auto result = run_session(helpers::config_for(42, ehmi::InterfaceKind::Smile, PolicyKind::WaitFullStop));
  std::map<int, bool> stopped;
  std::size_t entries = 0;
  for (const auto& e : result.log) {
    if (e.kind == EventKind::VehicleStopped) stopped[e.as<VehicleStoppedPayload>().vehicle_id] = true;
    if (e.kind == EventKind::PedestrianEnteredRoad) {
      ++entries;
      const auto& p = e.as<EnteredRoadPayload>();
      REQUIRE(p.vehicle.has_value());
      CHECK(stopped[p.vehicle->vehicle_id]);
    }
  }
  CHECK(entries >= 15);
  CHECK(scenario::check_termination(result.progress));
}

TEST_CASE("vehicle budget ends a session without crossings") {
  SessionConfig config = helpers::config_for(3, ehmi::InterfaceKind::Baseline, PolicyKind::External);
  const auto result = run_session(config);
  CHECK(count(result.log, EventKind::Spawned) == 300);
  CHECK(count(result.log, EventKind::PedestrianEnteredRoad) == 0);
  CHECK(result.progress.vehicles_generated == 300);
  double last_spawn = 0.0;
  for (const auto& e : result.log) {
    if (e.kind == EventKind::Spawned) last_spawn = e.t;
  }
  CHECK(result.log.back().t - last_spawn <= config.timestep + 1e-9);
}

TEST_CASE("runs are deterministic") {
  for (auto policy : {PolicyKind::GapAcceptance, PolicyKind::InterfaceReactive}) {
    const auto config = helpers::config_for(8, ehmi::InterfaceKind::SafeRoads, policy);
    const auto a = run_session(config), b = run_session(config);
    CHECK(a.log == b.log);
    CHECK(serialize_log(a.log) == serialize_log(b.log));
  }
}

TEST_CASE("run rejects bad configuration") {
  SessionConfig config;
  config.timestep = 0.0;
  CHECK_THROWS_AS(run_session(config), ConfigError);
  config.timestep = -0.01;
  CHECK_THROWS_AS(run(config, {}, ehmi::InterfaceKind::Baseline), ConfigError);
  nlohmann::json j = {{"policy", {{"kind", "moonwalk"}}}};
  CHECK_THROWS_AS(config_from_json(j), ConfigError);
}

TEST_CASE("replay") {
  SUBCASE("empty trace") {
    SessionConfig config;
    config.max_duration = 0.01;
    CHECK(replay(config, {}).empty());
  }
  SUBCASE("recorded session") {
    const auto config = helpers::config_for(12, ehmi::InterfaceKind::Projection, PolicyKind::InterfaceReactive);
    const auto original = run_session(config);
    const auto again = replay(config, original.trace);
    CHECK(serialize_log(again) == serialize_log(original.log));
  }
  SUBCASE("trace longer than the session") {
    SessionConfig config;
    config.max_duration = 1.0;
    CHECK_THROWS_AS(replay(config, CommandTrace(200)), TraceMismatch);
  }
  SUBCASE("out-of-range moves replay like their clamped form") {
    SessionConfig config;
    config.max_duration = 30.0;
    CommandTrace wild, clamped;
    for (int i = 0; i < 2000; ++i) {
      const double dy = i < 400 ? -3.0 : (i < 1200 ? 9.0 : -0.5);
      wild.push_back({CommandKind::Move, true, dy});
      const double max_step = 1.4 * 0.01;
      clamped.push_back({CommandKind::Move, true, std::clamp(dy, -max_step, max_step)});
    }
    CHECK(serialize_log(replay(config, wild)) == serialize_log(replay(config, clamped)));
  }
}

TEST_CASE("world invariants after every step") {
  for (auto kind : ehmi::kAllInterfaces) {
    for (auto policy : {PolicyKind::WaitFullStop, PolicyKind::GapAcceptance, PolicyKind::InterfaceReactive}) {
      const auto config = helpers::config_for(21, kind, policy);
      int bad_order = 0, bad_time = 0, peds = 0;
      double last_t = -1.0;
      const auto log = helpers::drive(config, [&](const WorldState& w) {
        for (std::size_t i = 1; i < w.vehicles.size(); ++i) {
          if (!(w.vehicles[i - 1].x > w.vehicles[i].x)) ++bad_order;
          if (!(w.vehicles[i - 1].rear(w.vehicle_params.length) - w.vehicles[i].x > 0.0)) ++bad_order;
        }
        for (const auto& v : w.vehicles) {
          if (v.v < 0.0) ++bad_order;
        }
        const double steps = w.t() / w.dt;
        if (std::abs(steps - std::round(steps)) > 1e-6 || w.t() <= last_t) ++bad_time;
        last_t = w.t();
        ++peds;
      });
      CHECK(bad_order == 0);
      CHECK(bad_time == 0);
      CHECK(peds > 0);
      validate_order(log);
      for (std::size_t i = 1; i < log.size(); ++i) {
        CHECK(log[i].t >= log[i - 1].t);
        CHECK(log[i].seq == log[i - 1].seq + 1);
      }
    }
  }
}

TEST_CASE("each detection ends in exactly one stop or horn") {
  for (auto kind : ehmi::kAllInterfaces) {
    for (auto policy : {PolicyKind::WaitFullStop, PolicyKind::GapAcceptance, PolicyKind::InterfaceReactive}) {
      const auto log = run_session(helpers::config_for(33, kind, policy)).log;
      std::map<int, int> open;  // vehicle -> outcomes since its detection
      std::map<int, bool> yielding;
      int closed = 0;
      for (const auto& e : log) {
        switch (e.kind) {
          case EventKind::Spawned:
            yielding[e.as<SpawnedPayload>().vehicle_id] = e.as<SpawnedPayload>().yielding;
            break;
          case EventKind::DetectionStart: {
            const int id = e.as<DetectionPayload>().vehicle_id;
            CHECK(yielding[id]);
            CHECK_FALSE(open.count(id));
            open[id] = 0;
            break;
          }
          case EventKind::VehicleStopped: {
            auto it = open.find(e.as<VehicleStoppedPayload>().vehicle_id);
            if (it != open.end()) ++it->second;
            break;
          }
          case EventKind::Horn: {
            auto it = open.find(e.as<BrakePayload>().vehicle_id);
            if (it != open.end()) ++it->second;
            break;
          }
          case EventKind::VehicleRestart:
          case EventKind::Despawned: {
            auto it = open.find(e.as<VehiclePayload>().vehicle_id);
            if (it != open.end()) {
              CHECK(it->second == 1);
              open.erase(it);
              ++closed;
            }
            break;
          }
          default:
            break;
        }
      }
      CHECK(closed > 0);
    }
  }
}

TEST_CASE("event log json round trip") {
  const auto log = run_session(helpers::config_for(4, ehmi::InterfaceKind::SafeRoadsExt, PolicyKind::GapAcceptance)).log;
  const std::string text = serialize_log(log);
  const auto parsed = parse_log(text);
  CHECK(parsed == log);
  CHECK(serialize_log(parsed) == text);
  std::set<EventKind> seen;
  for (const auto& e : log) seen.insert(e.kind);
  CHECK(seen.size() >= 9);
  const auto first = nlohmann::ordered_json::parse(serialize_line(log.front()));
  std::vector<std::string> keys;
  for (const auto& [k, v] : first.items()) keys.push_back(k);
  CHECK(keys == std::vector<std::string>{"t", "kind", "seq", "payload"});
}

TEST_CASE("malformed logs name the line") {
  std::istringstream in(
      "{\"t\":0.0,\"kind\":\"Spawned\",\"seq\":0,\"payload\":{\"vehicle_id\":0,\"x\":-160.0,\"v\":14.0,"
      "\"gap_class\":\"60\",\"yielding\":true}}\nnot json\n");
  try {
    read_log(in);
    FAIL("expected MalformedLog");
  } catch (const MalformedLog& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
  Event a, b;
  a.t = 1.0;
  a.seq = 1;
  b.t = 0.5;
  b.seq = 2;
  CHECK_THROWS_AS(validate_order({a, b}), MalformedLog);
}

TEST_CASE("command trace run-length encoding") {
  CommandTrace trace(3, PedestrianCommand{CommandKind::Wait, true, 0.0});
  trace.push_back({CommandKind::Move, false, 0.0125});
  trace.push_back({CommandKind::Move, false, 0.0125});
  trace.push_back({CommandKind::Abort, true, 0.0});
  std::ostringstream out;
  write_trace(out, trace);
  CHECK(out.str() ==
        "{\"n\":3,\"cmd\":{\"kind\":\"Wait\",\"gaze\":true}}\n"
        "{\"n\":2,\"cmd\":{\"kind\":\"Move\",\"gaze\":false,\"dy\":0.0125}}\n"
        "{\"n\":1,\"cmd\":{\"kind\":\"Abort\",\"gaze\":true}}\n");
  std::istringstream in(out.str());
  CHECK(read_trace(in) == trace);
  std::istringstream bad("{\"n\":2}\n");
  CHECK_THROWS_AS(read_trace(bad), MalformedLog);
}

TEST_CASE("config round trip and errors") {
  SessionConfig config;
  config.interface = ehmi::InterfaceKind::SmartRoad;
  config.seed = 99;
  config.policy.kind = PolicyKind::GapAcceptance;
  config.policy.tta_threshold = 5.5;
  config.scenario.queue_cap = 2;
  config.vehicle.pid.kp = 0.9;
  const auto j = to_json(config);
  const auto back = config_from_json(nlohmann::json::parse(j.dump()));
  CHECK(to_json(back).dump() == j.dump());
  CHECK(back.policy == config.policy);
  CHECK(back.scenario == config.scenario);

  const auto partial = config_from_json(nlohmann::json{{"interface", "E"}, {"scenario", {{"faulty_rate", 0.3}}}});
  CHECK(partial.interface == ehmi::InterfaceKind::SafeRoadsExt);
  CHECK(partial.scenario.faulty_rate == 0.3);
  CHECK(partial.scenario.queue_cap == 3);
  CHECK(partial.vehicle.cruise_speed == 14.0);

  CHECK_THROWS_AS(config_from_json(nlohmann::json{{"colour", "red"}}), ConfigError);
  CHECK_THROWS_AS(config_from_json(nlohmann::json{{"interface", "Q"}}), ConfigError);
  CHECK_THROWS_AS(config_from_json(nlohmann::json{{"vehicle", {{"max_decel", -1.0}}}}), ConfigError);
  try {
    config_from_json(nlohmann::json{{"timestep", 0.0}});
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("timestep") != std::string::npos);
  }

  const auto path = std::filesystem::temp_directory_path() / "xwalk_config_roundtrip.json";
  save_config(path.string(), config);
  const auto loaded = load_config(path.string());
  save_config(path.string(), loaded);
  CHECK(to_json(load_config(path.string())).dump() == j.dump());
  std::filesystem::remove(path);
  CHECK_THROWS_AS(load_config("/nonexistent/xwalk.json"), ConfigError);
}

TEST_CASE("displays are logged only when they change") {
  const auto log = run_tutorial(scenario::TutorialCondition::SmoothStop, [] {
    SessionConfig c;
    c.interface = ehmi::InterfaceKind::Smile;
    return c;
  }());
  std::optional<ehmi::DisplayState> last;
  for (const auto& e : log) {
    if (e.kind != EventKind::DisplayChanged) continue;
    const auto& d = e.as<DisplayPayload>().display;
    if (last) CHECK_FALSE(ehmi::approximately_equal(*last, d, 1e-3));
    last = d;
  }
}
