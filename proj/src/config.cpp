#include "xwalk/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <string_view>

#include "xwalk/errors.hpp"

namespace xwalk {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

void require_positive(double value, std::string_view field) {
  if (!(std::isfinite(value) && value > 0.0)) {
    throw ConfigError(std::string(field) + " must be a positive number");
  }
}

void require_non_negative(double value, std::string_view field) {
  if (!(std::isfinite(value) && value >= 0.0)) {
    throw ConfigError(std::string(field) + " must be a non-negative number");
  }
}

void reject_unknown(const json& j, std::string_view section, std::initializer_list<std::string_view> known) {
  if (!j.is_object()) throw ConfigError(std::string(section) + " must be an object");
  for (const auto& [key, value] : j.items()) {
    bool found = false;
    for (auto k : known) found = found || k == key;
    if (!found) throw ConfigError("unknown config key '" + std::string(section) + "." + key + "'");
  }
}

template <typename T>
void read(const json& j, const char* key, T& out, std::string_view section) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("bad value for '" + std::string(section) + "." + key + "'");
  }
}

ordered_json pid_json(const vehicle::PidGains& g) {
  return ordered_json{{"kp", g.kp},
                      {"ki", g.ki},
                      {"kd", g.kd},
                      {"min_output", g.min_output},
                      {"max_output", g.max_output},
                      {"jerk_limit", g.jerk_limit}};
}

}  // namespace

void validate(const SessionConfig& c) {
  require_positive(c.timestep, "timestep");
  require_positive(c.max_duration, "max_duration");
  require_non_negative(c.display_tolerance, "display_tolerance");

  const auto& p = c.policy;
  require_positive(p.tta_threshold, "policy.tta_threshold");
  require_non_negative(p.abort_tta, "policy.abort_tta");
  require_non_negative(p.reaction_time, "policy.reaction_time");
  require_positive(p.baseline_tta, "policy.baseline_tta");
  require_non_negative(p.arrow_margin, "policy.arrow_margin");

  const auto& v = c.vehicle;
  require_positive(v.cruise_speed, "vehicle.cruise_speed");
  require_positive(v.detection_range, "vehicle.detection_range");
  require_positive(v.stop_offset, "vehicle.stop_offset");
  require_positive(v.max_decel, "vehicle.max_decel");
  require_positive(v.comfort_decel, "vehicle.comfort_decel");
  require_positive(v.max_accel, "vehicle.max_accel");
  require_positive(v.length, "vehicle.length");
  require_positive(v.width, "vehicle.width");
  require_positive(v.stopped_headway, "vehicle.stopped_headway");
  require_non_negative(v.time_headway, "vehicle.time_headway");
  require_positive(v.follow_decel, "vehicle.follow_decel");
  require_positive(v.intent_grace, "vehicle.intent_grace");
  require_positive(v.max_wait, "vehicle.max_wait");
  if (v.comfort_decel > v.max_decel) throw ConfigError("vehicle.comfort_decel exceeds vehicle.max_decel");
  if (v.follow_decel > v.max_decel) throw ConfigError("vehicle.follow_decel exceeds vehicle.max_decel");
  require_non_negative(v.pid.kp, "vehicle.pid.kp");
  require_non_negative(v.pid.ki, "vehicle.pid.ki");
  require_non_negative(v.pid.kd, "vehicle.pid.kd");
  require_positive(v.pid.jerk_limit, "vehicle.pid.jerk_limit");
  require_positive(v.pid.max_output, "vehicle.pid.max_output");
  if (!(v.pid.min_output < 0.0)) throw ConfigError("vehicle.pid.min_output must be negative");

  const auto& ped = c.pedestrian;
  require_positive(ped.walk_speed, "pedestrian.walk_speed");
  require_positive(ped.road_width, "pedestrian.road_width");
  require_positive(ped.sidewalk_depth, "pedestrian.sidewalk_depth");
  require_positive(ped.footprint, "pedestrian.footprint");
  require_positive(ped.edge_proximity, "pedestrian.edge_proximity");

  const auto& s = c.scenario;
  if (!(s.faulty_rate >= 0.0 && s.faulty_rate <= 1.0)) throw ConfigError("scenario.faulty_rate must be in [0, 1]");
  if (s.queue_cap < 1) throw ConfigError("scenario.queue_cap must be positive");
  require_positive(s.visibility_range, "scenario.visibility_range");
  require_non_negative(s.spawn_margin, "scenario.spawn_margin");
  require_positive(s.despawn_x, "scenario.despawn_x");
  if (s.min_valid_crossings < 1) throw ConfigError("scenario.min_valid_crossings must be positive");
  if (s.max_generated_vehicles < 1) throw ConfigError("scenario.max_generated_vehicles must be positive");
  if (!(s.visibility_range > v.detection_range)) {
    throw ConfigError("scenario.visibility_range must exceed vehicle.detection_range");
  }

  require_positive(c.ehmi.smile_anim_duration, "ehmi.smile_anim_duration");
  require_positive(c.ehmi.transition_back_duration, "ehmi.transition_back_duration");
  require_positive(c.ehmi.comfort_decel, "ehmi.comfort_decel");
}

ordered_json to_json(const SessionConfig& c) {
  ordered_json j;
  j["interface"] = std::string(1, ehmi::letter(c.interface));
  j["seed"] = c.seed;
  j["timestep"] = c.timestep;
  j["display_tolerance"] = c.display_tolerance;
  j["max_duration"] = c.max_duration;
  j["output_dir"] = c.output_dir;
  j["policy"] = ordered_json{{"kind", pedestrian::to_string(c.policy.kind)},
                             {"tta_threshold", c.policy.tta_threshold},
                             {"abort_tta", c.policy.abort_tta},
                             {"reaction_time", c.policy.reaction_time},
                             {"baseline_tta", c.policy.baseline_tta},
                             {"arrow_margin", c.policy.arrow_margin}};
  const auto& v = c.vehicle;
  j["vehicle"] = ordered_json{{"cruise_speed", v.cruise_speed},
                              {"detection_range", v.detection_range},
                              {"stop_offset", v.stop_offset},
                              {"max_decel", v.max_decel},
                              {"comfort_decel", v.comfort_decel},
                              {"max_accel", v.max_accel},
                              {"length", v.length},
                              {"width", v.width},
                              {"stopped_headway", v.stopped_headway},
                              {"time_headway", v.time_headway},
                              {"follow_decel", v.follow_decel},
                              {"intent_grace", v.intent_grace},
                              {"max_wait", v.max_wait},
                              {"pid", pid_json(v.pid)}};
  const auto& p = c.pedestrian;
  j["pedestrian"] = ordered_json{{"walk_speed", p.walk_speed},
                                 {"road_width", p.road_width},
                                 {"sidewalk_depth", p.sidewalk_depth},
                                 {"footprint", p.footprint},
                                 {"edge_proximity", p.edge_proximity}};
  const auto& s = c.scenario;
  j["scenario"] = ordered_json{{"faulty_rate", s.faulty_rate},
                               {"allow_consecutive_faulty", s.allow_consecutive_faulty},
                               {"queue_cap", s.queue_cap},
                               {"visibility_range", s.visibility_range},
                               {"spawn_margin", s.spawn_margin},
                               {"despawn_x", s.despawn_x},
                               {"min_valid_crossings", s.min_valid_crossings},
                               {"max_generated_vehicles", s.max_generated_vehicles}};
  j["ehmi"] = ordered_json{{"smile_anim_duration", c.ehmi.smile_anim_duration},
                           {"transition_back_duration", c.ehmi.transition_back_duration},
                           {"comfort_decel", c.ehmi.comfort_decel}};
  return j;
}

SessionConfig config_from_json(const json& j) {
  SessionConfig c;
  reject_unknown(j, "config",
                 {"interface", "seed", "timestep", "display_tolerance", "max_duration", "output_dir", "policy",
                  "vehicle", "pedestrian", "scenario", "ehmi"});
  if (j.contains("interface")) {
    if (!j.at("interface").is_string()) throw ConfigError("interface must be a string");
    c.interface = ehmi::interface_from_string(j.at("interface").get<std::string>());
  }
  read(j, "seed", c.seed, "config");
  read(j, "timestep", c.timestep, "config");
  read(j, "display_tolerance", c.display_tolerance, "config");
  read(j, "max_duration", c.max_duration, "config");
  read(j, "output_dir", c.output_dir, "config");

  if (j.contains("policy")) {
    const json& p = j.at("policy");
    reject_unknown(p, "policy", {"kind", "tta_threshold", "abort_tta", "reaction_time", "baseline_tta", "arrow_margin"});
    if (p.contains("kind")) {
      if (!p.at("kind").is_string()) throw ConfigError("policy.kind must be a string");
      c.policy.kind = pedestrian::policy_kind_from_string(p.at("kind").get<std::string>());
    }
    read(p, "tta_threshold", c.policy.tta_threshold, "policy");
    read(p, "abort_tta", c.policy.abort_tta, "policy");
    read(p, "reaction_time", c.policy.reaction_time, "policy");
    read(p, "baseline_tta", c.policy.baseline_tta, "policy");
    read(p, "arrow_margin", c.policy.arrow_margin, "policy");
  }
  if (j.contains("vehicle")) {
    const json& v = j.at("vehicle");
    reject_unknown(v, "vehicle",
                   {"cruise_speed", "detection_range", "stop_offset", "max_decel", "comfort_decel", "max_accel",
                    "length", "width", "stopped_headway", "time_headway", "follow_decel", "intent_grace",
                    "max_wait", "pid"});
    auto& o = c.vehicle;
    read(v, "cruise_speed", o.cruise_speed, "vehicle");
    read(v, "detection_range", o.detection_range, "vehicle");
    read(v, "stop_offset", o.stop_offset, "vehicle");
    read(v, "max_decel", o.max_decel, "vehicle");
    read(v, "comfort_decel", o.comfort_decel, "vehicle");
    read(v, "max_accel", o.max_accel, "vehicle");
    read(v, "length", o.length, "vehicle");
    read(v, "width", o.width, "vehicle");
    read(v, "stopped_headway", o.stopped_headway, "vehicle");
    read(v, "time_headway", o.time_headway, "vehicle");
    read(v, "follow_decel", o.follow_decel, "vehicle");
    read(v, "intent_grace", o.intent_grace, "vehicle");
    read(v, "max_wait", o.max_wait, "vehicle");
    if (v.contains("pid")) {
      const json& g = v.at("pid");
      reject_unknown(g, "vehicle.pid", {"kp", "ki", "kd", "min_output", "max_output", "jerk_limit"});
      read(g, "kp", o.pid.kp, "vehicle.pid");
      read(g, "ki", o.pid.ki, "vehicle.pid");
      read(g, "kd", o.pid.kd, "vehicle.pid");
      read(g, "min_output", o.pid.min_output, "vehicle.pid");
      read(g, "max_output", o.pid.max_output, "vehicle.pid");
      read(g, "jerk_limit", o.pid.jerk_limit, "vehicle.pid");
    }
  }
  if (j.contains("pedestrian")) {
    const json& p = j.at("pedestrian");
    reject_unknown(p, "pedestrian", {"walk_speed", "road_width", "sidewalk_depth", "footprint", "edge_proximity"});
    read(p, "walk_speed", c.pedestrian.walk_speed, "pedestrian");
    read(p, "road_width", c.pedestrian.road_width, "pedestrian");
    read(p, "sidewalk_depth", c.pedestrian.sidewalk_depth, "pedestrian");
    read(p, "footprint", c.pedestrian.footprint, "pedestrian");
    read(p, "edge_proximity", c.pedestrian.edge_proximity, "pedestrian");
  }
  if (j.contains("scenario")) {
    const json& s = j.at("scenario");
    reject_unknown(s, "scenario",
                   {"faulty_rate", "allow_consecutive_faulty", "queue_cap", "visibility_range", "spawn_margin",
                    "despawn_x", "min_valid_crossings", "max_generated_vehicles"});
    read(s, "faulty_rate", c.scenario.faulty_rate, "scenario");
    read(s, "allow_consecutive_faulty", c.scenario.allow_consecutive_faulty, "scenario");
    read(s, "queue_cap", c.scenario.queue_cap, "scenario");
    read(s, "visibility_range", c.scenario.visibility_range, "scenario");
    read(s, "spawn_margin", c.scenario.spawn_margin, "scenario");
    read(s, "despawn_x", c.scenario.despawn_x, "scenario");
    read(s, "min_valid_crossings", c.scenario.min_valid_crossings, "scenario");
    read(s, "max_generated_vehicles", c.scenario.max_generated_vehicles, "scenario");
  }
  if (j.contains("ehmi")) {
    const json& e = j.at("ehmi");
    reject_unknown(e, "ehmi", {"smile_anim_duration", "transition_back_duration", "comfort_decel"});
    read(e, "smile_anim_duration", c.ehmi.smile_anim_duration, "ehmi");
    read(e, "transition_back_duration", c.ehmi.transition_back_duration, "ehmi");
    read(e, "comfort_decel", c.ehmi.comfort_decel, "ehmi");
  }
  validate(c);
  return c;
}

SessionConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& ex) {
    throw ConfigError("config '" + path + "' is not valid JSON: " + ex.what());
  }
  return config_from_json(j);
}

void save_config(const std::string& path, const SessionConfig& config) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write config file '" + path + "'");
  out << to_json(config).dump(2) << '\n';
}

}  // namespace xwalk
