#pragma once

#include <cstdint>
#include <string>

#include "json.hpp"
#include "xwalk/ehmi.hpp"
#include "xwalk/pedestrian.hpp"
#include "xwalk/policy.hpp"
#include "xwalk/scenario.hpp"
#include "xwalk/vehicle.hpp"

namespace xwalk {

struct SessionConfig {
  ehmi::InterfaceKind interface = ehmi::InterfaceKind::Baseline;
  std::uint64_t seed = 0;
  double timestep = constants::kTimestep;
  pedestrian::PolicySpec policy{};
  vehicle::VehicleParams vehicle{};
  pedestrian::PedestrianParams pedestrian{};
  scenario::ScenarioParams scenario{};
  ehmi::EhmiParams ehmi{};
  // Continuous display fields must move by more than this to log a DisplayChanged.
  double display_tolerance = 1e-3;
  // Hard stop for sessions whose termination rule can never be met.
  double max_duration = 7200.0;
  std::string output_dir = "out";
};

/// Throws ConfigError naming the first offending field.
void validate(const SessionConfig& config);

nlohmann::ordered_json to_json(const SessionConfig& config);
/// Missing keys keep their defaults; unknown keys and bad values throw ConfigError.
SessionConfig config_from_json(const nlohmann::json& j);
SessionConfig load_config(const std::string& path);
void save_config(const std::string& path, const SessionConfig& config);

}  // namespace xwalk
