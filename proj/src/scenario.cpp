#include "xwalk/scenario.hpp"

#include <algorithm>
#include <ostream>

#include "xwalk/world.hpp"

namespace xwalk::scenario {

std::uint64_t uniform_index(std::mt19937_64& rng, std::uint64_t n) {
  const std::uint64_t threshold = (0 - n) % n;
  for (;;) {
    const std::uint64_t r = rng();
    if (r >= threshold) return r % n;
  }
}

double uniform_unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

std::vector<PatternEntry> generate_pattern(std::mt19937_64& rng, int n, const ScenarioParams& params) {
  std::vector<PatternEntry> pattern;
  if (n <= 0) return pattern;
  pattern.reserve(static_cast<std::size_t>(n));
  while (static_cast<int>(pattern.size()) < n) {
    std::array<vehicle::GapClass, 3> block = {vehicle::GapClass::G45, vehicle::GapClass::G60,
                                              vehicle::GapClass::G100};
    for (std::size_t i = block.size() - 1; i > 0; --i) {
      std::swap(block[i], block[uniform_index(rng, i + 1)]);
    }
    for (auto gap : block) {
      if (static_cast<int>(pattern.size()) == n) break;
      pattern.push_back({gap, true});
    }
  }
  bool previous_faulty = false;
  for (auto& entry : pattern) {
    const bool faulty = uniform_unit(rng) < params.faulty_rate;
    entry.yielding = !(faulty && (params.allow_consecutive_faulty || !previous_faulty));
    previous_faulty = !entry.yielding;
  }
  return pattern;
}

std::vector<PatternEntry> generate_pattern(std::uint64_t seed, int n, const ScenarioParams& params) {
  std::mt19937_64 rng(seed);
  return generate_pattern(rng, n, params);
}

void write_pattern_csv(std::ostream& out, const std::vector<PatternEntry>& pattern) {
  out << "index,gap,yielding\n";
  for (std::size_t i = 0; i < pattern.size(); ++i) {
    out << i << ',' << vehicle::to_string(pattern[i].gap_before) << ',' << (pattern[i].yielding ? "true" : "false")
        << '\n';
  }
}

bool check_termination(const SessionProgress& progress, const ScenarioParams& params) {
  if (progress.vehicles_generated >= params.max_generated_vehicles) return true;
  if (progress.valid_crossings_total < params.min_valid_crossings) return false;
  return std::all_of(progress.valid_crossings_by_class.begin(), progress.valid_crossings_by_class.end(),
                     [](int count) { return count >= 1; });
}

int queue_length(const core::WorldState& world) {
  const auto leader = core::negotiation_leader(world);
  if (!leader) return 0;
  const auto& lead = world.vehicles[*leader];
  const bool impeded = lead.mode != vehicle::Mode::Cruise || lead.queued;
  if (!impeded) return 0;
  return static_cast<int>(world.vehicles.size() - *leader) - 1;
}

std::vector<core::Event> spawn_and_queue(core::WorldState& world) {
  std::vector<core::Event> events;
  auto& traffic = world.traffic;
  if (!traffic.enabled) return events;
  if (traffic.generated >= world.scenario.max_generated_vehicles) return events;
  if (traffic.next_entry >= traffic.pattern.size()) return events;
  if (queue_length(world) >= world.scenario.queue_cap) return events;

  const PatternEntry& entry = traffic.pattern[traffic.next_entry];
  const double spawn_x = world.scenario.spawn_x();
  double x = spawn_x;
  if (!world.vehicles.empty()) {
    const double candidate = world.vehicles.back().rear(world.vehicle_params.length) - vehicle::gap_meters(entry.gap_before);
    if (candidate < spawn_x) return events;
    // Never more than half a metre inside the spawn point.
    x = std::min(candidate, spawn_x + 0.5);
  }

  vehicle::VehicleState v;
  v.id = traffic.next_vehicle_id++;
  v.x = x;
  v.v = world.vehicle_params.cruise_speed;
  v.yielding = entry.yielding;
  v.gap_class = entry.gap_before;
  v.mode_since = world.t();
  v.pid = vehicle::PidController(world.vehicle_params.pid);
  world.vehicles.push_back(v);
  ++traffic.generated;
  ++traffic.next_entry;

  events.push_back(core::make_event(world, world.t(), core::EventKind::Spawned,
                                    core::SpawnedPayload{v.id, v.x, v.v, v.gap_class, v.yielding}));
  return events;
}

std::string_view to_string(TutorialCondition condition) {
  switch (condition) {
    case TutorialCondition::TooClose:
      return "too-close";
    case TutorialCondition::EmergencyBrake:
      return "emergency-brake";
    case TutorialCondition::SmoothStop:
      return "smooth-stop";
  }
  return "smooth-stop";
}

double tutorial_distance(TutorialCondition condition) {
  switch (condition) {
    case TutorialCondition::TooClose:
      return 15.0;
    case TutorialCondition::EmergencyBrake:
      return 25.0;
    case TutorialCondition::SmoothStop:
      return 60.0;
  }
  return 60.0;
}

}  // namespace xwalk::scenario
