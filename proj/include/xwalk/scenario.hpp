#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <random>
#include <vector>

#include "xwalk/constants.hpp"
#include "xwalk/vehicle.hpp"

namespace xwalk::core {
struct WorldState;
struct Event;
}  // namespace xwalk::core

namespace xwalk::scenario {

struct PatternEntry {
  vehicle::GapClass gap_before = vehicle::GapClass::G45;
  bool yielding = true;
  friend bool operator==(const PatternEntry&, const PatternEntry&) = default;
};

struct ScenarioParams {
  double faulty_rate = constants::kFaultyRate;
  bool allow_consecutive_faulty = true;
  int queue_cap = constants::kQueueCap;
  double visibility_range = constants::kVisibilityRange;
  double spawn_margin = constants::kSpawnMargin;
  // Vehicles whose front bumper passes this x leave the world.
  double despawn_x = 60.0;
  int min_valid_crossings = constants::kMinValidCrossings;
  int max_generated_vehicles = constants::kMaxGeneratedVehicles;

  double spawn_x() const { return -(visibility_range + spawn_margin); }
  friend bool operator==(const ScenarioParams&, const ScenarioParams&) = default;
};

/// Uniform integer in [0, n) by rejection on the raw 64-bit output.
std::uint64_t uniform_index(std::mt19937_64& rng, std::uint64_t n);
/// Uniform double in [0, 1) from the top 53 bits.
double uniform_unit(std::mt19937_64& rng);

/// Draw order: the gap classes of all n entries first (shuffled blocks of
/// {45, 60, 100}), then one faulty draw per entry in pattern order.
std::vector<PatternEntry> generate_pattern(std::mt19937_64& rng, int n, const ScenarioParams& params = {});
std::vector<PatternEntry> generate_pattern(std::uint64_t seed, int n, const ScenarioParams& params = {});

/// CSV with columns index,gap,yielding.
void write_pattern_csv(std::ostream& out, const std::vector<PatternEntry>& pattern);

struct SessionProgress {
  int vehicles_generated = 0;
  int valid_crossings_total = 0;
  std::array<int, 3> valid_crossings_by_class{};  // indexed by gap_index
  friend bool operator==(const SessionProgress&, const SessionProgress&) = default;
};

bool check_termination(const SessionProgress& progress, const ScenarioParams& params = {});

/// Vehicles upstream of the pedestrian held up behind an impeded leader.
int queue_length(const core::WorldState& world);

/// Spawns the next pattern vehicle if its gap has opened and the queue is below
/// the cap. Returns the Spawned event, if any.
std::vector<core::Event> spawn_and_queue(core::WorldState& world);

enum class TutorialCondition { TooClose, EmergencyBrake, SmoothStop };

inline constexpr TutorialCondition kAllTutorialConditions[] = {
    TutorialCondition::TooClose, TutorialCondition::EmergencyBrake, TutorialCondition::SmoothStop};

std::string_view to_string(TutorialCondition condition);
/// Distance from the single approaching vehicle to the crossing line.
double tutorial_distance(TutorialCondition condition);

}  // namespace xwalk::scenario
