#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "xwalk/ehmi.hpp"
#include "xwalk/pedestrian.hpp"

namespace xwalk::pedestrian {

enum class PolicyKind { WaitFullStop, GapAcceptance, InterfaceReactive, External };

std::string_view to_string(PolicyKind kind);
/// Accepts "wait-full-stop" (alias "always-wait-full-stop"), "gap-acceptance",
/// "interface-reactive" and "external". Throws ConfigError otherwise.
PolicyKind policy_kind_from_string(std::string_view name);

struct PolicySpec {
  PolicyKind kind = PolicyKind::WaitFullStop;
  // GapAcceptance: cross when time-to-arrival exceeds this.
  double tta_threshold = 4.0;
  // GapAcceptance: turn back when TTA drops below this during the first half of
  // the road; 0 disables aborting.
  double abort_tta = 0.0;
  // InterfaceReactive: a trigger must hold this long before stepping off.
  double reaction_time = 0.5;
  // InterfaceReactive under Baseline falls back to gap acceptance with this TTA.
  double baseline_tta = 6.0;
  // InterfaceReactive under F: cross when the arrow ends this far short of the crossing.
  double arrow_margin = 5.0;

  friend bool operator==(const PolicySpec&, const PolicySpec&) = default;
};

/// What the pedestrian perceives of the nearest approaching visible vehicle.
struct VehicleObservation {
  int id = 0;
  double d = 0.0;  // front bumper to the crossing line
  double v = 0.0;
  double a = 0.0;
};

struct Observation {
  std::optional<VehicleObservation> nearest;
  // Display of the nearest vehicle; under M the smart-road state instead.
  ehmi::DisplayState display = ehmi::Baseline{};
  PedestrianState self{};
};

/// Stopped vehicles never arrive. An accelerating vehicle is assumed to keep
/// accelerating at `accel` up to `top_speed`; otherwise speed is held.
double time_to_arrival(const VehicleObservation& vehicle, double accel = constants::kMaxAccel,
                       double top_speed = constants::kCruiseSpeed);

/// InterfaceReactive trigger table applied to one observation (no reaction delay).
bool interface_trigger(const PolicySpec& spec, const Observation& obs);

/// Scripted pedestrian. Stateful only through the InterfaceReactive reaction timer.
class Policy {
 public:
  explicit Policy(PolicySpec spec, PedestrianParams params = {}) : spec_(spec), params_(params) {}

  /// Returns Wait (gaze on), StartCrossing, ContinueCrossing or Abort. The
  /// External kind has no script and always waits without looking.
  PedestrianCommand decide(const Observation& obs, double dt);

  const PolicySpec& spec() const { return spec_; }

 private:
  PolicySpec spec_;
  PedestrianParams params_;
  double trigger_held_ = 0.0;
};

}  // namespace xwalk::pedestrian
