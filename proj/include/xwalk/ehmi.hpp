#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <variant>

#include "json.hpp"
#include "xwalk/vehicle.hpp"

namespace xwalk::ehmi {

enum class InterfaceKind { Baseline, Smile, Projection, SmartRoad, SafeRoads, SafeRoadsExt };

inline constexpr InterfaceKind kAllInterfaces[] = {
    InterfaceKind::Baseline,  InterfaceKind::Smile,     InterfaceKind::Projection,
    InterfaceKind::SmartRoad, InterfaceKind::SafeRoads, InterfaceKind::SafeRoadsExt};

/// Single-letter code: B, S, P, M, F, E.
char letter(InterfaceKind kind);
std::string_view name(InterfaceKind kind);
/// Accepts the letter or the full name, case-insensitive. Throws ConfigError.
InterfaceKind interface_from_string(std::string_view text);

/// What one vehicle's external interface knows at a given instant.
struct NegotiationContext {
  double x = 0.0;
  double v = 0.0;
  double a = 0.0;
  vehicle::Mode mode = vehicle::Mode::Cruise;
  bool detected = false;
  bool able_to_stop = false;
  std::optional<double> predicted_stop_x;
  double d_to_line = 0.0;
  double time_in_mode = 0.0;
  double time_since_detect = 0.0;
  double brake_start_v = 0.0;
};

NegotiationContext context_of(const vehicle::VehicleState& vehicle, double now);

struct Baseline {
  friend bool operator==(const Baseline&, const Baseline&) = default;
};

struct Smile {
  enum class Shape { Line, Smile };
  Shape shape = Shape::Line;
  double anim_phase = 0.0;
  friend bool operator==(const Smile&, const Smile&) = default;
};

struct Projection {
  enum class Road { RedWave, YellowWave, GreenCrosswalk, RedRestart };
  enum class Panel { AllOn, EdgesToCenter, Directional, TransitionBack };
  Road road = Road::RedWave;
  Panel panel = Panel::AllOn;
  double phase = 0.0;  // used by EdgesToCenter and TransitionBack
  friend bool operator==(const Projection&, const Projection&) = default;
};

struct SmartRoad {
  enum class State { Inactive, SafeApproach, UnsafeApproach };
  State state = State::Inactive;
  std::optional<double> crosswalk_x;  // world frame, SafeApproach only
  friend bool operator==(const SmartRoad&, const SmartRoad&) = default;
};

struct SafeRoads {
  double arrow_len = 0.0;
  double curve_decel = constants::kComfortDecel;
  double red_region_end = 0.0;  // red from the bumper to here, green beyond
  bool green_beyond = true;
  friend bool operator==(const SafeRoads&, const SafeRoads&) = default;
};

struct SafeRoadsExt {
  double arrow_len = 0.0;
  double curve_decel = constants::kComfortDecel;
  double min_tick = 0.0;
  std::optional<double> blue_head_x;  // world frame
  friend bool operator==(const SafeRoadsExt&, const SafeRoadsExt&) = default;
};

using DisplayState = std::variant<Baseline, Smile, Projection, SmartRoad, SafeRoads, SafeRoadsExt>;

struct EhmiParams {
  double smile_anim_duration = 0.5;
  double transition_back_duration = 1.0;
  double comfort_decel = constants::kComfortDecel;
};

DisplayState update_baseline(const NegotiationContext& ctx);
DisplayState update_smile(const NegotiationContext& ctx, const EhmiParams& params = {});
DisplayState update_projection(const NegotiationContext& ctx, const EhmiParams& params = {});
/// `ctx` is the vehicle controlling the road (the nearest one approaching), if any.
DisplayState update_smart_road(const std::optional<NegotiationContext>& ctx, bool any_vehicle_in_visibility);
DisplayState update_safe_roads(const NegotiationContext& ctx, const EhmiParams& params = {});
DisplayState update_safe_roads_ext(const NegotiationContext& ctx, const EhmiParams& params = {});

/// Display carried by the vehicle itself. The smart road is roadside
/// infrastructure, so under M vehicles carry Baseline.
DisplayState vehicle_display(InterfaceKind kind, const NegotiationContext& ctx, const EhmiParams& params = {});

/// Discrete part of a display, e.g. "Smile:Smile" or "SafeRoadsExt:blue";
/// continuous payload (phases, lengths) is not part of the label.
std::string discrete_label(const DisplayState& display);

/// Same discrete label and every continuous field within `tolerance`.
bool approximately_equal(const DisplayState& a, const DisplayState& b, double tolerance);

nlohmann::ordered_json to_json(const DisplayState& display);
DisplayState display_from_json(const nlohmann::ordered_json& j);

}  // namespace xwalk::ehmi
