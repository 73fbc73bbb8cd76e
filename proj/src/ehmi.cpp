#include "xwalk/ehmi.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "xwalk/errors.hpp"

namespace xwalk::ehmi {

using vehicle::Mode;

char letter(InterfaceKind kind) {
  switch (kind) {
    case InterfaceKind::Baseline:
      return 'B';
    case InterfaceKind::Smile:
      return 'S';
    case InterfaceKind::Projection:
      return 'P';
    case InterfaceKind::SmartRoad:
      return 'M';
    case InterfaceKind::SafeRoads:
      return 'F';
    case InterfaceKind::SafeRoadsExt:
      return 'E';
  }
  return 'B';
}

std::string_view name(InterfaceKind kind) {
  switch (kind) {
    case InterfaceKind::Baseline:
      return "Baseline";
    case InterfaceKind::Smile:
      return "Smile";
    case InterfaceKind::Projection:
      return "Projection";
    case InterfaceKind::SmartRoad:
      return "SmartRoad";
    case InterfaceKind::SafeRoads:
      return "SafeRoads";
    case InterfaceKind::SafeRoadsExt:
      return "SafeRoadsExt";
  }
  return "Baseline";
}

InterfaceKind interface_from_string(std::string_view text) {
  std::string lowered(text);
  std::transform(lowered.begin(), lowered.end(), lowered.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  for (const InterfaceKind kind : kAllInterfaces) {
    std::string full(name(kind));
    std::transform(full.begin(), full.end(), full.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    const char code = static_cast<char>(std::tolower(static_cast<unsigned char>(letter(kind))));
    if (lowered == full || (lowered.size() == 1 && lowered[0] == code)) return kind;
  }
  throw ConfigError("unknown interface '" + std::string(text) + "' (expected one of B,S,P,M,F,E)");
}

NegotiationContext context_of(const vehicle::VehicleState& vehicle, double now) {
  NegotiationContext ctx;
  ctx.x = vehicle.x;
  ctx.v = vehicle.v;
  ctx.a = vehicle.a;
  ctx.mode = vehicle.mode;
  ctx.detected = vehicle.detected_pedestrian;
  ctx.able_to_stop = vehicle.plan.has_value() && vehicle.plan->brakes();
  if (ctx.able_to_stop) ctx.predicted_stop_x = vehicle.plan->stop_x;
  ctx.d_to_line = -vehicle.x;
  ctx.time_in_mode = now - vehicle.mode_since;
  ctx.time_since_detect = vehicle.detected_pedestrian ? now - vehicle.detect_time : 0.0;
  ctx.brake_start_v = vehicle.brake_start_v;
  return ctx;
}

DisplayState update_baseline(const NegotiationContext&) { return Baseline{}; }

DisplayState update_smile(const NegotiationContext& ctx, const EhmiParams& params) {
  Smile smile;
  if (ctx.detected && (ctx.mode == Mode::Braking || ctx.mode == Mode::Stopped)) {
    smile.shape = Smile::Shape::Smile;
    smile.anim_phase = params.smile_anim_duration > 0.0
                           ? std::clamp(ctx.time_since_detect / params.smile_anim_duration, 0.0, 1.0)
                           : 1.0;
  }
  return smile;
}

DisplayState update_projection(const NegotiationContext& ctx, const EhmiParams& params) {
  Projection p;
  switch (ctx.mode) {
    case Mode::Restarting:
      if (ctx.time_in_mode < params.transition_back_duration) {
        p.road = Projection::Road::RedRestart;
        p.panel = Projection::Panel::TransitionBack;
        p.phase = std::clamp(ctx.time_in_mode / params.transition_back_duration, 0.0, 1.0);
      }
      break;
    case Mode::Stopped:
      p.road = Projection::Road::GreenCrosswalk;
      p.panel = Projection::Panel::Directional;
      break;
    case Mode::Braking:
      if (ctx.detected) {
        p.road = Projection::Road::YellowWave;
        p.panel = Projection::Panel::EdgesToCenter;
        p.phase = ctx.brake_start_v > 0.0 ? std::clamp(1.0 - ctx.v / ctx.brake_start_v, 0.0, 1.0) : 1.0;
      }
      break;
    case Mode::Cruise:
      break;
  }
  return p;
}

DisplayState update_smart_road(const std::optional<NegotiationContext>& ctx, bool any_vehicle_in_visibility) {
  SmartRoad road;
  if (!any_vehicle_in_visibility || !ctx) return road;
  if (ctx->detected && ctx->able_to_stop && ctx->predicted_stop_x) {
    road.state = SmartRoad::State::SafeApproach;
    road.crosswalk_x = ctx->predicted_stop_x;
  } else {
    road.state = SmartRoad::State::UnsafeApproach;
  }
  return road;
}

namespace {

// Reference deceleration behind the arrow length: the comfortable one while
// cruising or accelerating, the sampled braking curve while decelerating.
double arrow_curve(const NegotiationContext& ctx, const EhmiParams& params) {
  if (ctx.a < 0.0) return vehicle::select_brake_curve(std::min(-ctx.a, constants::kMaxDecel));
  return params.comfort_decel;
}

}  // namespace

DisplayState update_safe_roads(const NegotiationContext& ctx, const EhmiParams& params) {
  SafeRoads f;
  f.curve_decel = arrow_curve(ctx, params);
  f.arrow_len = vehicle::stopping_distance(ctx.v, f.curve_decel);
  f.red_region_end = f.arrow_len;
  f.green_beyond = true;
  return f;
}

DisplayState update_safe_roads_ext(const NegotiationContext& ctx, const EhmiParams& params) {
  SafeRoadsExt e;
  e.curve_decel = arrow_curve(ctx, params);
  e.arrow_len = vehicle::stopping_distance(ctx.v, e.curve_decel);
  e.min_tick = vehicle::stopping_distance(ctx.v, constants::kMaxDecel);
  if (ctx.detected && ctx.able_to_stop && ctx.predicted_stop_x) e.blue_head_x = ctx.predicted_stop_x;
  return e;
}

DisplayState vehicle_display(InterfaceKind kind, const NegotiationContext& ctx, const EhmiParams& params) {
  switch (kind) {
    case InterfaceKind::Baseline:
    case InterfaceKind::SmartRoad:
      return update_baseline(ctx);
    case InterfaceKind::Smile:
      return update_smile(ctx, params);
    case InterfaceKind::Projection:
      return update_projection(ctx, params);
    case InterfaceKind::SafeRoads:
      return update_safe_roads(ctx, params);
    case InterfaceKind::SafeRoadsExt:
      return update_safe_roads_ext(ctx, params);
  }
  return Baseline{};
}

namespace {

std::string_view shape_name(Smile::Shape s) { return s == Smile::Shape::Line ? "Line" : "Smile"; }

std::string_view road_name(Projection::Road r) {
  switch (r) {
    case Projection::Road::RedWave:
      return "RedWave";
    case Projection::Road::YellowWave:
      return "YellowWave";
    case Projection::Road::GreenCrosswalk:
      return "GreenCrosswalk";
    case Projection::Road::RedRestart:
      return "RedRestart";
  }
  return "RedWave";
}

std::string_view panel_name(Projection::Panel p) {
  switch (p) {
    case Projection::Panel::AllOn:
      return "AllOn";
    case Projection::Panel::EdgesToCenter:
      return "EdgesToCenter";
    case Projection::Panel::Directional:
      return "Directional";
    case Projection::Panel::TransitionBack:
      return "TransitionBack";
  }
  return "AllOn";
}

std::string_view smart_name(SmartRoad::State s) {
  switch (s) {
    case SmartRoad::State::Inactive:
      return "Inactive";
    case SmartRoad::State::SafeApproach:
      return "SafeApproach";
    case SmartRoad::State::UnsafeApproach:
      return "UnsafeApproach";
  }
  return "Inactive";
}

template <typename Enum, std::size_t N>
Enum parse_enum(std::string_view text, const Enum (&values)[N], std::string_view (*to_name)(Enum)) {
  for (const Enum value : values) {
    if (to_name(value) == text) return value;
  }
  throw MalformedLog("unknown display enum value '" + std::string(text) + "'");
}

constexpr Smile::Shape kShapes[] = {Smile::Shape::Line, Smile::Shape::Smile};
constexpr Projection::Road kRoads[] = {Projection::Road::RedWave, Projection::Road::YellowWave,
                                       Projection::Road::GreenCrosswalk, Projection::Road::RedRestart};
constexpr Projection::Panel kPanels[] = {Projection::Panel::AllOn, Projection::Panel::EdgesToCenter,
                                         Projection::Panel::Directional, Projection::Panel::TransitionBack};
constexpr SmartRoad::State kSmartStates[] = {SmartRoad::State::Inactive, SmartRoad::State::SafeApproach,
                                             SmartRoad::State::UnsafeApproach};

bool close(double a, double b, double tol) { return std::abs(a - b) <= tol; }

bool close(const std::optional<double>& a, const std::optional<double>& b, double tol) {
  if (a.has_value() != b.has_value()) return false;
  return !a || close(*a, *b, tol);
}

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

}  // namespace

std::string discrete_label(const DisplayState& display) {
  return std::visit(
      Overloaded{
          [](const Baseline&) { return std::string("Baseline"); },
          [](const Smile& s) { return "Smile:" + std::string(shape_name(s.shape)); },
          [](const Projection& p) {
            return "Projection:" + std::string(road_name(p.road)) + "/" + std::string(panel_name(p.panel));
          },
          [](const SmartRoad& m) { return "SmartRoad:" + std::string(smart_name(m.state)); },
          [](const SafeRoads& f) { return f.curve_decel > constants::kComfortDecel ? std::string("SafeRoads:max")
                                                                                   : std::string("SafeRoads:comfort"); },
          [](const SafeRoadsExt& e) {
            std::string label = e.curve_decel > constants::kComfortDecel ? "SafeRoadsExt:max" : "SafeRoadsExt:comfort";
            return label + (e.blue_head_x ? "+blue" : "");
          },
      },
      display);
}

bool approximately_equal(const DisplayState& a, const DisplayState& b, double tolerance) {
  if (a.index() != b.index()) return false;
  return std::visit(
      Overloaded{
          [&](const Baseline&) { return true; },
          [&](const Smile& s) {
            const auto& o = std::get<Smile>(b);
            return s.shape == o.shape && close(s.anim_phase, o.anim_phase, tolerance);
          },
          [&](const Projection& p) {
            const auto& o = std::get<Projection>(b);
            return p.road == o.road && p.panel == o.panel && close(p.phase, o.phase, tolerance);
          },
          [&](const SmartRoad& m) {
            const auto& o = std::get<SmartRoad>(b);
            return m.state == o.state && close(m.crosswalk_x, o.crosswalk_x, tolerance);
          },
          [&](const SafeRoads& f) {
            const auto& o = std::get<SafeRoads>(b);
            return f.curve_decel == o.curve_decel && f.green_beyond == o.green_beyond &&
                   close(f.arrow_len, o.arrow_len, tolerance) && close(f.red_region_end, o.red_region_end, tolerance);
          },
          [&](const SafeRoadsExt& e) {
            const auto& o = std::get<SafeRoadsExt>(b);
            return e.curve_decel == o.curve_decel && close(e.arrow_len, o.arrow_len, tolerance) &&
                   close(e.min_tick, o.min_tick, tolerance) && close(e.blue_head_x, o.blue_head_x, tolerance);
          },
      },
      a);
}

namespace {

nlohmann::ordered_json optional_number(const std::optional<double>& value) {
  return value ? nlohmann::ordered_json(*value) : nlohmann::ordered_json(nullptr);
}

std::optional<double> read_optional(const nlohmann::ordered_json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<double>();
}

}  // namespace

nlohmann::ordered_json to_json(const DisplayState& display) {
  using nlohmann::ordered_json;
  return std::visit(
      Overloaded{
          [](const Baseline&) { return ordered_json{{"kind", "Baseline"}}; },
          [](const Smile& s) {
            return ordered_json{{"kind", "Smile"}, {"shape", shape_name(s.shape)}, {"anim_phase", s.anim_phase}};
          },
          [](const Projection& p) {
            return ordered_json{{"kind", "Projection"},
                                {"road", road_name(p.road)},
                                {"panel", panel_name(p.panel)},
                                {"phase", p.phase}};
          },
          [](const SmartRoad& m) {
            return ordered_json{
                {"kind", "SmartRoad"}, {"state", smart_name(m.state)}, {"crosswalk_x", optional_number(m.crosswalk_x)}};
          },
          [](const SafeRoads& f) {
            return ordered_json{{"kind", "SafeRoads"},
                                {"arrow_len", f.arrow_len},
                                {"curve_decel", f.curve_decel},
                                {"red_region_end", f.red_region_end},
                                {"green_beyond", f.green_beyond}};
          },
          [](const SafeRoadsExt& e) {
            ordered_json blue = nullptr;
            if (e.blue_head_x) blue = ordered_json{{"head_x", *e.blue_head_x}};
            return ordered_json{{"kind", "SafeRoadsExt"},
                                {"arrow_len", e.arrow_len},
                                {"curve_decel", e.curve_decel},
                                {"min_tick", e.min_tick},
                                {"blue", blue}};
          },
      },
      display);
}

DisplayState display_from_json(const nlohmann::ordered_json& j) {
  try {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "Baseline") return Baseline{};
    if (kind == "Smile") {
      return Smile{parse_enum(j.at("shape").get<std::string>(), kShapes, shape_name), j.at("anim_phase").get<double>()};
    }
    if (kind == "Projection") {
      return Projection{parse_enum(j.at("road").get<std::string>(), kRoads, road_name),
                        parse_enum(j.at("panel").get<std::string>(), kPanels, panel_name), j.at("phase").get<double>()};
    }
    if (kind == "SmartRoad") {
      return SmartRoad{parse_enum(j.at("state").get<std::string>(), kSmartStates, smart_name),
                       read_optional(j, "crosswalk_x")};
    }
    if (kind == "SafeRoads") {
      return SafeRoads{j.at("arrow_len").get<double>(), j.at("curve_decel").get<double>(),
                       j.at("red_region_end").get<double>(), j.at("green_beyond").get<bool>()};
    }
    if (kind == "SafeRoadsExt") {
      std::optional<double> head;
      if (!j.at("blue").is_null()) head = j.at("blue").at("head_x").get<double>();
      return SafeRoadsExt{j.at("arrow_len").get<double>(), j.at("curve_decel").get<double>(),
                          j.at("min_tick").get<double>(), head};
    }
    throw MalformedLog("unknown display kind '" + kind + "'");
  } catch (const nlohmann::json::exception& e) {
    throw MalformedLog(std::string("bad display payload: ") + e.what());
  }
}

}  // namespace xwalk::ehmi
