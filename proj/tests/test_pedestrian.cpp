#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "xwalk/errors.hpp"
#include "xwalk/policy.hpp"

using namespace xwalk;
using namespace xwalk::pedestrian;

namespace {

constexpr double kDt = 0.01;

Observation watching(double d, double v, ehmi::DisplayState display = ehmi::Baseline{}) {
  Observation obs;
  obs.nearest = VehicleObservation{1, d, v, 0.0};
  obs.display = display;
  return obs;
}

PedestrianCommand command(CommandKind kind, bool gaze = true, double dy = 0.0) {
  return PedestrianCommand{kind, gaze, dy};
}

}  // namespace

TEST_CASE("wait keeps position") {
  PedestrianState s = initial_state();
  s.y = -0.2;
  const auto next = apply_command(s, command(CommandKind::Wait), {}, kDt);
  CHECK(next.y == s.y);
  CHECK(next.zone == Zone::SidewalkA);
  CHECK(next.speed == 0.0);
  CHECK(next.gaze);
}

TEST_CASE("crossing takes road width over walk speed") {
  PedestrianState s = initial_state();
  const int steps = static_cast<int>(std::ceil(5.0 / 1.4 / kDt - 1e-9));
  Transition last = Transition::None;
  int entered_at = -1, reached_at = -1;
  for (int i = 0; i < steps + 5; ++i) {
    const auto next = apply_command(s, command(i == 0 ? CommandKind::StartCrossing : CommandKind::ContinueCrossing), {}, kDt);
    last = classify_transition(s, next);
    if (last == Transition::EnteredRoad) entered_at = i;
    CHECK(next.speed <= 1.4 + 1e-9);
    s = next;
    if (last == Transition::ReachedOpposite) {
      reached_at = i;
      break;
    }
  }
  CHECK(entered_at == 0);
  CHECK(reached_at == steps - 1);
  CHECK(s.y == doctest::Approx(5.0));
  CHECK(s.zone == Zone::SidewalkB);
  CHECK_FALSE(s.attempt_origin.has_value());
}

TEST_CASE("abort returns to the origin sidewalk") {
  PedestrianState s = initial_state();
  while (s.y < 2.0) s = apply_command(s, command(CommandKind::ContinueCrossing), {}, kDt);
  CHECK(s.zone == Zone::Road);
  CHECK(s.attempt_origin == Zone::SidewalkA);
  Transition t = Transition::None;
  for (int i = 0; i < 1000 && t == Transition::None; ++i) {
    const auto next = apply_command(s, command(CommandKind::Abort), {}, kDt);
    t = classify_transition(s, next);
    s = next;
  }
  CHECK(t == Transition::Aborted);
  CHECK(s.y == doctest::Approx(0.0));
  CHECK(s.zone == Zone::SidewalkA);
}

TEST_CASE("crossing back from sidewalk B") {
  PedestrianState s;
  s.y = 5.0;
  s.zone = Zone::SidewalkB;
  const auto next = apply_command(s, command(CommandKind::StartCrossing), {}, kDt);
  CHECK(next.y == doctest::Approx(5.0 - 1.4 * kDt));
  CHECK(next.attempt_origin == Zone::SidewalkB);
  CHECK(classify_transition(s, next) == Transition::EnteredRoad);
}

TEST_CASE("move commands are clamped") {
  PedestrianState s = initial_state();
  auto next = apply_command(s, command(CommandKind::Move, false, 3.0), {}, kDt);
  CHECK(next.y == doctest::Approx(1.4 * kDt));
  next = apply_command(s, command(CommandKind::Move, false, std::numeric_limits<double>::quiet_NaN()), {}, kDt);
  CHECK(next.y == 0.0);
  PedestrianState edge;
  edge.y = 6.999;
  edge.zone = Zone::SidewalkB;
  next = apply_command(edge, command(CommandKind::Move, false, 1.0), {}, kDt);
  CHECK(next.y == 7.0);
  CHECK(next.zone == Zone::SidewalkB);
}

TEST_CASE("zones and edge distance") {
  CHECK(zone_of(-0.1, 5) == Zone::SidewalkA);
  CHECK(zone_of(0.0, 5) == Zone::SidewalkA);
  CHECK(zone_of(2.5, 5) == Zone::Road);
  CHECK(zone_of(5.0, 5) == Zone::SidewalkB);
  PedestrianState s;
  s.y = -0.3;
  CHECK(edge_distance(s, 5) == doctest::Approx(0.3));
  s.y = 4.2;
  CHECK(edge_distance(s, 5) == doctest::Approx(0.8));
  for (auto z : {Zone::SidewalkA, Zone::Road, Zone::SidewalkB}) CHECK(zone_from_string(to_string(z)) == z);
}

TEST_CASE("time to arrival") {
  CHECK(time_to_arrival({1, 100, 14, 0}) == doctest::Approx(100.0 / 14.0));
  CHECK(std::isinf(time_to_arrival({1, 100, 0, 0})));
  // Accelerating from 2 m/s at 3 m/s^2: reaches 14 after 4 s and 32 m.
  CHECK(time_to_arrival({1, 20, 2, 3}) == doctest::Approx((-2.0 + std::sqrt(4.0 + 120.0)) / 3.0));
  CHECK(time_to_arrival({1, 60, 2, 3}) == doctest::Approx(4.0 + 28.0 / 14.0));
}

TEST_CASE("wait-full-stop policy") {
  Policy policy({PolicyKind::WaitFullStop});
  auto cmd = policy.decide(watching(10, 0.1), kDt);
  CHECK(cmd.kind == CommandKind::Wait);
  CHECK(cmd.gaze);
  cmd = policy.decide(watching(10, 0.0), kDt);
  CHECK(cmd.kind == CommandKind::StartCrossing);
}

TEST_CASE("gap acceptance policy") {
  PolicySpec spec;
  spec.kind = PolicyKind::GapAcceptance;
  spec.tta_threshold = 4.0;
  Policy policy(spec);
  CHECK(policy.decide(watching(100, 14), kDt).kind == CommandKind::StartCrossing);
  CHECK(policy.decide(watching(50, 14), kDt).kind == CommandKind::Wait);
  Observation empty;
  CHECK(policy.decide(empty, kDt).kind == CommandKind::StartCrossing);
}

TEST_CASE("gap acceptance aborts in the first half only") {
  PolicySpec spec;
  spec.kind = PolicyKind::GapAcceptance;
  spec.abort_tta = 2.0;
  Policy policy(spec);
  Observation obs = watching(20, 14);
  obs.self.zone = Zone::Road;
  obs.self.attempt_origin = Zone::SidewalkA;
  obs.self.y = 1.0;
  CHECK(policy.decide(obs, kDt).kind == CommandKind::Abort);
  obs.self.y = 3.0;
  CHECK(policy.decide(obs, kDt).kind == CommandKind::ContinueCrossing);
}

TEST_CASE("interface reactive triggers") {
  PolicySpec spec;
  spec.kind = PolicyKind::InterfaceReactive;
  const auto fires = [&](const Observation& obs) { return interface_trigger(spec, obs); };
  CHECK(fires(watching(40, 10, ehmi::Smile{ehmi::Smile::Shape::Smile, 0.3})));
  CHECK_FALSE(fires(watching(40, 10, ehmi::Smile{})));
  CHECK(fires(watching(40, 0, ehmi::Projection{ehmi::Projection::Road::GreenCrosswalk, ehmi::Projection::Panel::Directional, 0})));
  CHECK_FALSE(fires(watching(40, 10, ehmi::Projection{ehmi::Projection::Road::YellowWave, ehmi::Projection::Panel::EdgesToCenter, 0.2})));
  CHECK(fires(watching(40, 10, ehmi::SmartRoad{ehmi::SmartRoad::State::SafeApproach, -5.0})));
  CHECK_FALSE(fires(watching(40, 10, ehmi::SmartRoad{ehmi::SmartRoad::State::UnsafeApproach, std::nullopt})));
  CHECK(fires(watching(40, 10, ehmi::SafeRoads{16.0, 3.0, 16.0, true})));
  CHECK_FALSE(fires(watching(40, 14, ehmi::SafeRoads{36.0, 3.0, 36.0, true})));
  CHECK(fires(watching(40, 10, ehmi::SafeRoadsExt{16.0, 3.0, 8.0, -5.0})));
  CHECK_FALSE(fires(watching(40, 10, ehmi::SafeRoadsExt{16.0, 3.0, 8.0, std::nullopt})));
}

TEST_CASE("interface reactive waits out the reaction time") {
  PolicySpec spec;
  spec.kind = PolicyKind::InterfaceReactive;
  spec.reaction_time = 0.5;
  Policy policy(spec);
  const auto obs = watching(40, 10, ehmi::SafeRoadsExt{16.0, 3.0, 8.0, -5.0});
  int steps = 0;
  while (policy.decide(obs, kDt).kind == CommandKind::Wait) ++steps;
  CHECK(steps == 50);
}

TEST_CASE("interface reactive under baseline is gap acceptance") {
  PolicySpec spec;
  spec.kind = PolicyKind::InterfaceReactive;
  std::mt19937 rng(9);
  std::uniform_real_distribution<double> dd(1.0, 140.0), vd(0.0, 14.0);
  for (int i = 0; i < 500; ++i) {
    const auto obs = watching(dd(rng), vd(rng));
    CHECK(interface_trigger(spec, obs) == (time_to_arrival(*obs.nearest) >= spec.baseline_tta));
  }
}

TEST_CASE("external policy never moves") {
  Policy policy({PolicyKind::External});
  const auto cmd = policy.decide(watching(10, 0), kDt);
  CHECK(cmd.kind == CommandKind::Wait);
  CHECK_FALSE(cmd.gaze);
}

TEST_CASE("policy names") {
  CHECK(policy_kind_from_string("always-wait-full-stop") == PolicyKind::WaitFullStop);
  for (auto k : {PolicyKind::WaitFullStop, PolicyKind::GapAcceptance, PolicyKind::InterfaceReactive, PolicyKind::External}) {
    CHECK(policy_kind_from_string(to_string(k)) == k);
  }
  CHECK_THROWS_AS(policy_kind_from_string("sprint"), ConfigError);
  for (auto k : {CommandKind::Wait, CommandKind::StartCrossing, CommandKind::ContinueCrossing, CommandKind::Abort, CommandKind::Move}) {
    CHECK(command_kind_from_string(to_string(k)) == k);
  }
}
