#include <doctest.h>

#include <sstream>

#include "oracles/metrics_oracle.hpp"
#include "sim_helpers.hpp"
#include "xwalk/errors.hpp"
#include "xwalk/metrics.hpp"
#include "xwalk/world.hpp"

using namespace xwalk;
using namespace xwalk::core;
using metrics::InteractionRecord;
using metrics::Outcome;
using pedestrian::PolicyKind;
using pedestrian::Zone;

namespace {

struct LogBuilder {
  EventLog log;
  void add(double t, EventKind kind, Payload payload) { log.push_back(Event{t, kind, log.size(), std::move(payload)}); }
  void spawn(double t, int id, vehicle::GapClass g, bool yielding = true) {
    add(t, EventKind::Spawned, SpawnedPayload{id, -160.0, 14.0, g, yielding});
  }
  void detect(double t, int id) { add(t, EventKind::DetectionStart, DetectionPayload{id, -60.0, 14.0, 60.0, 0.0}); }
  void stopped(double t, int id) { add(t, EventKind::VehicleStopped, VehicleStoppedPayload{id, -5.0, false, true}); }
  void horn(double t, int id) { add(t, EventKind::Horn, BrakePayload{id, -20.0, 10.0, std::nullopt, -5.0}); }
  void enter(double t, std::optional<NegotiatingVehicle> v) {
    add(t, EventKind::PedestrianEnteredRoad, EnteredRoadPayload{Zone::SidewalkA, 0.0, v});
  }
  void opposite(double t) { add(t, EventKind::PedestrianReachedOpposite, PedestrianZonePayload{Zone::SidewalkB, 5.0}); }
  void aborted(double t) { add(t, EventKind::PedestrianAborted, PedestrianZonePayload{Zone::SidewalkA, 0.0}); }
  void collision(double t, int id) { add(t, EventKind::Collision, CollisionPayload{id, 0.0, 14.0, 2.0}); }
};

NegotiatingVehicle negotiator(int id, double d, double v, bool queued = false,
                              vehicle::GapClass g = vehicle::GapClass::G60) {
  NegotiatingVehicle n;
  n.vehicle_id = id;
  n.d = d;
  n.v = v;
  n.queued = queued;
  n.gap_class = g;
  n.detected = true;
  return n;
}

InteractionRecord valid_at(double t_enter, vehicle::GapClass g) {
  InteractionRecord r;
  r.t_detect = t_enter - 2.0;
  r.t_enter = t_enter;
  r.t_opposite = t_enter + 3.0;
  r.dt = 2.0;
  r.ct = 5.0;
  r.dac = 20.0;
  r.sac = 3.0;
  r.gap_class = g;
  r.outcome = Outcome::Valid;
  return r;
}

}  // namespace

TEST_CASE("decision and crossing time") {
  LogBuilder b;
  b.spawn(0.0, 0, vehicle::GapClass::G45);
  b.detect(10.0, 0);
  b.enter(14.0, negotiator(0, 22.5, 6.25));
  b.opposite(17.57);
  const auto records = metrics::extract_interactions(b.log);
  REQUIRE(records.size() == 1);
  const auto& r = records[0];
  CHECK(*r.dt == doctest::Approx(4.0));
  CHECK(*r.ct == doctest::Approx(7.57));
  CHECK(*r.ct > *r.dt);
  CHECK(*r.dac == 22.5);
  CHECK(*r.sac == 6.25);
  CHECK(r.outcome == Outcome::Valid);
  CHECK(r.gap_class == vehicle::GapClass::G60);
  CHECK(r.vehicle_id == 0);
}

TEST_CASE("crossing in front of a queued vehicle is invalid") {
  LogBuilder b;
  b.spawn(0.0, 4, vehicle::GapClass::G100);
  b.enter(3.0, negotiator(4, 30.0, 0.0, true));
  b.opposite(6.5);
  const auto records = metrics::extract_interactions(b.log);
  REQUIRE(records.size() == 1);
  CHECK(records[0].outcome == Outcome::InvalidQueued);
  CHECK_FALSE(records[0].t_detect);
  CHECK_FALSE(records[0].dt);
  CHECK_FALSE(records[0].ct);
  CHECK(*records[0].t_opposite == 6.5);
}

TEST_CASE("stepping back onto the same sidewalk aborts without a crossing time") {
  LogBuilder b;
  b.spawn(0.0, 1, vehicle::GapClass::G60);
  b.detect(2.0, 1);
  b.enter(3.0, negotiator(1, 35.0, 11.0));
  b.aborted(4.2);
  const auto records = metrics::extract_interactions(b.log);
  REQUIRE(records.size() == 1);
  CHECK(records[0].outcome == Outcome::Aborted);
  CHECK_FALSE(records[0].ct);
  CHECK_FALSE(records[0].t_opposite);
  CHECK(*records[0].dt == doctest::Approx(1.0));
}

TEST_CASE("collisions, horns, and detection-only records") {
  LogBuilder b;
  b.spawn(0.0, 0, vehicle::GapClass::G45);
  b.spawn(3.2, 1, vehicle::GapClass::G100, false);
  b.detect(5.0, 0);
  b.stopped(9.0, 0);
  b.horn(9.5, 0);
  b.enter(12.0, negotiator(1, 18.0, 14.0, false, vehicle::GapClass::G100));
  b.collision(12.8, 1);
  b.opposite(15.0);
  b.enter(20.0, std::nullopt);
  const auto records = metrics::extract_interactions(b.log);
  REQUIRE(records.size() == 3);
  CHECK(records[0].vehicle_id == 0);
  CHECK(records[0].outcome == Outcome::NoCrossing);
  CHECK(records[0].horn);
  CHECK(records[0].gap_class == vehicle::GapClass::G45);
  CHECK(records[1].vehicle_id == 1);
  CHECK(records[1].outcome == Outcome::Collision);
  CHECK_FALSE(records[1].horn);
  CHECK(records[2].vehicle_id == -1);
  CHECK(records[2].outcome == Outcome::Incomplete);
  CHECK(records == oracle::rescan(b.log));

  const auto s = metrics::summarize(records);
  CHECK(s.valid_total == 0);
  CHECK_FALSE(s.efficiency);
  CHECK(s.horn_count == 1);
  CHECK(s.outcome_counts.at(Outcome::Collision) == 1);
  CHECK(s.outcome_counts.at(Outcome::NoCrossing) == 1);
}

TEST_CASE("efficiency over the valid entry span") {
  std::vector<InteractionRecord> records;
  for (int i = 0; i < 15; ++i) {
    records.push_back(valid_at(20.0 + i * (300.0 / 14.0), vehicle::kAllGapClasses[i % 3]));
  }
  auto aborted = valid_at(400.0, vehicle::GapClass::G45);
  aborted.outcome = Outcome::Aborted;
  records.push_back(aborted);
  const auto s = metrics::summarize(records);
  CHECK(s.valid_total == 15);
  REQUIRE(s.efficiency);
  CHECK(*s.efficiency == doctest::Approx(0.05).epsilon(1e-12));
  CHECK(s.valid_by_class == std::array<int, 3>{5, 5, 5});
  CHECK(s.strata[3].n == 15);
  for (int g = 0; g < 3; ++g) CHECK(s.strata[g].n == 5);
  CHECK(*s.strata[3].mean_dt == doctest::Approx(2.0));
  CHECK(*s.strata[3].sd_dt == doctest::Approx(0.0));

  CHECK_FALSE(metrics::summarize({}).efficiency);
  CHECK_FALSE(metrics::summarize({valid_at(10.0, vehicle::GapClass::G45)}).efficiency);
}

TEST_CASE("simulated sessions agree with a naive re-scan") {
  int sessions = 0;
  for (auto kind : ehmi::kAllInterfaces) {
    for (auto policy : {PolicyKind::WaitFullStop, PolicyKind::GapAcceptance, PolicyKind::InterfaceReactive}) {
      const auto result = run_session(helpers::config_for(50 + sessions, kind, policy));
      const auto records = metrics::extract_interactions(result.log);
      CHECK(records == oracle::rescan(result.log));
      const auto s = metrics::summarize(records);
      CHECK(s.efficiency == oracle::efficiency(records));

      std::map<int, double> stopped_at;
      int valid = 0, valid_classed = 0, by_class = 0;
      for (const auto& e : result.log) {
        if (e.kind == EventKind::VehicleStopped) stopped_at[e.as<VehicleStoppedPayload>().vehicle_id] = e.t;
        if (e.kind == EventKind::VehicleRestart) stopped_at.erase(e.as<VehiclePayload>().vehicle_id);
      }
      for (const auto& r : records) {
        if (r.t_detect && r.t_enter) CHECK(*r.dt == doctest::Approx(*r.t_enter - *r.t_detect));
        if (r.ct && r.dt) CHECK(*r.ct > *r.dt);
        if (r.valid()) ++valid;
        if (r.valid() && r.gap_class) ++valid_classed;
      }
      for (int g = 0; g < 3; ++g) by_class += s.valid_by_class[g];
      CHECK(by_class == valid_classed);
      CHECK(static_cast<std::size_t>(s.strata[3].n) == static_cast<std::size_t>(valid));
      int counted = 0;
      for (const auto& [o, c] : s.outcome_counts) counted += c;
      CHECK(static_cast<std::size_t>(counted) == records.size());
      ++sessions;
    }
  }
  CHECK(sessions == 18);
}

TEST_CASE("speed at crossing is zero exactly when the vehicle had stopped") {
  for (auto kind : ehmi::kAllInterfaces) {
    const auto log = run_session(helpers::config_for(61, kind, PolicyKind::WaitFullStop)).log;
    std::map<int, bool> halted;
    for (const auto& e : log) {
      if (e.kind == EventKind::VehicleStopped) halted[e.as<VehicleStoppedPayload>().vehicle_id] = true;
      if (e.kind == EventKind::VehicleRestart) halted[e.as<VehiclePayload>().vehicle_id] = false;
      if (e.kind != EventKind::PedestrianEnteredRoad) continue;
      const auto& v = e.as<EnteredRoadPayload>().vehicle;
      if (!v) continue;
      CHECK((v->v == 0.0) == halted[v->vehicle_id]);
    }
  }
}

TEST_CASE("records csv") {
  LogBuilder b;
  b.spawn(0.0, 0, vehicle::GapClass::G45);
  b.detect(10.0, 0);
  b.enter(14.0, negotiator(0, 22.5, 0.0, false, vehicle::GapClass::G45));
  b.opposite(17.5);
  b.detect(20.0, 3);
  std::ostringstream out;
  metrics::write_records_csv(out, "seed1", "S", metrics::extract_interactions(b.log));
  CHECK(out.str() ==
        "session_id,interface,vehicle_id,gap_class,t_detect,t_enter,t_opposite,DT,CT,DAC,SAC,outcome,horn\n"
        "seed1,S,0,45,10,14,17.5,4,7.5,22.5,0,valid,0\n"
        "seed1,S,3,,20,,,,,,,no_crossing,0\n");
}

TEST_CASE("malformed logs") {
  SUBCASE("time runs backwards") {
    LogBuilder b;
    b.detect(5.0, 0);
    b.detect(4.0, 1);
    CHECK_THROWS_AS(metrics::extract_interactions(b.log), MalformedLog);
  }
  SUBCASE("opposite without entry") {
    LogBuilder b;
    b.opposite(1.0);
    CHECK_THROWS_AS(metrics::extract_interactions(b.log), MalformedLog);
  }
  SUBCASE("double entry") {
    LogBuilder b;
    b.enter(1.0, std::nullopt);
    b.enter(2.0, std::nullopt);
    CHECK_THROWS_AS(metrics::extract_interactions(b.log), MalformedLog);
  }
  CHECK_THROWS_AS(metrics::outcome_from_string("maybe"), MalformedLog);
  for (auto o : metrics::kAllOutcomes) CHECK(metrics::outcome_from_string(metrics::to_string(o)) == o);
}
