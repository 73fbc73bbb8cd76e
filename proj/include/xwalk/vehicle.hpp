#pragma once

#include <optional>
#include <string_view>

#include "xwalk/constants.hpp"
#include "xwalk/pedestrian.hpp"

namespace xwalk::vehicle {

enum class GapClass { G45, G60, G100 };

inline constexpr GapClass kAllGapClasses[] = {GapClass::G45, GapClass::G60, GapClass::G100};

double gap_meters(GapClass gap);
int gap_index(GapClass gap);
std::string_view to_string(GapClass gap);
GapClass gap_class_from_string(std::string_view name);

enum class Mode { Cruise, Braking, Stopped, Restarting };

std::string_view to_string(Mode mode);
Mode mode_from_string(std::string_view name);

struct PidGains {
  double kp = 1.2;
  double ki = 0.1;
  double kd = 0.05;
  double min_output = -constants::kMaxDecel;
  double max_output = constants::kMaxAccel;
  double jerk_limit = 5.0;  // m/s^3, bounds the change of output per second
};

/// Speed controller producing an acceleration command. Output is clamped to
/// [min_output, max_output] and rate limited by jerk_limit. The integrator is
/// frozen whenever the output is clamped or rate limited.
class PidController {
 public:
  PidController() = default;
  explicit PidController(PidGains gains) : gains_(gains) {}

  double update(double v_target, double v, double dt);

  /// Aligns the rate limiter with the acceleration that was actually applied.
  void sync_output(double applied) { last_output_ = applied; }
  void reset();

  const PidGains& gains() const { return gains_; }
  double integral() const { return integral_; }
  double last_output() const { return last_output_; }

  friend bool operator==(const PidController&, const PidController&) = default;

 private:
  PidGains gains_{};
  double integral_ = 0.0;
  double last_output_ = 0.0;
  double last_measurement_ = 0.0;
  bool primed_ = false;
};

struct VehicleParams {
  double cruise_speed = constants::kCruiseSpeed;
  double detection_range = constants::kDetectionRange;
  double stop_offset = constants::kStopOffset;
  double max_decel = constants::kMaxDecel;
  double comfort_decel = constants::kComfortDecel;
  double max_accel = constants::kMaxAccel;
  double length = constants::kVehicleLength;
  double width = constants::kVehicleWidth;
  PidGains pid{};
  // Car following behind a slower or stopped vehicle.
  double stopped_headway = constants::kStoppedHeadway;
  double time_headway = 0.5;
  double follow_decel = constants::kComfortDecel;
  // A stopped yielding vehicle waits this long for a pedestrian who stopped signalling.
  double intent_grace = 2.0;
  double max_wait = 20.0;
};

struct BrakePlan {
  enum class Decision { Brake, Horn };
  Decision decision = Decision::Horn;
  double a_req = 0.0;   // m/s^2, positive magnitude
  double stop_x = 0.0;  // front bumper target, crossing line at x = 0

  bool brakes() const { return decision == Decision::Brake; }
  friend bool operator==(const BrakePlan&, const BrakePlan&) = default;
};

struct VehicleState {
  int id = 0;
  double x = 0.0;  // front bumper
  double v = 0.0;
  double a = 0.0;
  Mode mode = Mode::Cruise;
  bool yielding = true;
  bool detected_pedestrian = false;
  bool horn_fired = false;
  // A vehicle negotiates at most once; set on detection and never cleared.
  bool negotiated = false;
  GapClass gap_class = GapClass::G45;
  std::optional<int> queued_behind;
  // Slowed by traffic ahead; sticky until the vehicle is back at cruise speed.
  bool queued = false;
  std::optional<BrakePlan> plan;
  double mode_since = 0.0;      // session time of the last mode change
  double brake_start_v = 0.0;
  double detect_time = 0.0;
  PidController pid{};

  double rear(double length) const { return x - length; }
  friend bool operator==(const VehicleState&, const VehicleState&) = default;
};

/// a = v^2 / (2 d_stop). Throws DomainError when d_stop <= 0.
double required_deceleration(double v, double d_stop);

/// Constant-deceleration stop `stop_offset` before the pedestrian, or Horn when
/// that would need more than max_decel (a_req == max_decel still brakes).
BrakePlan plan_brake(double v, double d_to_pedestrian, const VehicleParams& params = {});

/// v^2 / (2 a_ref). Throws DomainError when a_ref <= 0.
double stopping_distance(double v, double a_ref);

/// Lowest of the precomputed braking curves {3, 6} that is not below a_current.
/// Throws DomainError when a_current is outside [0, 6].
double select_brake_curve(double a_current);

/// Sensor predicate: a yielding vehicle within detection range sees a pedestrian
/// who stands near a sidewalk edge, looks at the road and is not behind it.
bool detect(const VehicleState& vehicle, const pedestrian::PedestrianState& ped,
            const VehicleParams& params = {}, const pedestrian::PedestrianParams& ped_params = {});

/// The vehicle directly ahead, as seen by a follower.
struct LeaderView {
  double rear_x = 0.0;
  double v = 0.0;
  double stop_decel = constants::kMaxDecel;  // deceleration the leader is assumed to stop with
};

/// Largest speed at which a follower can still stop `stopped_headway` behind the
/// leader's stopping point while keeping `time_headway` of reaction margin.
double follow_speed_cap(double follower_x, const LeaderView& leader, const VehicleParams& params);

struct AccelCommand {
  double a = 0.0;
  bool follow_bound = false;
};

/// Acceleration for this step: planned constant deceleration while braking,
/// otherwise the PID toward cruise speed; both bounded by the follow cap.
AccelCommand command_acceleration(VehicleState& vehicle, const std::optional<LeaderView>& leader,
                                  const VehicleParams& params, double dt);

/// Exact constant-acceleration update over one step; speed never goes negative.
void integrate(VehicleState& vehicle, double a, double dt);

void begin_restart(VehicleState& vehicle, double now);

LeaderView leader_view(const VehicleState& leader, const VehicleParams& params);

}  // namespace xwalk::vehicle
