#pragma once

#include <array>

// Scenario constants of the crossing experiment. Every one of these is the
// default of a config knob; nothing in the engine reads them directly.
namespace xwalk::constants {

inline constexpr double kCruiseSpeed = 14.0;        // m/s (50 km/h)
inline constexpr double kDetectionRange = 60.0;     // m
inline constexpr double kStopOffset = 5.0;          // m before the pedestrian
inline constexpr double kVisibilityRange = 140.0;   // m
inline constexpr double kRoadWidth = 5.0;           // m, one-way road
inline constexpr double kComfortDecel = 3.0;        // m/s^2
inline constexpr double kMaxDecel = 6.0;            // m/s^2
inline constexpr double kMaxAccel = 3.0;            // m/s^2
inline constexpr std::array<double, 3> kGapMeters = {45.0, 60.0, 100.0};
inline constexpr int kMinValidCrossings = 15;
inline constexpr int kMaxGeneratedVehicles = 300;
inline constexpr double kSignificance = 0.05;       // pass condition p <= 0.05

inline constexpr double kTimestep = 0.01;           // s
inline constexpr double kWalkSpeed = 1.4;           // m/s
inline constexpr double kEdgeProximity = 0.5;       // m
inline constexpr double kVehicleLength = 4.5;       // m
inline constexpr double kVehicleWidth = 1.8;        // m
inline constexpr double kPedestrianSize = 0.5;      // m, square footprint
inline constexpr double kSpawnMargin = 20.0;        // m beyond visibility
inline constexpr double kStoppedHeadway = 2.0;      // m, bumper to bumper
inline constexpr int kQueueCap = 3;
inline constexpr double kFaultyRate = 0.15;

}  // namespace xwalk::constants
