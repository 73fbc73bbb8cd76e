#pragma once

// Re-scans the whole log for every record instead of streaming it.

#include <optional>
#include <vector>

#include "xwalk/event.hpp"
#include "xwalk/metrics.hpp"

namespace oracle {

using xwalk::core::Event;
using xwalk::core::EventKind;
using xwalk::core::EventLog;
using xwalk::metrics::InteractionRecord;
using xwalk::metrics::Outcome;

inline std::optional<int> event_vehicle(const Event& e) {
  switch (e.kind) {
    case EventKind::Spawned:
      return e.as<xwalk::core::SpawnedPayload>().vehicle_id;
    case EventKind::DetectionStart:
      return e.as<xwalk::core::DetectionPayload>().vehicle_id;
    case EventKind::Horn:
      return e.as<xwalk::core::BrakePayload>().vehicle_id;
    case EventKind::PedestrianEnteredRoad: {
      const auto& v = e.as<xwalk::core::EnteredRoadPayload>().vehicle;
      if (v) return v->vehicle_id;
      return std::nullopt;
    }
    default:
      return std::nullopt;
  }
}

inline std::vector<InteractionRecord> rescan(const EventLog& log) {
  const std::size_t n = log.size();
  // Which detection (if any) each road entry continues.
  std::vector<std::optional<std::size_t>> entry_anchor(n);
  std::vector<bool> detection_used(n, false);
  for (std::size_t j = 0; j < n; ++j) {
    if (log[j].kind != EventKind::PedestrianEnteredRoad) continue;
    const auto vid = event_vehicle(log[j]);
    if (!vid) continue;
    for (std::size_t k = j; k-- > 0;) {
      if (event_vehicle(log[k]) != vid) continue;
      if (log[k].kind == EventKind::PedestrianEnteredRoad) break;
      if (log[k].kind == EventKind::DetectionStart) {
        entry_anchor[j] = k;
        detection_used[k] = true;
        break;
      }
    }
  }

  std::vector<std::size_t> creators;  // event index that created each record
  for (std::size_t i = 0; i < n; ++i) {
    if (log[i].kind == EventKind::DetectionStart) creators.push_back(i);
    if (log[i].kind == EventKind::PedestrianEnteredRoad && !entry_anchor[i]) creators.push_back(i);
  }

  std::vector<InteractionRecord> out;
  for (std::size_t c = 0; c < creators.size(); ++c) {
    const std::size_t at = creators[c];
    InteractionRecord r;
    const auto vid = event_vehicle(log[at]);
    if (vid) r.vehicle_id = *vid;

    std::optional<std::size_t> entry;
    if (log[at].kind == EventKind::DetectionStart) {
      r.t_detect = log[at].t;
      for (std::size_t j = at + 1; j < n; ++j) {
        if (entry_anchor[j] == at) {
          entry = j;
          break;
        }
      }
      for (std::size_t k = 0; k < at; ++k) {
        if (log[k].kind == EventKind::Spawned && event_vehicle(log[k]) == vid) {
          r.gap_class = log[k].as<xwalk::core::SpawnedPayload>().gap_class;
        }
      }
    } else {
      entry = at;
    }

    // A horn belongs to the newest record of its vehicle created before it.
    if (vid) {
      for (std::size_t h = at + 1; h < n; ++h) {
        if (log[h].kind != EventKind::Horn || event_vehicle(log[h]) != vid) continue;
        bool newer = false;
        for (std::size_t c2 = c + 1; c2 < creators.size(); ++c2) {
          if (creators[c2] < h && event_vehicle(log[creators[c2]]) == vid) newer = true;
        }
        if (!newer) r.horn = true;
      }
    }

    if (entry) {
      const Event& e = log[*entry];
      const auto& p = e.as<xwalk::core::EnteredRoadPayload>();
      r.t_enter = e.t;
      if (p.vehicle) {
        r.gap_class = p.vehicle->gap_class;
        r.dac = p.vehicle->d;
        r.sac = p.vehicle->v;
      }
      if (r.t_detect) r.dt = e.t - *r.t_detect;
      bool collided = false;
      r.outcome = Outcome::Incomplete;
      for (std::size_t j = *entry + 1; j < n; ++j) {
        if (log[j].kind == EventKind::Collision) collided = true;
        if (log[j].kind == EventKind::PedestrianAborted) {
          r.outcome = collided ? Outcome::Collision : Outcome::Aborted;
          break;
        }
        if (log[j].kind == EventKind::PedestrianReachedOpposite) {
          r.t_opposite = log[j].t;
          if (r.t_detect) r.ct = log[j].t - *r.t_detect;
          if (collided) {
            r.outcome = Outcome::Collision;
          } else if (p.vehicle && p.vehicle->queued) {
            r.outcome = Outcome::InvalidQueued;
          } else {
            r.outcome = Outcome::Valid;
          }
          break;
        }
      }
      if (r.outcome == Outcome::Incomplete && collided) r.outcome = Outcome::Collision;
    }
    out.push_back(r);
  }
  return out;
}

/// Valid crossings per second between the first and last valid road entry.
inline std::optional<double> efficiency(const std::vector<InteractionRecord>& records) {
  std::vector<double> enters;
  for (const auto& r : records) {
    if (r.outcome == Outcome::Valid && r.t_enter) enters.push_back(*r.t_enter);
  }
  if (enters.size() < 2) return std::nullopt;
  const auto [lo, hi] = std::minmax_element(enters.begin(), enters.end());
  if (*hi <= *lo) return std::nullopt;
  return static_cast<double>(enters.size()) / (*hi - *lo);
}

}  // namespace oracle
