#include "xwalk/metrics.hpp"

#include <charconv>
#include <cmath>
#include <ostream>

#include "xwalk/errors.hpp"

namespace xwalk::metrics {

using core::Event;
using core::EventKind;

std::string_view to_string(Outcome outcome) {
  switch (outcome) {
    case Outcome::Valid:
      return "valid";
    case Outcome::InvalidQueued:
      return "invalid_queued";
    case Outcome::Aborted:
      return "aborted";
    case Outcome::Collision:
      return "collision";
    case Outcome::NoCrossing:
      return "no_crossing";
    case Outcome::Incomplete:
      return "incomplete";
  }
  return "no_crossing";
}

Outcome outcome_from_string(std::string_view name) {
  for (Outcome o : kAllOutcomes) {
    if (to_string(o) == name) return o;
  }
  throw MalformedLog("unknown outcome '" + std::string(name) + "'");
}

void InteractionTracker::consume(const Event& e) {
  if (last_ && (e.t < last_->t || e.seq <= last_->seq)) {
    throw MalformedLog("event seq " + std::to_string(e.seq) + " breaks (t, seq) ordering");
  }
  last_ = e;
  switch (e.kind) {
    case EventKind::Spawned:
      ++progress_.vehicles_generated;
      gap_of_[e.as<core::SpawnedPayload>().vehicle_id] = e.as<core::SpawnedPayload>().gap_class;
      break;
    case EventKind::DetectionStart: {
      const auto& p = e.as<core::DetectionPayload>();
      InteractionRecord r;
      r.vehicle_id = p.vehicle_id;
      r.t_detect = e.t;
      if (auto g = gap_of_.find(p.vehicle_id); g != gap_of_.end()) r.gap_class = g->second;
      records_.push_back(r);
      open_detection_[p.vehicle_id] = records_.size() - 1;
      last_record_of_[p.vehicle_id] = records_.size() - 1;
      break;
    }
    case EventKind::Horn: {
      const auto& p = e.as<core::BrakePayload>();
      auto it = last_record_of_.find(p.vehicle_id);
      if (it != last_record_of_.end()) records_[it->second].horn = true;
      break;
    }
    case EventKind::PedestrianEnteredRoad: {
      if (attempt_) throw MalformedLog("road entry while an attempt is in progress");
      const auto& p = e.as<core::EnteredRoadPayload>();
      std::size_t idx;
      auto open = p.vehicle ? open_detection_.find(p.vehicle->vehicle_id) : open_detection_.end();
      if (open != open_detection_.end()) {
        idx = open->second;
        open_detection_.erase(open);
      } else {
        records_.push_back(InteractionRecord{});
        idx = records_.size() - 1;
        if (p.vehicle) {
          records_[idx].vehicle_id = p.vehicle->vehicle_id;
          last_record_of_[p.vehicle->vehicle_id] = idx;
        }
      }
      InteractionRecord& r = records_[idx];
      r.t_enter = e.t;
      r.outcome = Outcome::Incomplete;
      if (p.vehicle) {
        r.gap_class = p.vehicle->gap_class;
        r.dac = p.vehicle->d;
        r.sac = p.vehicle->v;
      }
      if (r.t_detect) r.dt = e.t - *r.t_detect;
      attempt_ = idx;
      attempt_collided_ = false;
      attempt_queued_ = p.vehicle && p.vehicle->queued;
      break;
    }
    case EventKind::Collision:
      if (attempt_) attempt_collided_ = true;
      break;
    case EventKind::PedestrianReachedOpposite: {
      if (!attempt_) throw MalformedLog("reached the opposite sidewalk without entering the road");
      InteractionRecord& r = records_[*attempt_];
      r.t_opposite = e.t;
      if (r.t_detect) r.ct = e.t - *r.t_detect;
      if (attempt_collided_) {
        r.outcome = Outcome::Collision;
      } else if (attempt_queued_) {
        r.outcome = Outcome::InvalidQueued;
      } else {
        r.outcome = Outcome::Valid;
        ++progress_.valid_crossings_total;
        if (r.gap_class) ++progress_.valid_crossings_by_class[vehicle::gap_index(*r.gap_class)];
      }
      attempt_.reset();
      break;
    }
    case EventKind::PedestrianAborted: {
      if (!attempt_) throw MalformedLog("aborted without entering the road");
      records_[*attempt_].outcome = attempt_collided_ ? Outcome::Collision : Outcome::Aborted;
      attempt_.reset();
      break;
    }
    default:
      break;
  }
}

std::vector<InteractionRecord> InteractionTracker::finish() const {
  std::vector<InteractionRecord> out = records_;
  if (attempt_ && attempt_collided_) out[*attempt_].outcome = Outcome::Collision;
  return out;
}

std::vector<InteractionRecord> extract_interactions(const core::EventLog& log) {
  InteractionTracker tracker;
  for (const Event& e : log) tracker.consume(e);
  return tracker.finish();
}

namespace {

void describe_into(const std::vector<double>& xs, std::optional<double>& mean, std::optional<double>& sd) {
  if (xs.empty()) return;
  double sum = 0.0;
  for (double x : xs) sum += x;
  const double m = sum / static_cast<double>(xs.size());
  mean = m;
  if (xs.size() < 2) return;
  double ss = 0.0;
  for (double x : xs) ss += (x - m) * (x - m);
  sd = std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

std::string number(const std::optional<double>& value) {
  if (!value || !std::isfinite(*value)) return {};
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, *value);
  return std::string(buf, res.ptr);
}

nlohmann::ordered_json json_number(const std::optional<double>& value) {
  if (!value || !std::isfinite(*value)) return nullptr;
  return *value;
}

}  // namespace

SessionSummary summarize(const std::vector<InteractionRecord>& records) {
  SessionSummary s;
  s.records = records;
  for (Outcome o : kAllOutcomes) s.outcome_counts[o] = 0;
  std::array<std::array<std::vector<double>, 4>, 4> samples;  // stratum x {dt, ct, dac, sac}
  std::optional<double> first_enter, last_enter;
  for (const auto& r : records) {
    ++s.outcome_counts[r.outcome];
    if (r.horn) ++s.horn_count;
    if (!r.valid()) continue;
    ++s.valid_total;
    if (r.t_enter) {
      if (!first_enter || *r.t_enter < *first_enter) first_enter = r.t_enter;
      if (!last_enter || *r.t_enter > *last_enter) last_enter = r.t_enter;
    }
    std::vector<std::size_t> slots = {3};
    if (r.gap_class) {
      const auto g = static_cast<std::size_t>(vehicle::gap_index(*r.gap_class));
      ++s.valid_by_class[g];
      slots.push_back(g);
    }
    for (std::size_t slot : slots) {
      ++s.strata[slot].n;
      const std::optional<double> fields[4] = {r.dt, r.ct, r.dac, r.sac};
      for (std::size_t f = 0; f < 4; ++f) {
        if (fields[f]) samples[slot][f].push_back(*fields[f]);
      }
    }
  }
  for (std::size_t slot = 0; slot < 4; ++slot) {
    Stratum& st = s.strata[slot];
    describe_into(samples[slot][0], st.mean_dt, st.sd_dt);
    describe_into(samples[slot][1], st.mean_ct, st.sd_ct);
    describe_into(samples[slot][2], st.mean_dac, st.sd_dac);
    describe_into(samples[slot][3], st.mean_sac, st.sd_sac);
  }
  if (s.valid_total >= 2 && first_enter && last_enter && *last_enter > *first_enter) {
    s.efficiency = static_cast<double>(s.valid_total) / (*last_enter - *first_enter);
  }
  return s;
}

void write_records_csv(std::ostream& out, const std::string& session_id, std::string_view interface,
                       const std::vector<InteractionRecord>& records, bool header) {
  if (header) out << kCsvHeader << '\n';
  for (const auto& r : records) {
    out << session_id << ',' << interface << ',' << r.vehicle_id << ','
        << (r.gap_class ? vehicle::to_string(*r.gap_class) : "") << ',' << number(r.t_detect) << ','
        << number(r.t_enter) << ',' << number(r.t_opposite) << ',' << number(r.dt) << ',' << number(r.ct) << ','
        << number(r.dac) << ',' << number(r.sac) << ',' << to_string(r.outcome) << ',' << (r.horn ? 1 : 0) << '\n';
  }
}

nlohmann::ordered_json summary_json(const SessionSummary& s, const std::string& session_id,
                                    std::string_view interface) {
  nlohmann::ordered_json j;
  j["session_id"] = session_id;
  j["interface"] = interface;
  j["records"] = s.records.size();
  j["valid"] = s.valid_total;
  j["efficiency"] = json_number(s.efficiency);
  nlohmann::ordered_json counts;
  for (Outcome o : kAllOutcomes) counts[std::string(to_string(o))] = s.outcome_counts.at(o);
  j["outcomes"] = counts;
  j["horn"] = s.horn_count;
  nlohmann::ordered_json strata;
  const char* names[4] = {"45", "60", "100", "all"};
  for (std::size_t i = 0; i < 4; ++i) {
    const Stratum& st = s.strata[i];
    strata[names[i]] = nlohmann::ordered_json{{"n", st.n},
                                              {"DT", {{"mean", json_number(st.mean_dt)}, {"sd", json_number(st.sd_dt)}}},
                                              {"CT", {{"mean", json_number(st.mean_ct)}, {"sd", json_number(st.sd_ct)}}},
                                              {"DAC", {{"mean", json_number(st.mean_dac)}, {"sd", json_number(st.sd_dac)}}},
                                              {"SAC", {{"mean", json_number(st.mean_sac)}, {"sd", json_number(st.sd_sac)}}}};
  }
  j["strata"] = strata;
  return j;
}

}  // namespace xwalk::metrics
