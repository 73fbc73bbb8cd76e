#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "xwalk/event.hpp"
#include "xwalk/scenario.hpp"
#include "xwalk/vehicle.hpp"

namespace xwalk::metrics {

enum class Outcome { Valid, InvalidQueued, Aborted, Collision, NoCrossing, Incomplete };

inline constexpr Outcome kAllOutcomes[] = {Outcome::Valid,     Outcome::InvalidQueued, Outcome::Aborted,
                                           Outcome::Collision, Outcome::NoCrossing,    Outcome::Incomplete};

std::string_view to_string(Outcome outcome);
Outcome outcome_from_string(std::string_view name);

struct InteractionRecord {
  int vehicle_id = -1;  // -1 when no vehicle was in sight at road entry
  std::optional<vehicle::GapClass> gap_class;
  std::optional<double> t_detect;
  std::optional<double> t_enter;
  std::optional<double> t_opposite;
  std::optional<double> dac;
  std::optional<double> sac;
  std::optional<double> ct;
  std::optional<double> dt;
  Outcome outcome = Outcome::NoCrossing;
  bool horn = false;

  bool valid() const { return outcome == Outcome::Valid; }
  friend bool operator==(const InteractionRecord&, const InteractionRecord&) = default;
};

/// Consumes events in log order and builds interaction records incrementally.
class InteractionTracker {
 public:
  /// Throws MalformedLog on ordering violations or an attempt ending that never began.
  void consume(const core::Event& event);
  /// Records in creation order; an attempt still on the road is Incomplete.
  std::vector<InteractionRecord> finish() const;
  const scenario::SessionProgress& progress() const { return progress_; }

 private:
  std::vector<InteractionRecord> records_;
  std::map<int, std::size_t> open_detection_;
  std::map<int, std::size_t> last_record_of_;
  std::map<int, vehicle::GapClass> gap_of_;
  std::optional<std::size_t> attempt_;
  bool attempt_collided_ = false;
  bool attempt_queued_ = false;
  std::optional<core::Event> last_;
  scenario::SessionProgress progress_{};
};

std::vector<InteractionRecord> extract_interactions(const core::EventLog& log);

struct Stratum {
  std::size_t n = 0;
  std::optional<double> mean_dt, mean_ct, mean_dac, mean_sac;
  std::optional<double> sd_dt, sd_ct, sd_dac, sd_sac;
};

struct SessionSummary {
  std::vector<InteractionRecord> records;
  std::optional<double> efficiency;  // valid crossings per second
  std::map<Outcome, int> outcome_counts;
  std::array<int, 3> valid_by_class{};
  int valid_total = 0;
  int horn_count = 0;
  // Valid crossings only, by gap_index; overall in the last slot.
  std::array<Stratum, 4> strata{};
};

SessionSummary summarize(const std::vector<InteractionRecord>& records);

inline constexpr std::string_view kCsvHeader =
    "session_id,interface,vehicle_id,gap_class,t_detect,t_enter,t_opposite,DT,CT,DAC,SAC,outcome,horn";

void write_records_csv(std::ostream& out, const std::string& session_id, std::string_view interface,
                       const std::vector<InteractionRecord>& records, bool header = true);

nlohmann::ordered_json summary_json(const SessionSummary& summary, const std::string& session_id,
                                    std::string_view interface);

}  // namespace xwalk::metrics
