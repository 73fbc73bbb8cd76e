#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "xwalk/config.hpp"
#include "xwalk/metrics.hpp"
#include "xwalk/stats.hpp"

namespace xwalk::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

/// Entry point shared by the executable and the tests. args excludes argv[0].
int main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// "7", "1..10" or "1,4,9". Throws ConfigError on anything else.
std::vector<std::uint64_t> parse_seeds(const std::string& text);

/// Stem of the per-session output files, e.g. "E-seed7".
std::string session_stem(const SessionConfig& config);

struct SessionOutput {
  std::string stem;
  metrics::SessionSummary summary;
  std::vector<metrics::InteractionRecord> records;
  bool completed = false;  // termination rule met before max_duration
};

/// Runs one headless session and writes <dir>/<stem>.{events.jsonl, trace.jsonl,
/// records.csv, summary.json, pattern.csv, config.json}.
SessionOutput run_and_write(const SessionConfig& config, const std::filesystem::path& dir);

/// Pivot of a per-interaction metrics CSV: one row per session_id, one column
/// per interface, cell = mean of `metric` over valid records.
stats::BlockMatrix metrics_table(std::istream& in, const std::string& metric);

}  // namespace xwalk::cli
