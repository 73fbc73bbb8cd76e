#include "xwalk/cli.hpp"

#include <atomic>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "xwalk/errors.hpp"
#include "xwalk/world.hpp"

#ifdef XWALK_WITH_SERVER
#include "xwalk/server/ws_server.hpp"
#endif

namespace xwalk::cli {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

std::uint64_t parse_u64(const std::string& text) {
  std::uint64_t value = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw ConfigError("bad seed '" + text + "'");
  }
  return value;
}

std::vector<std::string> split(const std::string& line, char sep = ',') {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, sep)) {
    if (!cell.empty() && cell.back() == '\r') cell.pop_back();
    out.push_back(cell);
  }
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

SessionConfig base_config(const std::string& path) {
  std::string source = path;
  if (source.empty()) {
    if (const char* env = std::getenv("CROSSWALK_SIM_CONFIG"); env && *env) source = env;
  }
  return source.empty() ? SessionConfig{} : load_config(source);
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

std::string format_number(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

ordered_json matrix_json(const std::vector<double>& values, std::size_t k) {
  ordered_json rows = ordered_json::array();
  for (std::size_t i = 0; i < k; ++i) {
    ordered_json row = ordered_json::array();
    for (std::size_t j = 0; j < k; ++j) row.push_back(values[i * k + j]);
    rows.push_back(row);
  }
  return rows;
}

std::size_t column_index(const stats::BlockMatrix& m, const std::string& label) {
  const auto& labels = m.col_labels();
  for (std::size_t c = 0; c < labels.size(); ++c) {
    if (labels[c] == label) return c;
  }
  throw DegenerateInput("no column '" + label + "' in the table");
}

std::vector<double> column_values(const stats::BlockMatrix& m, std::size_t c) {
  std::vector<double> out;
  for (std::size_t r = 0; r < m.rows(); ++r) out.push_back(m.at(r, c));
  return out;
}

std::vector<stats::Ballot> read_ballots(std::istream& in) {
  std::vector<stats::Ballot> ballots;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    ballots.push_back(split(line));
  }
  if (ballots.empty()) throw DegenerateInput("no ballots in input");
  return ballots;
}

struct AnalyzeArgs {
  std::string test;
  std::string input;
  std::string metric;
  std::string subject_col = "subject";
  std::string condition_col = "interface";
  std::string value_col = "value";
  std::string a, b;
  std::size_t majority = 0;
  std::string format = "json";
  std::string output;
};

stats::BlockMatrix load_matrix(const AnalyzeArgs& args, std::istream& in) {
  if (!args.metric.empty()) return metrics_table(in, args.metric);
  return stats::read_long_table(in, args.subject_col, args.condition_col, args.value_col);
}

std::string analyze(const AnalyzeArgs& args) {
  std::ifstream in(args.input);
  if (!in) throw std::runtime_error("cannot open " + args.input);
  const bool csv = args.format == "csv";
  std::ostringstream out;
  ordered_json j;
  j["test"] = args.test;

  if (args.test == "rpss") {
    const auto ballots = read_ballots(in);
    const std::size_t majority = args.majority ? args.majority : stats::default_majority(ballots.size());
    const auto ranking = stats::rpss_aggregate(ballots, majority);
    if (csv) {
      out << "position,label,elect_round,votes_at_round,borda\n";
      for (std::size_t i = 0; i < ranking.size(); ++i) {
        const auto& e = ranking[i];
        out << i + 1 << ',' << e.label << ',' << (e.elect_round ? std::to_string(*e.elect_round) : "") << ','
            << e.votes_at_round << ',' << e.borda << '\n';
      }
      return out.str();
    }
    j["ballots"] = ballots.size();
    j["majority"] = majority;
    ordered_json entries = ordered_json::array();
    for (const auto& e : ranking) {
      entries.push_back({{"label", e.label},
                         {"elect_round", e.elect_round ? ordered_json(*e.elect_round) : ordered_json(nullptr)},
                         {"votes_at_round", e.votes_at_round},
                         {"borda", e.borda},
                         {"cumulative", e.cumulative}});
    }
    j["ranking"] = entries;
    return j.dump(2) + "\n";
  }

  const stats::BlockMatrix m = load_matrix(args, in);
  const auto& labels = m.col_labels();
  j["n"] = m.rows();
  j["k"] = m.cols();
  j["labels"] = labels;

  if (args.test == "describe") {
    if (csv) out << "condition,n,mean,sd\n";
    ordered_json rows = ordered_json::array();
    for (std::size_t c = 0; c < m.cols(); ++c) {
      const auto values = column_values(m, c);
      const auto d = stats::describe(values);
      if (csv) {
        out << labels[c] << ',' << d.n << ',' << format_number(d.mean) << ','
            << (d.sd ? format_number(*d.sd) : "") << '\n';
      }
      rows.push_back({{"condition", labels[c]},
                      {"n", d.n},
                      {"mean", d.mean},
                      {"sd", d.sd ? ordered_json(*d.sd) : ordered_json(nullptr)}});
    }
    if (csv) return out.str();
    j["conditions"] = rows;
  } else if (args.test == "friedman") {
    const auto f = stats::friedman(m);
    const auto post = stats::conover_posthoc(m);
    if (csv) {
      out << "p";
      for (const auto& l : labels) out << ',' << l;
      out << '\n';
      for (std::size_t i = 0; i < post.k; ++i) {
        out << labels[i];
        for (std::size_t jj = 0; jj < post.k; ++jj) out << ',' << format_number(post.p_at(i, jj));
        out << '\n';
      }
      return out.str();
    }
    j["statistic"] = f.statistic;
    j["df"] = f.df;
    j["p"] = f.p;
    j["pairwise"] = {{"method", "conover"}, {"df", post.df}, {"t", matrix_json(post.t, post.k)},
                     {"p", matrix_json(post.p, post.k)}};
  } else if (args.test == "mann-whitney" || args.test == "spearman") {
    if (args.a.empty() || args.b.empty()) throw ConfigError(args.test + " needs --a and --b");
    const auto xa = column_values(m, column_index(m, args.a));
    const auto xb = column_values(m, column_index(m, args.b));
    j["a"] = args.a;
    j["b"] = args.b;
    if (args.test == "mann-whitney") {
      const auto r = stats::mann_whitney(xa, xb);
      j["u"] = r.u;
      j["p"] = r.p;
      j["exact"] = r.exact;
      if (!r.exact) j["z"] = r.z;
    } else {
      const auto r = stats::spearman(xa, xb);
      j["rho"] = r.rho;
      j["df"] = r.df;
      j["p"] = r.p;
    }
  } else if (args.test == "cronbach") {
    j["alpha"] = stats::cronbach_alpha(m);
  } else {
    throw ConfigError("unknown test '" + args.test + "'");
  }
  if (csv) {
    out << "key,value\n";
    for (const auto& [key, value] : j.items()) {
      if (value.is_number()) out << key << ',' << format_number(value.get<double>()) << '\n';
    }
    return out.str();
  }
  return j.dump(2) + "\n";
}

struct RunArgs {
  std::string config;
  std::vector<std::string> interfaces;
  bool all_interfaces = false;
  std::string seeds;
  std::string policy;
  std::string out;
  unsigned jobs = 1;
  double faulty_rate = -1.0;
  int queue_cap = -1;
  double max_duration = -1.0;
};

int cmd_run(const RunArgs& args, std::ostream& out, std::ostream& err) {
  SessionConfig base = base_config(args.config);
  if (!args.policy.empty()) base.policy.kind = pedestrian::policy_kind_from_string(args.policy);
  if (!args.out.empty()) base.output_dir = args.out;
  if (args.faulty_rate >= 0.0) base.scenario.faulty_rate = args.faulty_rate;
  if (args.queue_cap >= 0) base.scenario.queue_cap = args.queue_cap;
  if (args.max_duration >= 0.0) base.max_duration = args.max_duration;

  std::vector<ehmi::InterfaceKind> interfaces;
  if (args.all_interfaces) {
    interfaces.assign(std::begin(ehmi::kAllInterfaces), std::end(ehmi::kAllInterfaces));
  } else if (!args.interfaces.empty()) {
    for (const auto& name : args.interfaces) interfaces.push_back(ehmi::interface_from_string(name));
  } else {
    interfaces.push_back(base.interface);
  }
  const std::vector<std::uint64_t> seeds = args.seeds.empty() ? std::vector<std::uint64_t>{base.seed}
                                                               : parse_seeds(args.seeds);

  std::vector<SessionConfig> matrix;
  for (auto kind : interfaces) {
    for (auto seed : seeds) {
      SessionConfig c = base;
      c.interface = kind;
      c.seed = seed;
      validate(c);
      matrix.push_back(c);
    }
  }
  const fs::path dir = base.output_dir;
  fs::create_directories(dir);

  std::vector<SessionOutput> results(matrix.size());
  std::vector<std::string> errors(matrix.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < matrix.size(); i = next++) {
      try {
        results[i] = run_and_write(matrix[i], dir);
      } catch (const std::exception& ex) {
        errors[i] = ex.what();
      }
    }
  };
  const unsigned jobs = std::max(1u, std::min<unsigned>(args.jobs, static_cast<unsigned>(matrix.size())));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < jobs; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  int failures = 0;
  std::ofstream combined(dir / "records.csv");
  combined << metrics::kCsvHeader << '\n';
  ordered_json sessions = ordered_json::array();
  for (std::size_t i = 0; i < matrix.size(); ++i) {
    const SessionConfig& c = matrix[i];
    if (!errors[i].empty()) {
      err << session_stem(c) << ": " << errors[i] << '\n';
      ++failures;
      continue;
    }
    const SessionOutput& r = results[i];
    const std::string letter(1, ehmi::letter(c.interface));
    metrics::write_records_csv(combined, "seed" + std::to_string(c.seed), letter, r.records, false);
    sessions.push_back(metrics::summary_json(r.summary, "seed" + std::to_string(c.seed), letter));
    out << r.stem << ": " << r.summary.valid_total << " valid of " << r.records.size() << " interactions\n";
    if (!r.completed) {
      err << r.stem << ": stopped at max_duration before the termination rule held\n";
      ++failures;
    }
  }
  write_file(dir / "sessions.json", sessions.dump(2) + "\n");
  out << matrix.size() - failures << " of " << matrix.size() << " sessions written to " << dir.string() << '\n';
  return failures == 0 ? kExitOk : kExitFailure;
}

struct ReplayArgs {
  std::string config;
  std::string trace;
  std::string log;
  std::string out;
};

int cmd_replay(const ReplayArgs& args, std::ostream& out, std::ostream& err) {
  const SessionConfig config = base_config(args.config);
  std::ifstream trace_in(args.trace);
  if (!trace_in) throw std::runtime_error("cannot open " + args.trace);
  const core::CommandTrace trace = core::read_trace(trace_in);
  const core::EventLog log = core::replay(config, trace);
  const std::string text = core::serialize_log(log);
  if (!args.out.empty()) write_file(args.out, text);
  if (args.log.empty()) {
    if (args.out.empty()) out << text;
    return kExitOk;
  }
  std::ifstream expected_in(args.log);
  if (!expected_in) throw std::runtime_error("cannot open " + args.log);
  std::istringstream replayed(text);
  std::string a, b;
  std::size_t line = 0;
  while (true) {
    ++line;
    const bool more_a = static_cast<bool>(std::getline(expected_in, a));
    const bool more_b = static_cast<bool>(std::getline(replayed, b));
    if (!more_a && !more_b) break;
    if (more_a != more_b || a != b) {
      err << "replay diverges from " << args.log << " at line " << line << '\n';
      return kExitFailure;
    }
  }
  out << "replay identical: " << log.size() << " events\n";
  return kExitOk;
}

#ifdef XWALK_WITH_SERVER
struct ServeArgs {
  std::string config;
  std::string address = "127.0.0.1";
  unsigned port = server::kDefaultPort;
  double snapshot_hz = 20.0;
  double keepalive_hz = 1.0;
  bool reveal_yielding = false;
  std::string log_dir;
  std::size_t max_sessions = 16;
};

int cmd_serve(const ServeArgs& args, std::ostream& out, std::ostream& err) {
  server::ServerOptions options;
  options.address = args.address;
  options.port = static_cast<unsigned short>(args.port);
  options.max_sessions = args.max_sessions;
  options.base_config = base_config(args.config);
  options.base_config.policy.kind = pedestrian::PolicyKind::External;
  options.session.snapshot_hz = args.snapshot_hz;
  options.session.keepalive_hz = args.keepalive_hz;
  options.session.reveal_yielding = args.reveal_yielding;
  options.session.log_dir = args.log_dir;
  if (!(args.snapshot_hz > 0.0) || !(args.keepalive_hz > 0.0)) throw ConfigError("rates must be positive");
  if (!args.log_dir.empty()) fs::create_directories(args.log_dir);
  server::Server srv(options);
  unsigned short port = 0;
  try {
    port = srv.start();
  } catch (const std::exception& ex) {
    err << ex.what() << '\n';
    return kExitFailure;
  }
  out << "listening on " << args.address << ':' << port << std::endl;
  srv.wait_for_signal();
  out << "stopped" << std::endl;
  return kExitOk;
}
#endif

}  // namespace

std::vector<std::uint64_t> parse_seeds(const std::string& text) {
  std::vector<std::uint64_t> out;
  if (const auto dots = text.find(".."); dots != std::string::npos) {
    const std::uint64_t lo = parse_u64(text.substr(0, dots));
    const std::uint64_t hi = parse_u64(text.substr(dots + 2));
    if (hi < lo) throw ConfigError("empty seed range '" + text + "'");
    for (std::uint64_t s = lo; s <= hi; ++s) out.push_back(s);
    return out;
  }
  for (const auto& part : split(text)) out.push_back(parse_u64(part));
  if (out.empty()) throw ConfigError("no seeds given");
  return out;
}

std::string session_stem(const SessionConfig& config) {
  return std::string(1, ehmi::letter(config.interface)) + "-seed" + std::to_string(config.seed);
}

SessionOutput run_and_write(const SessionConfig& config, const fs::path& dir) {
  const core::SessionResult result = core::run_session(config);
  SessionOutput out;
  out.stem = session_stem(config);
  out.records = metrics::extract_interactions(result.log);
  out.summary = metrics::summarize(out.records);
  const std::string session_id = "seed" + std::to_string(config.seed);
  const std::string letter(1, ehmi::letter(config.interface));

  write_file(dir / (out.stem + ".events.jsonl"), core::serialize_log(result.log));
  std::ostringstream trace;
  core::write_trace(trace, result.trace);
  write_file(dir / (out.stem + ".trace.jsonl"), trace.str());
  std::ostringstream records;
  metrics::write_records_csv(records, session_id, letter, out.records, true);
  write_file(dir / (out.stem + ".records.csv"), records.str());
  ordered_json summary = metrics::summary_json(out.summary, session_id, letter);
  summary["vehicles_generated"] = result.progress.vehicles_generated;
  summary["duration"] = result.duration;
  out.completed = scenario::check_termination(result.progress, config.scenario);
  summary["terminated"] = out.completed;
  write_file(dir / (out.stem + ".summary.json"), summary.dump(2) + "\n");
  std::ostringstream pattern;
  scenario::write_pattern_csv(pattern, result.pattern);
  write_file(dir / (out.stem + ".pattern.csv"), pattern.str());
  write_file(dir / (out.stem + ".config.json"), to_json(config).dump(2) + "\n");
  return out;
}

stats::BlockMatrix metrics_table(std::istream& in, const std::string& metric) {
  std::string line;
  if (!std::getline(in, line) || line.empty()) throw DegenerateInput("table is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split(line);
  auto column = [&](const std::string& name) {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw DegenerateInput("row 1: missing column '" + name + "'");
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t cs = column("session_id");
  const std::size_t ci = column("interface");
  const std::size_t co = column("outcome");
  const std::size_t cm = column(metric);

  std::map<std::pair<std::string, std::string>, std::pair<double, std::size_t>> sums;
  std::vector<std::pair<std::string, std::string>> order;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != header.size()) {
      throw DegenerateInput("row " + std::to_string(row) + ": expected " + std::to_string(header.size()) +
                            " fields, found " + std::to_string(cells.size()));
    }
    if (cells[co] != "valid" || cells[cm].empty()) continue;
    double value = 0.0;
    const std::string& text = cells[cm];
    const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
    if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
      throw DegenerateInput("row " + std::to_string(row) + ": " + metric + " '" + text + "' is not a number");
    }
    const auto key = std::make_pair(cells[cs], cells[ci]);
    auto [it, inserted] = sums.try_emplace(key, 0.0, 0);
    if (inserted) order.push_back(key);
    it->second.first += value;
    ++it->second.second;
  }
  std::ostringstream longform;
  longform << "subject,interface,value\n";
  for (const auto& key : order) {
    const auto& [sum, n] = sums.at(key);
    longform << key.first << ',' << key.second << ',' << format_number(sum / static_cast<double>(n)) << '\n';
  }
  std::istringstream pivot(longform.str());
  return stats::read_long_table(pivot, "subject", "interface", "value");
}

int main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Pedestrian crossing simulator with eHMI interfaces"};
  app.require_subcommand(1);

  RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "Run headless sessions for interfaces x seeds");
  run_cmd->add_option("--config", run.config, "JSON config file (default: $CROSSWALK_SIM_CONFIG)");
  run_cmd->add_option("--interface", run.interfaces, "Interface letter or name; repeatable")
      ->check([](const std::string& s) {
        try {
          ehmi::interface_from_string(s);
          return std::string{};
        } catch (const ConfigError& ex) {
          return std::string(ex.what());
        }
      });
  run_cmd->add_flag("--all-interfaces", run.all_interfaces, "All six interfaces");
  run_cmd->add_option("--seed,--seeds", run.seeds, "Seed, range a..b or list a,b,c");
  run_cmd->add_option("--policy", run.policy, "wait-full-stop, gap-acceptance or interface-reactive");
  run_cmd->add_option("--out", run.out, "Output directory");
  run_cmd->add_option("--jobs,-j", run.jobs, "Sessions run in parallel")->check(CLI::PositiveNumber);
  run_cmd->add_option("--faulty-rate", run.faulty_rate, "Share of non-yielding vehicles");
  run_cmd->add_option("--queue-cap", run.queue_cap, "Maximum queue length");
  run_cmd->add_option("--max-duration", run.max_duration, "Simulated seconds before giving up");

  AnalyzeArgs an;
  auto* an_cmd = app.add_subcommand("analyze", "Statistics over metrics or questionnaire tables");
  an_cmd->add_option("test", an.test, "friedman, mann-whitney, spearman, cronbach, rpss or describe")
      ->required()
      ->check(CLI::IsMember({"friedman", "mann-whitney", "spearman", "cronbach", "rpss", "describe"}));
  an_cmd->add_option("--input,-i", an.input, "CSV input")->required();
  an_cmd->add_option("--metric", an.metric, "Read a metrics CSV and use this column (DT, CT, DAC, SAC)");
  an_cmd->add_option("--subject-col", an.subject_col);
  an_cmd->add_option("--condition-col", an.condition_col);
  an_cmd->add_option("--value-col", an.value_col);
  an_cmd->add_option("--a", an.a, "First condition (mann-whitney, spearman)");
  an_cmd->add_option("--b", an.b, "Second condition (mann-whitney, spearman)");
  an_cmd->add_option("--majority", an.majority, "Votes needed to elect (rpss)");
  an_cmd->add_option("--format", an.format)->check(CLI::IsMember({"json", "csv"}));
  an_cmd->add_option("--output,-o", an.output, "Write here instead of stdout");

  ReplayArgs rp;
  auto* rp_cmd = app.add_subcommand("replay", "Re-run a recorded command trace");
  rp_cmd->add_option("--config", rp.config, "Config the trace was recorded with");
  rp_cmd->add_option("--trace", rp.trace, "Command trace (JSON Lines)")->required();
  rp_cmd->add_option("--log", rp.log, "Recorded event log to compare against");
  rp_cmd->add_option("--out", rp.out, "Write the replayed event log here");

#ifdef XWALK_WITH_SERVER
  ServeArgs sv;
  auto* sv_cmd = app.add_subcommand("serve", "Serve interactive sessions over WebSocket");
  sv_cmd->add_option("--config", sv.config, "Base config for new sessions");
  sv_cmd->add_option("--address", sv.address);
  sv_cmd->add_option("--port", sv.port, "0 picks a free port")->check(CLI::Range(0u, 65535u));
  sv_cmd->add_option("--snapshot-hz", sv.snapshot_hz);
  sv_cmd->add_option("--keepalive-hz", sv.keepalive_hz);
  sv_cmd->add_flag("--reveal-yielding", sv.reveal_yielding, "Expose which vehicles yield");
  sv_cmd->add_option("--log-dir", sv.log_dir, "Persist session logs here");
  sv_cmd->add_option("--max-sessions", sv.max_sessions);
#endif

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& ex) {
    err << ex.what() << '\n';
    return kExitUsage;
  }

  try {
    if (run_cmd->parsed()) return cmd_run(run, out, err);
    if (an_cmd->parsed()) {
      const std::string text = analyze(an);
      if (an.output.empty()) {
        out << text;
      } else {
        write_file(an.output, text);
      }
      return kExitOk;
    }
    if (rp_cmd->parsed()) return cmd_replay(rp, out, err);
#ifdef XWALK_WITH_SERVER
    if (sv_cmd->parsed()) return cmd_serve(sv, out, err);
#endif
  } catch (const ConfigError& ex) {
    err << "config error: " << ex.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& ex) {
    err << "error: " << ex.what() << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace xwalk::cli
