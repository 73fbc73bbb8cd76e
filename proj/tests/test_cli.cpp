#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "oracles/stats_oracle.hpp"
#include "xwalk/cli.hpp"
#include "xwalk/errors.hpp"
#include "xwalk/world.hpp"

namespace fs = std::filesystem;
using namespace xwalk;

namespace {

struct Outcome {
  int code;
  std::string out, err;
};

Outcome sim(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::main(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("xwalk_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::size_t lines(const std::string& text) { return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n')); }

}  // namespace

TEST_CASE("seed lists") {
  CHECK(cli::parse_seeds("7") == std::vector<std::uint64_t>{7});
  CHECK(cli::parse_seeds("1..4") == std::vector<std::uint64_t>{1, 2, 3, 4});
  CHECK(cli::parse_seeds("1,4,9") == std::vector<std::uint64_t>{1, 4, 9});
  for (const char* bad : {"", "x", "4..1", "1,,2", "1..", "-3"}) CHECK_THROWS_AS(cli::parse_seeds(bad), ConfigError);
}

TEST_CASE("run writes one set of files per session") {
  const auto dir = scratch("run");
  const auto r = sim({"run", "--interface", "E", "--seed", "7", "--out", dir.string()});
  REQUIRE(r.code == cli::kExitOk);
  for (const char* ext : {"events.jsonl", "trace.jsonl", "records.csv", "summary.json", "pattern.csv", "config.json"}) {
    CHECK(fs::exists(dir / (std::string("E-seed7.") + ext)));
  }
  const auto summary = nlohmann::json::parse(slurp(dir / "E-seed7.summary.json"));
  CHECK(summary["interface"] == "E");
  CHECK(summary["valid"].get<int>() >= 15);
  CHECK(summary["terminated"] == true);

  const auto log = core::parse_log(slurp(dir / "E-seed7.events.jsonl"));
  auto config = load_config((dir / "E-seed7.config.json").string());
  std::ifstream trace_in(dir / "E-seed7.trace.jsonl");
  CHECK(core::serialize_log(core::replay(config, core::read_trace(trace_in))) == core::serialize_log(log));

  const auto replayed = sim({"replay", "--config", (dir / "E-seed7.config.json").string(), "--trace",
                             (dir / "E-seed7.trace.jsonl").string(), "--log", (dir / "E-seed7.events.jsonl").string(),
                             "--out", (dir / "replayed.jsonl").string()});
  CHECK(replayed.code == cli::kExitOk);
  CHECK(slurp(dir / "replayed.jsonl") == slurp(dir / "E-seed7.events.jsonl"));
}

TEST_CASE("replay reports the first divergent line") {
  const auto dir = scratch("diverge");
  REQUIRE(sim({"run", "--interface", "S", "--seed", "2", "--out", dir.string()}).code == 0);
  auto text = slurp(dir / "S-seed2.events.jsonl");
  std::istringstream in(text);
  std::string line, edited;
  for (int i = 0; std::getline(in, line); ++i) edited += (i == 3 ? line + " " : line) + "\n";
  std::ofstream(dir / "edited.jsonl") << edited;
  const auto r = sim({"replay", "--config", (dir / "S-seed2.config.json").string(), "--trace",
                      (dir / "S-seed2.trace.jsonl").string(), "--log", (dir / "edited.jsonl").string()});
  CHECK(r.code == cli::kExitFailure);
  CHECK((r.out + r.err).find("line 4") != std::string::npos);
}

TEST_CASE("every interface over ten seeds") {
  const auto dir = scratch("sweep");
  const auto r = sim({"run", "--all-interfaces", "--seeds", "1..10", "--policy", "gap-acceptance", "--jobs", "2",
                      "--out", dir.string()});
  REQUIRE(r.code == cli::kExitOk);
  const auto sessions = nlohmann::json::parse(slurp(dir / "sessions.json"));
  CHECK(sessions.size() == 60);
  std::size_t summaries = 0;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.path().string().ends_with(".summary.json")) ++summaries;
  }
  CHECK(summaries == 60);
  std::size_t record_lines = 0;
  for (const auto& s : sessions) record_lines += s["records"].get<std::size_t>();
  CHECK(lines(slurp(dir / "records.csv")) == record_lines + 1);

  // analyze friedman on the DT table against the counting-rank oracle
  std::ifstream csv(dir / "records.csv");
  const auto table = cli::metrics_table(csv, "DT");
  CHECK(table.rows() == 10);
  CHECK(table.cols() == 6);
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < table.rows(); ++i) rows.emplace_back(table.row(i).begin(), table.row(i).end());
  const auto expected = oracle::friedman(rows);
  const auto a = sim({"analyze", "friedman", "--input", (dir / "records.csv").string(), "--metric", "DT"});
  REQUIRE(a.code == cli::kExitOk);
  const auto j = nlohmann::json::parse(a.out);
  CHECK(j["statistic"].get<double>() == doctest::Approx(expected.stat).epsilon(1e-9));
  CHECK(j["p"].get<double>() == doctest::Approx(expected.p).epsilon(1e-9));
  CHECK(j["labels"].size() == 6);
  const auto conover = oracle::conover(rows);
  for (std::size_t x = 0; x < 6; ++x) {
    for (std::size_t y = 0; y < 6; ++y) {
      CHECK(j["pairwise"]["p"][x][y].get<double>() == doctest::Approx(conover[x][y]).epsilon(1e-9));
    }
  }

  const auto d = sim({"analyze", "describe", "-i", (dir / "records.csv").string(), "--metric", "SAC"});
  REQUIRE(d.code == cli::kExitOk);
  const auto dj = nlohmann::json::parse(d.out);
  REQUIRE(dj["conditions"].size() == 6);
  for (std::size_t c = 0; c < 6; ++c) {
    double sum = 0.0;
    std::ifstream again(dir / "records.csv");
    const auto sac = cli::metrics_table(again, "SAC");
    for (std::size_t i = 0; i < sac.rows(); ++i) sum += sac.at(i, c);
    CHECK(dj["conditions"][c]["mean"].get<double>() == doctest::Approx(sum / 10.0).epsilon(1e-12));
  }
}

TEST_CASE("analyze on long tables and ballots") {
  const auto dir = scratch("analyze");
  std::ofstream(dir / "empty.csv") << "";
  auto r = sim({"analyze", "friedman", "-i", (dir / "empty.csv").string()});
  CHECK(r.code != cli::kExitOk);
  CHECK_FALSE(r.err.empty());

  std::ofstream(dir / "long.csv") << "subject,interface,value\n"
                                     "p1,A,7\np1,B,9.9\np1,C,8.5\n"
                                     "p2,A,3.2\np2,B,4.8\np2,C,4.9\n"
                                     "p3,A,6.1\np3,B,7.7\np3,C,6.9\n"
                                     "p4,A,2.5\np4,B,2.9\np4,C,3.1\n";
  r = sim({"analyze", "cronbach", "-i", (dir / "long.csv").string()});
  REQUIRE(r.code == cli::kExitOk);
  const std::vector<std::vector<double>> items = {{7, 9.9, 8.5}, {3.2, 4.8, 4.9}, {6.1, 7.7, 6.9}, {2.5, 2.9, 3.1}};
  CHECK(nlohmann::json::parse(r.out)["alpha"].get<double>() == doctest::Approx(oracle::cronbach(items)).epsilon(1e-12));

  r = sim({"analyze", "friedman", "-i", (dir / "long.csv").string(), "--format", "csv"});
  REQUIRE(r.code == cli::kExitOk);
  CHECK(r.out.starts_with("p,A,B,C\n"));
  CHECK(lines(r.out) == 4);

  std::ofstream(dir / "ballots.txt") << "# one ranking per line\nA,B,C\nA,B,C\nB,A,C\nB,C,A\nC,B,A\n";
  r = sim({"analyze", "rpss", "-i", (dir / "ballots.txt").string()});
  REQUIRE(r.code == cli::kExitOk);
  CHECK(nlohmann::json::parse(r.out)["ranking"][0]["label"] == "B");

  CHECK(sim({"analyze", "wilcoxon", "-i", (dir / "long.csv").string()}).code == cli::kExitUsage);
}

TEST_CASE("usage errors") {
  CHECK(sim({}).code == cli::kExitUsage);
  CHECK(sim({"run", "--interface", "Z"}).code == cli::kExitUsage);
  CHECK(sim({"run", "--seed", "a..b"}).code == cli::kExitUsage);
  CHECK(sim({"run", "--policy", "moonwalk"}).code == cli::kExitUsage);
  CHECK(sim({"frobnicate"}).code == cli::kExitUsage);
  CHECK(sim({"replay"}).code == cli::kExitUsage);
  CHECK(sim({"--help"}).code == cli::kExitOk);
  const auto missing = sim({"run", "--config", "/nonexistent/config.json"});
  CHECK(missing.code == cli::kExitUsage);
  CHECK(missing.err.find("config") != std::string::npos);
}

TEST_CASE("config from the environment") {
  const auto dir = scratch("env");
  SessionConfig config;
  config.scenario.faulty_rate = 0.0;
  config.max_duration = 20.0;
  save_config((dir / "env.json").string(), config);
  ::setenv("CROSSWALK_SIM_CONFIG", (dir / "env.json").c_str(), 1);
  const auto r = sim({"run", "--interface", "B", "--seed", "3", "--out", (dir / "out").string()});
  ::unsetenv("CROSSWALK_SIM_CONFIG");
  CHECK(r.code == cli::kExitFailure);  // 20 s is not enough to finish
  const auto written = load_config((dir / "out" / "B-seed3.config.json").string());
  CHECK(written.max_duration == 20.0);
  CHECK(written.scenario.faulty_rate == 0.0);
  save_config((dir / "again.json").string(), written);
  CHECK(to_json(load_config((dir / "again.json").string())).dump() == to_json(written).dump());
}

TEST_CASE("the installed binary") {
  const auto dir = scratch("binary");
  const std::string cmd = std::string(XWALK_SIM_BINARY) + " run --interface M --seed 5 --out " + dir.string() +
                          " > " + (dir / "stdout.txt").string() + " 2>&1";
  CHECK(std::system(cmd.c_str()) == 0);
  CHECK(slurp(dir / "stdout.txt").find("M-seed5") != std::string::npos);
  CHECK(std::system((std::string(XWALK_SIM_BINARY) + " run --interface X > /dev/null 2>&1").c_str()) != 0);
}
