#include "xwalk/server/interactive_session.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "xwalk/errors.hpp"

namespace xwalk::server {

using nlohmann::ordered_json;

InteractiveSession::InteractiveSession(std::string id, SessionConfig config, SessionOptions options)
    : id_(std::move(id)), config_(std::move(config)), options_(std::move(options)) {
  config_.policy.kind = pedestrian::PolicyKind::External;
  if (!(options_.snapshot_hz > 0.0) || !(options_.keepalive_hz > 0.0)) {
    throw ConfigError("snapshot and keepalive rates must be positive");
  }
  session_ = std::make_unique<core::Session>(config_);
}

void InteractiveSession::submit(const ClientCommand& command) {
  if (closed_) throw SessionClosed("session " + id_ + " is closed");
  pending_.push_back(command);
}

std::uint64_t InteractiveSession::period_ticks(double hz) const {
  const double ticks = 1.0 / (hz * config_.timestep);
  return std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::llround(ticks)));
}

void InteractiveSession::restart(const SessionConfig& config) {
  persist();
  config_ = config;
  session_ = std::make_unique<core::Session>(config_);
  ++run_index_;
  running_ = false;
  move_intent_ = 0.0;
  recent_.clear();
  snapshot_sent_ = false;
}

std::optional<std::string> InteractiveSession::tick() {
  if (closed_) throw SessionClosed("session " + id_ + " is closed");
  ++ticks_;
  const double walk = config_.pedestrian.walk_speed;
  for (const ClientCommand& cmd : pending_) {
    switch (cmd.type) {
      case CommandType::Move:
        move_intent_ = std::isfinite(cmd.dy) ? std::clamp(cmd.dy, -walk, walk) : 0.0;
        break;
      case CommandType::SetGaze:
        gaze_ = cmd.on;
        break;
      case CommandType::Start:
        running_ = true;
        break;
      case CommandType::Pause:
        running_ = false;
        break;
      case CommandType::Reset:
        restart(config_);
        break;
      case CommandType::SelectInterface: {
        SessionConfig next = config_;
        next.interface = cmd.interface;
        restart(next);
        break;
      }
    }
  }
  pending_.clear();

  bool due = !snapshot_sent_;
  if (running_ && !session_->terminated()) {
    pedestrian::PedestrianCommand step_cmd;
    step_cmd.kind = pedestrian::CommandKind::Move;
    step_cmd.gaze = gaze_;
    step_cmd.dy = move_intent_ * config_.timestep;
    const auto events = session_->advance(step_cmd);
    recent_.insert(recent_.end(), events.begin(), events.end());
    if (recent_.size() > options_.recent_events) {
      recent_.erase(recent_.begin(), recent_.end() - static_cast<std::ptrdiff_t>(options_.recent_events));
    }
    const auto step = static_cast<std::uint64_t>(session_->world().step_index);
    if (step % period_ticks(options_.snapshot_hz) == 0) due = true;
    if (session_->terminated()) {
      due = true;
      persist();
    }
  } else if (ticks_ - last_snapshot_tick_ >= period_ticks(options_.keepalive_hz)) {
    due = true;
  }
  if (!due) return std::nullopt;
  last_snapshot_tick_ = ticks_;
  snapshot_sent_ = true;
  auto out = encode("snapshot", snapshot());
  recent_.clear();
  return out;
}

ordered_json InteractiveSession::snapshot() const {
  const core::WorldState& w = session_->world();
  ordered_json p;
  p["t"] = w.t();
  p["step"] = w.step_index;
  p["running"] = running_;
  p["terminated"] = session_->terminated();
  ordered_json vehicles = ordered_json::array();
  for (const auto& v : w.vehicles) {
    ordered_json jv;
    jv["id"] = v.id;
    jv["x"] = v.x;
    jv["v"] = v.v;
    jv["mode"] = vehicle::to_string(v.mode);
    auto it = w.displays.find(v.id);
    const ehmi::DisplayState display =
        it != w.displays.end() ? it->second : ehmi::vehicle_display(w.interface, ehmi::context_of(v, w.t()));
    jv["display"] = ehmi::to_json(display);
    if (options_.reveal_yielding) jv["yielding"] = v.yielding;
    vehicles.push_back(jv);
  }
  p["vehicles"] = vehicles;
  p["road_display"] = w.road_display ? ehmi::to_json(*w.road_display) : ordered_json(nullptr);
  p["pedestrian"] = ordered_json{{"x", w.pedestrian.x},
                                 {"y", w.pedestrian.y},
                                 {"zone", pedestrian::to_string(w.pedestrian.zone)},
                                 {"gaze", w.pedestrian.gaze}};
  const auto& progress = session_->progress();
  ordered_json events = ordered_json::array();
  for (const auto& e : recent_) {
    if (e.kind == core::EventKind::DisplayChanged) continue;
    auto je = core::to_json(e);
    if (!options_.reveal_yielding && e.kind == core::EventKind::Spawned) je["payload"].erase("yielding");
    if (!options_.reveal_yielding && e.kind == core::EventKind::PedestrianEnteredRoad &&
        je["payload"]["vehicle"].is_object()) {
      je["payload"]["vehicle"].erase("yielding");
    }
    events.push_back(je);
  }
  p["session"] = ordered_json{{"id", id_},
                              {"interface", std::string(1, ehmi::letter(config_.interface))},
                              {"progress",
                               {{"vehicles_generated", progress.vehicles_generated},
                                {"valid", progress.valid_crossings_total},
                                {"valid_by_class",
                                 {{"45", progress.valid_crossings_by_class[0]},
                                  {"60", progress.valid_crossings_by_class[1]},
                                  {"100", progress.valid_crossings_by_class[2]}}}}},
                              {"last_events", events}};
  return p;
}

void InteractiveSession::close() {
  if (closed_) return;
  persist();
  closed_ = true;
}

void InteractiveSession::persist() const {
  if (options_.log_dir.empty() || session_->trace().empty()) return;
  namespace fs = std::filesystem;
  fs::create_directories(options_.log_dir);
  const std::string stem = (fs::path(options_.log_dir) / (id_ + "-" + std::to_string(run_index_))).string();
  {
    std::ofstream out(stem + ".events.jsonl");
    core::write_log(out, session_->log());
  }
  {
    std::ofstream out(stem + ".trace.jsonl");
    core::write_trace(out, session_->trace());
  }
  save_config(stem + ".config.json", config_);
}

std::string SessionRegistry::open() {
  std::lock_guard lock(mutex_);
  if (open_.size() >= capacity_) throw CapacityExceeded("session capacity reached");
  std::string id = "s" + std::to_string(next_++);
  open_[id] = true;
  return id;
}

void SessionRegistry::close(const std::string& id) {
  std::lock_guard lock(mutex_);
  open_.erase(id);
}

std::size_t SessionRegistry::size() const {
  std::lock_guard lock(mutex_);
  return open_.size();
}

}  // namespace xwalk::server
