#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "xwalk/config.hpp"
#include "xwalk/server/protocol.hpp"
#include "xwalk/world.hpp"

namespace xwalk::server {

struct SessionOptions {
  double snapshot_hz = 20.0;
  double keepalive_hz = 1.0;
  bool reveal_yielding = false;
  std::string log_dir;  // empty: nothing persisted
  std::size_t recent_events = 32;
};

/// One human-driven session. Not thread safe; the owner serialises calls.
class InteractiveSession {
 public:
  InteractiveSession(std::string id, SessionConfig config, SessionOptions options = {});

  const std::string& id() const { return id_; }

  /// Queues a command for the next tick. Throws SessionClosed after close().
  void submit(const ClientCommand& command);

  /// One engine period. Applies pending commands, steps the engine when running,
  /// and returns a snapshot message when one is due.
  std::optional<std::string> tick();

  nlohmann::ordered_json snapshot() const;
  void close();

  bool running() const { return running_; }
  bool closed() const { return closed_; }
  bool terminated() const { return session_->terminated(); }
  std::uint64_t ticks() const { return ticks_; }
  const core::Session& engine() const { return *session_; }
  const SessionConfig& config() const { return config_; }

  /// Writes <log_dir>/<id>-<n>.events.jsonl and .trace.jsonl for the current run.
  void persist() const;

 private:
  std::string id_;
  SessionConfig config_;
  SessionOptions options_;
  std::unique_ptr<core::Session> session_;
  std::vector<ClientCommand> pending_;
  double move_intent_ = 0.0;
  bool gaze_ = false;
  bool running_ = false;
  bool closed_ = false;
  int run_index_ = 0;
  std::uint64_t ticks_ = 0;
  std::uint64_t last_snapshot_tick_ = 0;
  bool snapshot_sent_ = false;
  std::vector<core::Event> recent_;

  void restart(const SessionConfig& config);
  std::uint64_t period_ticks(double hz) const;
};

/// Bookkeeping of open sessions with a capacity limit.
class SessionRegistry {
 public:
  explicit SessionRegistry(std::size_t capacity = 16) : capacity_(capacity) {}

  /// Throws CapacityExceeded when full.
  std::string open();
  void close(const std::string& id);
  std::size_t size() const;

 private:
  mutable std::mutex mutex_;
  std::size_t capacity_;
  std::uint64_t next_ = 1;
  std::map<std::string, bool> open_;
};

}  // namespace xwalk::server
