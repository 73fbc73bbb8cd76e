#pragma once

#include <atomic>
#include <memory>
#include <string>
#include <thread>

#include "xwalk/config.hpp"
#include "xwalk/server/interactive_session.hpp"

namespace xwalk::server {

struct ServerOptions {
  std::string address = "127.0.0.1";
  unsigned short port = kDefaultPort;  // 0 picks a free port
  std::size_t max_sessions = 16;
  SessionConfig base_config{};
  SessionOptions session{};
};

/// WebSocket endpoint at /session and plain-text liveness at /healthz.
class Server {
 public:
  explicit Server(ServerOptions options);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  /// Binds and starts serving on a background thread. Returns the bound port.
  /// Throws std::runtime_error when the address cannot be bound.
  unsigned short start();
  void stop();
  /// Blocks until stop() is called or SIGINT/SIGTERM arrives.
  void wait_for_signal();

  unsigned short port() const { return port_; }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  unsigned short port_ = 0;
};

}  // namespace xwalk::server
