#include "xwalk/server/ws_server.hpp"

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>
#include <chrono>
#include <csignal>
#include <deque>
#include <iostream>

#include "xwalk/errors.hpp"

namespace xwalk::server {

namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
namespace net = boost::asio;
using tcp = net::ip::tcp;
using nlohmann::ordered_json;

namespace {

struct Shared {
  ServerOptions options;
  SessionRegistry registry;
  explicit Shared(ServerOptions o) : options(std::move(o)), registry(options.max_sessions) {}
};

class WsConnection : public std::enable_shared_from_this<WsConnection> {
 public:
  WsConnection(tcp::socket&& socket, Shared& shared)
      : ws_(std::move(socket)), timer_(ws_.get_executor()), shared_(shared) {}

  void start(http::request<http::string_body> req) {
    ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
    ws_.async_accept(req, beast::bind_front_handler(&WsConnection::on_accept, shared_from_this()));
  }

 private:
  websocket::stream<beast::tcp_stream> ws_;
  net::steady_timer timer_;
  Shared& shared_;
  std::unique_ptr<InteractiveSession> session_;
  beast::flat_buffer buffer_;
  std::deque<std::string> outbox_;
  bool writing_ = false;
  bool finished_ = false;
  std::chrono::steady_clock::time_point next_tick_;

  void on_accept(beast::error_code ec) {
    if (ec) return;
    send(encode("hello", ordered_json{{"protocol", kProtocolVersion}}));
    do_read();
  }

  void do_read() {
    ws_.async_read(buffer_, beast::bind_front_handler(&WsConnection::on_read, shared_from_this()));
  }

  void on_read(beast::error_code ec, std::size_t) {
    if (ec) {
      finish();
      return;
    }
    const std::string text = beast::buffers_to_string(buffer_.data());
    buffer_.consume(buffer_.size());
    handle(text);
    if (!finished_) do_read();
  }

  void handle(const std::string& text) {
    try {
      const ClientMessage msg = parse_client_message(text);
      switch (msg.kind) {
        case ClientMessage::Kind::Open:
          open(msg.config);
          break;
        case ClientMessage::Kind::Command:
          if (!session_) throw SessionClosed("no open session");
          session_->submit(msg.command);
          send(encode("ack", ordered_json{{"kind", to_string(msg.command.type)}}));
          break;
        case ClientMessage::Kind::Close:
          if (!session_) throw SessionClosed("no open session");
          close_session();
          break;
      }
    } catch (const std::exception& ex) {
      send(encode("error", ordered_json{{"message", ex.what()}}));
    }
  }

  void open(const nlohmann::json& overrides) {
    if (session_) throw ProtocolError("a session is already open on this connection");
    nlohmann::json merged = nlohmann::json::parse(to_json(shared_.options.base_config).dump());
    merged.merge_patch(overrides);
    const SessionConfig config = config_from_json(merged);
    const std::string id = shared_.registry.open();
    try {
      session_ = std::make_unique<InteractiveSession>(id, config, shared_.options.session);
    } catch (...) {
      shared_.registry.close(id);
      throw;
    }
    send(encode("opened", ordered_json{{"session_id", id},
                                       {"interface", std::string(1, ehmi::letter(config.interface))},
                                       {"timestep", config.timestep},
                                       {"snapshot_hz", shared_.options.session.snapshot_hz}}));
    next_tick_ = std::chrono::steady_clock::now();
    schedule_tick();
  }

  void close_session() {
    if (!session_) return;
    const std::string id = session_->id();
    session_->close();
    shared_.registry.close(id);
    session_.reset();
    timer_.cancel();
    send(encode("closed", ordered_json{{"session_id", id}}));
  }

  void schedule_tick() {
    const auto period = std::chrono::duration_cast<std::chrono::steady_clock::duration>(
        std::chrono::duration<double>(session_->config().timestep));
    next_tick_ += period;
    timer_.expires_at(next_tick_);
    timer_.async_wait(beast::bind_front_handler(&WsConnection::on_tick, shared_from_this()));
  }

  void on_tick(beast::error_code ec) {
    if (ec || !session_ || finished_) return;
    try {
      if (auto snap = session_->tick()) send(std::move(*snap));
    } catch (const std::exception& ex) {
      send(encode("error", ordered_json{{"message", ex.what()}}));
    }
    schedule_tick();
  }

  void send(std::string message) {
    if (finished_) return;
    outbox_.push_back(std::move(message));
    if (!writing_) do_write();
  }

  void do_write() {
    writing_ = true;
    ws_.text(true);
    ws_.async_write(net::buffer(outbox_.front()),
                    beast::bind_front_handler(&WsConnection::on_write, shared_from_this()));
  }

  void on_write(beast::error_code ec, std::size_t) {
    outbox_.pop_front();
    if (ec) {
      finish();
      return;
    }
    if (outbox_.empty()) {
      writing_ = false;
    } else {
      do_write();
    }
  }

  void finish() {
    if (finished_) return;
    finished_ = true;
    timer_.cancel();
    if (session_) {
      const std::string id = session_->id();
      session_->close();
      shared_.registry.close(id);
      session_.reset();
    }
  }
};

class HttpConnection : public std::enable_shared_from_this<HttpConnection> {
 public:
  HttpConnection(tcp::socket&& socket, Shared& shared) : stream_(std::move(socket)), shared_(shared) {}

  void start() {
    stream_.expires_after(std::chrono::seconds(30));
    http::async_read(stream_, buffer_, req_, beast::bind_front_handler(&HttpConnection::on_read, shared_from_this()));
  }

 private:
  beast::tcp_stream stream_;
  Shared& shared_;
  beast::flat_buffer buffer_;
  http::request<http::string_body> req_;
  std::shared_ptr<http::response<http::string_body>> res_;

  void on_read(beast::error_code ec, std::size_t) {
    if (ec) return;
    const std::string target(req_.target());
    const std::string path = target.substr(0, target.find('?'));
    if (websocket::is_upgrade(req_)) {
      if (path == "/session") {
        stream_.expires_never();
        std::make_shared<WsConnection>(stream_.release_socket(), shared_)->start(std::move(req_));
        return;
      }
      respond(http::status::not_found, "unknown endpoint\n");
      return;
    }
    if (path == "/healthz" && req_.method() == http::verb::get) {
      respond(http::status::ok, "ok\n");
      return;
    }
    respond(http::status::not_found, "unknown endpoint\n");
  }

  void respond(http::status status, std::string body) {
    res_ = std::make_shared<http::response<http::string_body>>(status, req_.version());
    res_->set(http::field::content_type, "text/plain");
    res_->keep_alive(false);
    res_->body() = std::move(body);
    res_->prepare_payload();
    http::async_write(stream_, *res_, [self = shared_from_this()](beast::error_code, std::size_t) {
      beast::error_code ignored;
      self->stream_.socket().shutdown(tcp::socket::shutdown_send, ignored);
    });
  }
};

}  // namespace

struct Server::Impl {
  net::io_context ioc{1};
  tcp::acceptor acceptor{ioc};
  Shared shared;
  std::thread thread;
  bool running = false;

  explicit Impl(ServerOptions options) : shared(std::move(options)) {}

  void do_accept() {
    acceptor.async_accept(net::make_strand(ioc), [this](beast::error_code ec, tcp::socket socket) {
      if (ec) return;
      std::make_shared<HttpConnection>(std::move(socket), shared)->start();
      do_accept();
    });
  }
};

Server::Server(ServerOptions options) : impl_(std::make_unique<Impl>(std::move(options))) {}

Server::~Server() { stop(); }

unsigned short Server::start() {
  if (impl_->running) return port_;
  const auto& o = impl_->shared.options;
  beast::error_code ec;
  const auto address = net::ip::make_address(o.address, ec);
  if (ec) throw std::runtime_error("bad listen address '" + o.address + "'");
  const tcp::endpoint endpoint(address, o.port);
  auto& acceptor = impl_->acceptor;
  acceptor.open(endpoint.protocol(), ec);
  if (!ec) acceptor.set_option(net::socket_base::reuse_address(true), ec);
  if (!ec) acceptor.bind(endpoint, ec);
  if (!ec) acceptor.listen(net::socket_base::max_listen_connections, ec);
  if (ec) {
    beast::error_code ignored;
    acceptor.close(ignored);
    throw std::runtime_error("cannot listen on " + o.address + ":" + std::to_string(o.port) + ": " + ec.message());
  }
  port_ = acceptor.local_endpoint().port();
  impl_->do_accept();
  impl_->running = true;
  impl_->thread = std::thread([this] { impl_->ioc.run(); });
  return port_;
}

void Server::stop() {
  if (!impl_ || !impl_->running) return;
  impl_->ioc.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
  impl_->running = false;
}

void Server::wait_for_signal() {
  net::io_context signals_ctx;
  net::signal_set signals(signals_ctx, SIGINT, SIGTERM);
  signals.async_wait([](beast::error_code, int) {});
  signals_ctx.run();
  stop();
}

}  // namespace xwalk::server
