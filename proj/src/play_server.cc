// Copyright 2026 The Microdoom Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "microdoom/play_server.h"

#include <atomic>
#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>
#include <chrono>
#include <deque>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

#include "microdoom/error.h"

namespace microdoom {
namespace {

namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
namespace net = boost::asio;
using tcp = net::ip::tcp;

// Drop a client whose socket cannot keep up rather than buffer forever.
constexpr size_t kMaxQueuedMessages = 256;

struct SessionSlot {
  explicit SessionSlot(PlaySession s) : session(std::move(s)) {}
  PlaySession session;
  const void* owner = nullptr;
};

std::string NewSessionId() {
  static std::mt19937_64 rng{std::random_device{}()};
  std::ostringstream os;
  os << std::hex << rng();
  return os.str();
}

const char* MimeType(const std::filesystem::path& p) {
  const std::string ext = p.extension().string();
  if (ext == ".html" || ext == ".htm") return "text/html";
  if (ext == ".js" || ext == ".mjs") return "application/javascript";
  if (ext == ".css") return "text/css";
  if (ext == ".json") return "application/json";
  if (ext == ".svg") return "image/svg+xml";
  if (ext == ".png") return "image/png";
  if (ext == ".ico") return "image/x-icon";
  return "application/octet-stream";
}

}  // namespace

struct PlayServer::Impl {
  explicit Impl(ServerOptions o) : options(std::move(o)) {}

  ServerOptions options;
  mutable std::mutex mu;
  std::map<std::string, std::shared_ptr<SessionSlot>> sessions;
  // Declared after sessions so pending handlers die first.
  net::io_context ioc{1};
  tcp::acceptor acceptor{ioc};
  std::thread thread;
  std::atomic<bool> stopped{false};

  std::shared_ptr<SessionSlot> Lookup(const std::string& id, bool* resumed) {
    std::lock_guard<std::mutex> lock(mu);
    if (!id.empty()) {
      auto it = sessions.find(id);
      if (it != sessions.end()) {
        *resumed = true;
        return it->second;
      }
    }
    *resumed = false;
    std::string fresh = id.empty() ? NewSessionId() : id;
    while (sessions.count(fresh)) fresh = NewSessionId();
    auto slot = std::make_shared<SessionSlot>(PlaySession(fresh, options.session, options.model));
    sessions.emplace(fresh, slot);
    return slot;
  }

  void DoAccept();
};

namespace {

class WsConn : public std::enable_shared_from_this<WsConn> {
 public:
  WsConn(tcp::socket&& socket, PlayServer::Impl* srv)
      : ws_(std::move(socket)), timer_(ws_.get_executor()), srv_(srv) {}

  void Accept(http::request<http::string_body> req) {
    beast::get_lowest_layer(ws_).expires_never();
    ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
    ws_.async_accept(req, [self = shared_from_this()](beast::error_code ec) {
      if (!ec) self->Read();
    });
  }

 private:
  void Read() {
    ws_.async_read(buf_, [self = shared_from_this()](beast::error_code ec, size_t) {
      if (ec) {
        self->Close();
        return;
      }
      std::string text = beast::buffers_to_string(self->buf_.data());
      self->buf_.consume(self->buf_.size());
      self->OnMessage(text);
      if (!self->closed_) self->Read();
    });
  }

  void OnMessage(const std::string& text) {
    nlohmann::json msg = nlohmann::json::parse(text, nullptr, false);
    if (msg.is_discarded()) {
      SendError("message is not valid JSON");
      return;
    }
    const bool is_hello = msg.is_object() && msg.value("kind", "") == "hello";
    if (!slot_) {
      if (!is_hello) {
        SendError("expected hello first");
        return;
      }
      Attach(msg);
      return;
    }
    if (slot_->owner != this) {
      Close();
      return;
    }
    for (const auto& m : slot_->session.Handle(msg)) Send(m.dump());
  }

  void Attach(const nlohmann::json& msg) {
    if (msg.contains("version") && msg["version"] != kProtocolVersion) {
      SendError("unsupported protocol version, server speaks " + std::to_string(kProtocolVersion));
      return;
    }
    std::string id;
    if (msg.contains("session") && msg["session"].is_string()) id = msg["session"].get<std::string>();
    bool resumed = false;
    slot_ = srv_->Lookup(id, &resumed);
    // A newer connection takes the session over.
    slot_->owner = this;
    Send(slot_->session.HelloMessage(resumed).dump());
    Send(slot_->session.CurrentFrame().dump());
    ScheduleTick();
  }

  void ScheduleTick() {
    timer_.expires_after(std::chrono::milliseconds(srv_->options.tick_ms));
    timer_.async_wait([self = shared_from_this()](beast::error_code ec) {
      if (ec || self->closed_) return;
      if (self->slot_->owner != self.get()) {
        self->Close();
        return;
      }
      self->Send(self->slot_->session.Tick().dump());
      if (++self->ticks_ % std::max(1, self->srv_->options.stats_every) == 0) {
        self->Send(self->slot_->session.StatsMessage().dump());
      }
      self->ScheduleTick();
    });
  }

  void SendError(const std::string& message) {
    Send(nlohmann::json{{"kind", "error"}, {"severity", "error"}, {"message", message}}.dump());
  }

  void Send(std::string s) {
    if (closed_) return;
    if (out_.size() >= kMaxQueuedMessages) {
      Close();
      return;
    }
    out_.push_back(std::move(s));
    if (out_.size() == 1) DoWrite();
  }

  void DoWrite() {
    ws_.text(true);
    ws_.async_write(net::buffer(out_.front()), [self = shared_from_this()](beast::error_code ec, size_t) {
      if (ec) {
        self->Close();
        return;
      }
      self->out_.pop_front();
      if (!self->out_.empty()) self->DoWrite();
    });
  }

  void Close() {
    if (closed_) return;
    closed_ = true;
    timer_.cancel();
    if (slot_ && slot_->owner == this) slot_->owner = nullptr;
    beast::error_code ignored;
    beast::get_lowest_layer(ws_).socket().close(ignored);
  }

  websocket::stream<beast::tcp_stream> ws_;
  net::steady_timer timer_;
  PlayServer::Impl* srv_;
  beast::flat_buffer buf_;
  std::deque<std::string> out_;
  std::shared_ptr<SessionSlot> slot_;
  int64_t ticks_ = 0;
  bool closed_ = false;
};

class HttpConn : public std::enable_shared_from_this<HttpConn> {
 public:
  HttpConn(tcp::socket&& socket, PlayServer::Impl* srv) : stream_(std::move(socket)), srv_(srv) {}

  void Start() {
    stream_.expires_after(std::chrono::seconds(30));
    http::async_read(stream_, buf_, req_, [self = shared_from_this()](beast::error_code ec, size_t) {
      if (ec) return;
      if (websocket::is_upgrade(self->req_)) {
        std::make_shared<WsConn>(self->stream_.release_socket(), self->srv_)->Accept(std::move(self->req_));
        return;
      }
      self->Serve();
    });
  }

 private:
  void Serve() {
    auto res = std::make_shared<http::response<http::string_body>>();
    res->version(req_.version());
    res->keep_alive(false);
    res->set(http::field::server, "microdoom");
    std::string target(req_.target());
    if (auto q = target.find('?'); q != std::string::npos) target.resize(q);
    if (target.empty() || target.back() == '/') target += "index.html";
    const std::string& root = srv_->options.static_dir;
    std::filesystem::path file = std::filesystem::path(root) / target.substr(1);
    std::string body;
    bool found = false;
    if (req_.method() == http::verb::get && !root.empty() && target.find("..") == std::string::npos) {
      std::ifstream in(file, std::ios::binary);
      if (in) {
        body.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
        found = true;
      }
    }
    if (found) {
      res->result(http::status::ok);
      res->set(http::field::content_type, MimeType(file));
      res->body() = std::move(body);
    } else {
      res->result(http::status::not_found);
      res->set(http::field::content_type, "text/plain");
      res->body() = "not found\n";
    }
    res->prepare_payload();
    http::async_write(stream_, *res, [self = shared_from_this(), res](beast::error_code, size_t) {
      beast::error_code ignored;
      self->stream_.socket().shutdown(tcp::socket::shutdown_send, ignored);
    });
  }

  beast::tcp_stream stream_;
  PlayServer::Impl* srv_;
  beast::flat_buffer buf_;
  http::request<http::string_body> req_;
};

}  // namespace

void PlayServer::Impl::DoAccept() {
  acceptor.async_accept([this](beast::error_code ec, tcp::socket socket) {
    if (!ec) std::make_shared<HttpConn>(std::move(socket), this)->Start();
    if (acceptor.is_open()) DoAccept();
  });
}

PlayServer::PlayServer(ServerOptions options) : impl_(std::make_unique<Impl>(std::move(options))) {}

PlayServer::~PlayServer() { Stop(); }

void PlayServer::Start() {
  const auto& o = impl_->options;
  if (o.tick_ms < 1) Fail(ErrorKind::kInvalidArgument, "tick_ms must be positive");
  if (o.port < 0 || o.port > 65535) Fail(ErrorKind::kInvalidArgument, "bad port " + std::to_string(o.port));
  beast::error_code ec;
  const auto address = net::ip::make_address(o.host, ec);
  if (ec) Fail(ErrorKind::kInvalidArgument, "bad host '" + o.host + "'");
  const tcp::endpoint endpoint(address, static_cast<unsigned short>(o.port));
  auto& acc = impl_->acceptor;
  acc.open(endpoint.protocol(), ec);
  if (!ec) acc.set_option(net::socket_base::reuse_address(true), ec);
  if (!ec) acc.bind(endpoint, ec);
  if (ec == net::error::address_in_use) {
    acc.close();
    Fail(ErrorKind::kPortInUse, o.host + ":" + std::to_string(o.port) + " is already in use");
  }
  if (!ec) acc.listen(net::socket_base::max_listen_connections, ec);
  if (ec) {
    acc.close();
    Fail(ErrorKind::kIo, "cannot listen on " + o.host + ":" + std::to_string(o.port) + ": " + ec.message());
  }
  impl_->DoAccept();
}

int PlayServer::port() const {
  beast::error_code ec;
  auto ep = impl_->acceptor.local_endpoint(ec);
  return ec ? -1 : ep.port();
}

void PlayServer::Run(bool handle_signals) {
  std::unique_ptr<net::signal_set> signals;
  if (handle_signals) {
    signals = std::make_unique<net::signal_set>(impl_->ioc, SIGINT, SIGTERM);
    signals->async_wait([this](beast::error_code ec, int) {
      if (!ec) {
        beast::error_code ignored;
        impl_->acceptor.close(ignored);
        impl_->ioc.stop();
      }
    });
  }
  impl_->ioc.run();
}

void PlayServer::RunInBackground() {
  impl_->thread = std::thread([this] { impl_->ioc.run(); });
}

void PlayServer::Stop() {
  if (impl_->stopped.exchange(true)) return;
  net::post(impl_->ioc, [this] {
    beast::error_code ignored;
    impl_->acceptor.close(ignored);
    impl_->ioc.stop();
  });
  if (impl_->thread.joinable()) impl_->thread.join();
  impl_->ioc.stop();
}

size_t PlayServer::session_count() const {
  std::lock_guard<std::mutex> lock(impl_->mu);
  return impl_->sessions.size();
}

}  // namespace microdoom
