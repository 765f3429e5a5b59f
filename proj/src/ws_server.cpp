#include "pedsim/ws_server.hpp"

#include <atomic>
#include <chrono>
#include <deque>
#include <fstream>
#include <iostream>
#include <sstream>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

namespace pedsim {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;
using nlohmann::json;

namespace {

std::string_view mime_type(const std::filesystem::path &p)
{
  const auto ext = p.extension().string();
  if (ext == ".html" || ext == ".htm") return "text/html";
  if (ext == ".js" || ext == ".mjs") return "application/javascript";
  if (ext == ".css") return "text/css";
  if (ext == ".json") return "application/json";
  if (ext == ".svg") return "image/svg+xml";
  if (ext == ".png") return "image/png";
  if (ext == ".ico") return "image/x-icon";
  return "application/octet-stream";
}

class WsConnection : public std::enable_shared_from_this<WsConnection>
{
public:
  WsConnection(tcp::socket socket, const ExperimentConfig &cfg, std::string id)
      : ws_(std::move(socket)), timer_(ws_.get_executor()), session_(cfg, cfg.serve.controller, std::move(id))
  {
  }

  void start(http::request<http::string_body> req)
  {
    ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
    ws_.async_accept(req, [self = shared_from_this()](beast::error_code ec) {
      if (!ec) {
        self->read();
      }
    });
  }

private:
  void read()
  {
    ws_.async_read(buffer_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) {
        self->closed_ = true;
        self->timer_.cancel();
        return;
      }
      const std::string text = beast::buffers_to_string(self->buffer_.data());
      self->buffer_.consume(self->buffer_.size());
      self->on_message(text);
      self->read();
    });
  }

  void on_message(const std::string &text)
  {
    const bool was_joined = session_.joined();
    for (auto &m : session_.handle_text(text)) {
      send(m.dump());
    }
    if (session_.joined() && session_.clock() == ClockMode::Wall && (!was_joined || !ticking_)) {
      start_ticking();
    }
  }

  void start_ticking()
  {
    ticking_ = true;
    period_ = std::chrono::duration_cast<std::chrono::steady_clock::duration>(
        std::chrono::duration<double>(1.0 / session_.config().serve.tick_rate));
    timer_.expires_after(period_);
    schedule();
  }

  void schedule()
  {
    timer_.async_wait([self = shared_from_this()](beast::error_code ec) {
      if (ec || self->closed_) {
        return;
      }
      if (self->session_.clock() != ClockMode::Wall) {
        self->ticking_ = false;
        return;
      }
      for (auto &m : self->session_.tick()) {
        self->send(m.dump());
      }
      // Keep the timer running so a reset restarts the clock without a new join.
      self->timer_.expires_at(self->timer_.expiry() + self->period_);
      self->schedule();
    });
  }

  void send(std::string text)
  {
    queue_.push_back(std::move(text));
    if (queue_.size() == 1) {
      write();
    }
  }

  void write()
  {
    ws_.text(true);
    ws_.async_write(asio::buffer(queue_.front()), [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) {
        self->closed_ = true;
        self->timer_.cancel();
        return;
      }
      self->queue_.pop_front();
      if (!self->queue_.empty()) {
        self->write();
      }
    });
  }

  websocket::stream<beast::tcp_stream> ws_;
  beast::flat_buffer buffer_;
  asio::steady_timer timer_;
  std::chrono::steady_clock::duration period_{};
  Session session_;
  std::deque<std::string> queue_;
  bool ticking_{false};
  bool closed_{false};
};

class HttpConnection : public std::enable_shared_from_this<HttpConnection>
{
public:
  HttpConnection(tcp::socket socket, const ServerOptions &opt, std::atomic<std::uint64_t> &counter)
      : stream_(std::move(socket)), opt_(opt), counter_(counter)
  {
  }

  void start() { read(); }

private:
  void read()
  {
    req_ = {};
    stream_.expires_after(std::chrono::seconds(30));
    http::async_read(stream_, buffer_, req_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) {
        return;
      }
      self->on_request();
    });
  }

  void on_request()
  {
    if (websocket::is_upgrade(req_)) {
      if (req_.target() != "/ws") {
        respond(http::status::not_found, "text/plain", "websocket endpoint is /ws\n");
        return;
      }
      stream_.expires_never();
      auto conn = std::make_shared<WsConnection>(stream_.release_socket(), opt_.config,
                                                 "s" + std::to_string(++counter_));
      conn->start(std::move(req_));
      return;
    }
    if (req_.method() != http::verb::get && req_.method() != http::verb::head) {
      respond(http::status::method_not_allowed, "text/plain", "only GET and HEAD\n");
      return;
    }
    std::string target(req_.target());
    if (auto q = target.find('?'); q != std::string::npos) {
      target.resize(q);
    }
    if (target.empty() || target.front() != '/' || target.find("..") != std::string::npos) {
      respond(http::status::bad_request, "text/plain", "bad path\n");
      return;
    }
    if (target.back() == '/') {
      target += "index.html";
    }
    const auto path = opt_.static_dir / target.substr(1);
    std::ifstream is(path, std::ios::binary);
    if (opt_.static_dir.empty() || !is) {
      respond(http::status::not_found, "text/plain", "not found\n");
      return;
    }
    std::ostringstream body;
    body << is.rdbuf();
    respond(http::status::ok, mime_type(path), body.str());
  }

  void respond(http::status status, std::string_view type, std::string body)
  {
    auto res = std::make_shared<http::response<http::string_body>>(status, req_.version());
    res->set(http::field::server, "pedsim");
    res->set(http::field::content_type, std::string(type));
    res->keep_alive(req_.keep_alive());
    if (req_.method() != http::verb::head) {
      res->body() = std::move(body);
    }
    res->prepare_payload();
    http::async_write(stream_, *res, [self = shared_from_this(), res](beast::error_code ec, std::size_t) {
      if (ec) {
        return;
      }
      if (res->keep_alive()) {
        self->read();
      } else {
        beast::error_code ignored;
        self->stream_.socket().shutdown(tcp::socket::shutdown_send, ignored);
      }
    });
  }

  beast::tcp_stream stream_;
  beast::flat_buffer buffer_;
  http::request<http::string_body> req_;
  const ServerOptions &opt_;
  std::atomic<std::uint64_t> &counter_;
};

}  // namespace

struct WsServer::Impl
{
  explicit Impl(ServerOptions o) : opt(std::move(o)), acceptor(ioc)
  {
    const tcp::endpoint ep(asio::ip::make_address(opt.bind), opt.port);
    acceptor.open(ep.protocol());
    acceptor.set_option(asio::socket_base::reuse_address(true));
    acceptor.bind(ep);
    acceptor.listen(asio::socket_base::max_listen_connections);
    accept();
  }

  void accept()
  {
    acceptor.async_accept(asio::make_strand(ioc), [this](beast::error_code ec, tcp::socket socket) {
      if (ec) {
        if (ec != asio::error::operation_aborted) {
          std::cerr << "accept: " << ec.message() << '\n';
        }
        if (!acceptor.is_open()) {
          return;
        }
      } else {
        std::make_shared<HttpConnection>(std::move(socket), opt, counter)->start();
      }
      accept();
    });
  }

  ServerOptions opt;
  asio::io_context ioc{1};
  tcp::acceptor acceptor;
  std::atomic<std::uint64_t> counter{0};
};

WsServer::WsServer(ServerOptions options) : impl_(std::make_unique<Impl>(std::move(options))) {}

WsServer::~WsServer() = default;

unsigned short WsServer::port() const { return impl_->acceptor.local_endpoint().port(); }

void WsServer::run() { impl_->ioc.run(); }

void WsServer::stop()
{
  asio::post(impl_->ioc, [this] {
    beast::error_code ignored;
    impl_->acceptor.close(ignored);
    impl_->ioc.stop();
  });
}

EpisodeTrace replay_client(const std::string &host, unsigned short port, ControllerKind controller,
                           std::vector<TimedInput> script)
{
  std::stable_sort(script.begin(), script.end(), [](const auto &a, const auto &b) { return a.tick < b.tick; });

  asio::io_context ioc;
  tcp::resolver resolver(ioc);
  websocket::stream<tcp::socket> ws(ioc);
  const auto results = resolver.resolve(host, std::to_string(port));
  asio::connect(ws.next_layer(), results.begin(), results.end());
  ws.handshake(host + ":" + std::to_string(port), "/ws");
  ws.text(true);

  auto send = [&](const ClientMessage &m) { ws.write(asio::buffer(encode(m))); };
  send(JoinSession{controller, ClockMode::Logical});

  std::vector<json> ticks;
  json end;
  std::size_t next = 0;
  beast::flat_buffer buf;
  // The server answers each advance with a Tick. When that Tick was the last
  // one, EpisodeEnd is already queued behind it, so it is the next message
  // read after the following advance is sent.
  for (std::uint64_t k = 0; end.is_null(); ++k) {
    for (; next < script.size() && script[next].tick <= k; ++next) {
      send(script[next].input);
    }
    send(Advance{1});
    ws.read(buf);
    json m = json::parse(beast::buffers_to_string(buf.data()));
    buf.consume(buf.size());
    const auto type = m.at("type").get<std::string>();
    if (type == "tick") {
      ticks.push_back(std::move(m));
    } else if (type == "episode_end") {
      end = std::move(m);
    } else {
      throw std::runtime_error("replay_client: server error " + m.dump());
    }
  }
  beast::error_code ignored;
  ws.close(websocket::close_code::normal, ignored);
  return trace_from_messages(ticks, end);
}

}  // namespace pedsim
