#include "ave/net/server.hpp"

#include "ave/error.hpp"

#include <array>
#include <deque>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

namespace ave::net {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;
using udp = asio::ip::udp;

namespace {

std::string mime_type(const std::filesystem::path& p) {
  static const std::map<std::string, std::string> types{
      {".html", "text/html"},        {".js", "application/javascript"}, {".mjs", "application/javascript"},
      {".css", "text/css"},          {".json", "application/json"},     {".png", "image/png"},
      {".jpg", "image/jpeg"},        {".jpeg", "image/jpeg"},           {".svg", "image/svg+xml"},
      {".wasm", "application/wasm"}, {".obj", "text/plain"},
  };
  const auto it = types.find(p.extension().string());
  return it == types.end() ? "application/octet-stream" : it->second;
}

}  // namespace

class WsSession;

class Server::Impl : public std::enable_shared_from_this<Server::Impl> {
 public:
  Impl(asio::io_context& io, protocol::ServerCore& core, ServerConfig config)
      : io_(io), core_(core), config_(std::move(config)), udp_(io), acceptor_(io), sweep_(io) {}

  void start();
  void stop();

  void dispatch(const std::string& peer, const protocol::Message& m);
  void attach(const std::string& name, const std::shared_ptr<WsSession>& s) { sessions_[name] = s; }
  void detach(const std::string& name) {
    sessions_.erase(name);
    core_.forget(name);
  }
  std::string next_session_name() { return "ws:" + std::to_string(next_session_++); }
  const std::optional<std::string>& static_dir() const { return config_.static_dir; }

  std::uint16_t udp_port() const { return udp_.is_open() ? udp_.local_endpoint().port() : 0; }
  std::uint16_t ws_port() const { return acceptor_.is_open() ? acceptor_.local_endpoint().port() : 0; }
  const protocol::ReassemblyStats& stats() const { return reassembler_.stats(); }

 private:
  void receive();
  void accept();
  void schedule_sweep();
  void send(const std::string& peer, const protocol::Message& m);

  asio::io_context& io_;
  protocol::ServerCore& core_;
  ServerConfig config_;
  udp::socket udp_;
  tcp::acceptor acceptor_;
  asio::steady_timer sweep_;
  protocol::Reassembler reassembler_;
  std::array<std::uint8_t, 65536> buffer_{};
  udp::endpoint sender_;
  std::map<std::string, udp::endpoint> udp_peers_;
  std::map<std::string, std::weak_ptr<WsSession>> sessions_;
  std::uint64_t next_session_ = 0;
  bool stopped_ = false;
};

class WsSession : public std::enable_shared_from_this<WsSession> {
 public:
  WsSession(tcp::socket socket, std::shared_ptr<Server::Impl> server)
      : ws_(std::move(socket)), server_(std::move(server)) {}

  void start() { read_request(); }

  void deliver(std::vector<std::uint8_t> bytes) {
    outbox_.push_back(std::move(bytes));
    if (outbox_.size() == 1 && open_) write_next();
  }

  void close() {
    if (!open_) return;
    open_ = false;
    beast::error_code ec;
    ws_.next_layer().socket().close(ec);
  }

 private:
  void read_request() {
    http::async_read(ws_.next_layer(), buffer_, request_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) return;
      if (websocket::is_upgrade(self->request_)) {
        self->upgrade();
      } else {
        self->serve_file();
      }
    });
  }

  void upgrade() {
    ws_.binary(true);
    ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
    ws_.async_accept(request_, [self = shared_from_this()](beast::error_code ec) {
      if (ec) return;
      self->open_ = true;
      self->name_ = self->server_->next_session_name();
      self->server_->attach(self->name_, self);
      self->read_message();
      if (!self->outbox_.empty()) self->write_next();
    });
  }

  void read_message() {
    ws_.async_read(buffer_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) {
        self->open_ = false;
        self->server_->detach(self->name_);
        return;
      }
      const auto data = self->buffer_.cdata();
      const auto* bytes = static_cast<const std::uint8_t*>(data.data());
      auto message = protocol::decode_stream({bytes, data.size()});
      self->buffer_.consume(self->buffer_.size());
      if (message) self->server_->dispatch(self->name_, *message);
      self->read_message();
    });
  }

  void write_next() {
    ws_.async_write(asio::buffer(outbox_.front()), [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) {
        self->outbox_.clear();
        return;
      }
      self->outbox_.pop_front();
      if (!self->outbox_.empty()) self->write_next();
    });
  }

  void serve_file() {
    auto res = std::make_shared<http::response<http::string_body>>();
    res->version(request_.version());
    res->keep_alive(false);
    const auto& dir = server_->static_dir();
    std::string target(request_.target());
    if (const auto q = target.find('?'); q != std::string::npos) target.resize(q);
    if (target.empty() || target.back() == '/') target += "index.html";
    bool found = false;
    if (dir && request_.method() == http::verb::get && target.find("..") == std::string::npos) {
      const std::filesystem::path path = std::filesystem::path(*dir) / target.substr(1);
      std::ifstream in(path, std::ios::binary);
      if (in && std::filesystem::is_regular_file(path)) {
        found = true;
        std::ostringstream body;
        body << in.rdbuf();
        res->result(http::status::ok);
        res->set(http::field::content_type, mime_type(path));
        res->body() = body.str();
      }
    }
    if (!found) {
      res->result(http::status::not_found);
      res->set(http::field::content_type, "text/plain");
      res->body() = "not found\n";
    }
    res->prepare_payload();
    http::async_write(ws_.next_layer(), *res, [self = shared_from_this(), res](beast::error_code, std::size_t) {
      beast::error_code ec;
      self->ws_.next_layer().socket().shutdown(tcp::socket::shutdown_send, ec);
    });
  }

  websocket::stream<beast::tcp_stream> ws_;
  beast::flat_buffer buffer_;
  http::request<http::string_body> request_;
  std::shared_ptr<Server::Impl> server_;
  std::deque<std::vector<std::uint8_t>> outbox_;
  std::string name_;
  bool open_ = false;
};

void Server::Impl::start() {
  try {
    const auto address = asio::ip::make_address(config_.bind);
    udp_.open(address.is_v6() ? udp::v6() : udp::v4());
    udp_.bind({address, config_.udp_port});
    const tcp::endpoint ep{address, config_.ws_port};
    acceptor_.open(ep.protocol());
    acceptor_.set_option(asio::socket_base::reuse_address(true));
    acceptor_.bind(ep);
    acceptor_.listen();
  } catch (const boost::system::system_error& e) {
    throw Error(ErrorCode::Network, "cannot bind " + config_.bind + ": " + e.what());
  }
  receive();
  accept();
  schedule_sweep();
}

void Server::Impl::stop() {
  stopped_ = true;
  beast::error_code ec;
  udp_.close(ec);
  acceptor_.close(ec);
  sweep_.cancel();
  for (auto& [name, weak] : sessions_) {
    if (auto s = weak.lock()) s->close();
  }
  sessions_.clear();
}

void Server::Impl::receive() {
  udp_.async_receive_from(asio::buffer(buffer_), sender_,
                          [self = shared_from_this()](const boost::system::error_code& ec, std::size_t n) {
                            if (self->stopped_ || ec == asio::error::operation_aborted) return;
                            if (!ec) {
                              const std::string peer = "udp:" + self->sender_.address().to_string() + ":" +
                                                       std::to_string(self->sender_.port());
                              std::optional<std::uint32_t> repeated;
                              auto m = self->reassembler_.accept(peer, {self->buffer_.data(), n},
                                                                 protocol::Reassembler::Clock::now(), &repeated);
                              if (m) {
                                self->udp_peers_[peer] = self->sender_;
                                self->dispatch(peer, *m);
                              } else if (repeated) {
                                for (const auto& out : self->core_.replay(peer, *repeated)) {
                                  self->send(out.peer, out.message);
                                }
                              }
                            }
                            self->receive();
                          });
}

void Server::Impl::accept() {
  acceptor_.async_accept([self = shared_from_this()](const boost::system::error_code& ec, tcp::socket socket) {
    if (self->stopped_ || ec == asio::error::operation_aborted) return;
    if (!ec) std::make_shared<WsSession>(std::move(socket), self)->start();
    self->accept();
  });
}

void Server::Impl::schedule_sweep() {
  sweep_.expires_after(std::chrono::seconds(1));
  sweep_.async_wait([self = shared_from_this()](const boost::system::error_code& ec) {
    if (ec || self->stopped_) return;
    self->reassembler_.expire(protocol::Reassembler::Clock::now());
    self->schedule_sweep();
  });
}

void Server::Impl::dispatch(const std::string& peer, const protocol::Message& m) {
  for (const auto& out : core_.handle(peer, m)) send(out.peer, out.message);
}

void Server::Impl::send(const std::string& peer, const protocol::Message& m) {
  if (const auto it = udp_peers_.find(peer); it != udp_peers_.end()) {
    for (const auto& datagram : protocol::encode_datagrams(m)) {
      boost::system::error_code ec;
      udp_.send_to(asio::buffer(datagram), it->second, 0, ec);
    }
    return;
  }
  if (const auto it = sessions_.find(peer); it != sessions_.end()) {
    if (auto s = it->second.lock()) s->deliver(protocol::encode_stream(m));
  }
}

Server::Server(asio::io_context& io, protocol::ServerCore& core, ServerConfig config)
    : impl_(std::make_shared<Impl>(io, core, std::move(config))) {}

Server::~Server() { impl_->stop(); }

void Server::start() { impl_->start(); }
void Server::stop() { impl_->stop(); }
std::uint16_t Server::udp_port() const { return impl_->udp_port(); }
std::uint16_t Server::ws_port() const { return impl_->ws_port(); }
const protocol::ReassemblyStats& Server::udp_stats() const { return impl_->stats(); }

}  // namespace ave::net
