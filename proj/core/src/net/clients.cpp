#include "ave/net/clients.hpp"

#include <array>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>

#include "ave/error.hpp"

namespace ave::net {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;
using udp = asio::ip::udp;
using protocol::Message;
using protocol::MsgType;

namespace {

// Runs the context until `done` or the deadline; pending work is then
// cancelled and drained so the context can be reused.
template <class Cancel>
bool run_until(asio::io_context& io, const bool& done, std::chrono::milliseconds timeout, Cancel cancel) {
  io.restart();
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  while (!done && std::chrono::steady_clock::now() < deadline) {
    io.run_one_until(deadline);
  }
  if (!done) {
    cancel();
    io.restart();
    io.run();
  }
  return done;
}

}  // namespace

bool is_reply_to(const Message& reply, MsgType request_type, std::uint32_t msg_id) {
  if (request_type == MsgType::GetScene && reply.type == static_cast<std::uint8_t>(MsgType::SceneSnapshot)) {
    return true;
  }
  try {
    if (reply.type == static_cast<std::uint8_t>(MsgType::Ack)) return protocol::parse_ack(reply.body).in_reply_to == msg_id;
    if (reply.type == static_cast<std::uint8_t>(MsgType::Err)) return protocol::parse_err(reply.body).in_reply_to == msg_id;
  } catch (const Error&) {
  }
  return false;
}

// Datagram ------------------------------------------------------------------

class DatagramClient::Impl {
 public:
  Impl(const std::string& host, std::uint16_t port) : socket_(io_) {
    udp::resolver resolver(io_);
    try {
      server_ = *resolver.resolve(udp::v4(), host, std::to_string(port)).begin();
      socket_.open(udp::v4());
    } catch (const boost::system::system_error& e) {
      throw Error(ErrorCode::Network, "cannot reach " + host + ": " + e.what());
    }
  }

  void send(const Message& m) {
    for (const auto& d : protocol::encode_datagrams(m)) {
      boost::system::error_code ec;
      socket_.send_to(asio::buffer(d), server_, 0, ec);
      if (ec) throw Error(ErrorCode::Network, "send failed: " + ec.message());
    }
  }

  std::optional<Message> receive(std::chrono::milliseconds timeout) {
    const auto deadline = std::chrono::steady_clock::now() + timeout;
    while (true) {
      const auto now = std::chrono::steady_clock::now();
      if (now >= deadline) return std::nullopt;
      bool done = false;
      std::size_t n = 0;
      udp::endpoint from;
      socket_.async_receive_from(asio::buffer(buffer_), from, [&](const boost::system::error_code& ec, std::size_t got) {
        if (!ec) n = got;
        done = true;
      });
      const auto remaining = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now);
      if (!run_until(io_, done, remaining, [&] { socket_.cancel(); })) return std::nullopt;
      if (n == 0) continue;
      if (auto m = reassembler_.accept("server", {buffer_.data(), n}, protocol::Reassembler::Clock::now())) return m;
    }
  }

 private:
  asio::io_context io_;
  udp::socket socket_;
  udp::endpoint server_;
  std::array<std::uint8_t, 65536> buffer_{};
  protocol::Reassembler reassembler_;
};

DatagramClient::DatagramClient(const std::string& host, std::uint16_t port)
    : impl_(std::make_unique<Impl>(host, port)) {}
DatagramClient::~DatagramClient() = default;

std::uint32_t DatagramClient::send(MsgType type, const std::string& body) {
  const Message m{next_id_++, static_cast<std::uint8_t>(type), body};
  impl_->send(m);
  return m.msg_id;
}

void DatagramClient::resend(const Message& m) { impl_->send(m); }

std::optional<Message> DatagramClient::receive(std::chrono::milliseconds timeout) {
  if (!backlog_.empty()) {
    Message m = std::move(backlog_.front());
    backlog_.pop_front();
    return m;
  }
  return impl_->receive(timeout);
}

Message DatagramClient::request(MsgType type, const std::string& body, std::chrono::milliseconds timeout,
                                int attempts) {
  const Message m{next_id_++, static_cast<std::uint8_t>(type), body};
  for (int attempt = 0; attempt < attempts; ++attempt) {
    impl_->send(m);
    const auto deadline = std::chrono::steady_clock::now() + timeout;
    while (std::chrono::steady_clock::now() < deadline) {
      const auto left =
          std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
      auto got = impl_->receive(left);
      if (!got) break;
      if (is_reply_to(*got, type, m.msg_id)) return *got;
      backlog_.push_back(std::move(*got));
    }
  }
  throw Error(ErrorCode::Network, std::string("no reply to ") + protocol::to_string(type) + " after " +
                                      std::to_string(attempts) + " attempts");
}

// Stream --------------------------------------------------------------------

class StreamClient::Impl {
 public:
  Impl(const std::string& host, std::uint16_t port) : ws_(io_) {
    try {
      tcp::resolver resolver(io_);
      const auto results = resolver.resolve(host, std::to_string(port));
      beast::get_lowest_layer(ws_).connect(results);
      ws_.binary(true);
      ws_.handshake(host + ":" + std::to_string(port), "/");
    } catch (const boost::system::system_error& e) {
      throw Error(ErrorCode::Network, "web-socket connect to " + host + " failed: " + e.what());
    }
  }

  ~Impl() {
    beast::error_code ec;
    if (reading_) {
      beast::get_lowest_layer(ws_).socket().close(ec);
    } else if (ws_.is_open()) {
      ws_.close(websocket::close_code::normal, ec);
    }
  }

  void send(const Message& m) {
    const auto bytes = protocol::encode_stream(m);
    beast::error_code ec;
    ws_.write(asio::buffer(bytes), ec);
    if (ec) throw Error(ErrorCode::Network, "web-socket write failed: " + ec.message());
  }

  std::optional<Message> receive(std::chrono::milliseconds timeout) {
    // The read stays outstanding across calls; cancelling a web-socket
    // read would fail the whole stream.
    if (!reading_) {
      reading_ = true;
      done_ = false;
      ws_.async_read(buffer_, [this](beast::error_code ec, std::size_t) {
        result_ = ec;
        done_ = true;
      });
    }
    io_.restart();
    const auto deadline = std::chrono::steady_clock::now() + timeout;
    while (!done_ && std::chrono::steady_clock::now() < deadline) io_.run_one_until(deadline);
    if (!done_) return std::nullopt;
    reading_ = false;
    if (result_) throw Error(ErrorCode::Network, "web-socket read failed: " + result_.message());
    const auto data = buffer_.cdata();
    auto m = protocol::decode_stream({static_cast<const std::uint8_t*>(data.data()), data.size()});
    buffer_.consume(buffer_.size());
    return m;
  }

  void abort() {
    beast::error_code ec;
    beast::get_lowest_layer(ws_).socket().close(ec);
  }

 private:
  asio::io_context io_;
  websocket::stream<beast::tcp_stream> ws_;
  beast::flat_buffer buffer_;
  bool reading_ = false;
  bool done_ = false;
  beast::error_code result_;
};

StreamClient::StreamClient(const std::string& host, std::uint16_t port) : impl_(std::make_unique<Impl>(host, port)) {}
StreamClient::~StreamClient() = default;

std::uint32_t StreamClient::send(MsgType type, const std::string& body) {
  const Message m{next_id_++, static_cast<std::uint8_t>(type), body};
  impl_->send(m);
  return m.msg_id;
}

std::optional<Message> StreamClient::receive(std::chrono::milliseconds timeout) {
  if (!backlog_.empty()) {
    Message m = std::move(backlog_.front());
    backlog_.pop_front();
    return m;
  }
  return impl_->receive(timeout);
}

Message StreamClient::request(MsgType type, const std::string& body, std::chrono::milliseconds timeout) {
  const std::uint32_t id = send(type, body);
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  while (std::chrono::steady_clock::now() < deadline) {
    const auto left =
        std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
    auto got = impl_->receive(left);
    if (!got) break;
    if (is_reply_to(*got, type, id)) return *got;
    backlog_.push_back(std::move(*got));
  }
  throw Error(ErrorCode::Network, std::string("no reply to ") + protocol::to_string(type) + " over web-socket");
}

void StreamClient::abort() { impl_->abort(); }

}  // namespace ave::net
