#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>

#include <boost/asio/io_context.hpp>

#include "ave/protocol.hpp"

namespace ave::net {

struct ServerConfig {
  std::string bind = "127.0.0.1";
  std::uint16_t udp_port = 47701;  // 0 picks a free port
  std::uint16_t ws_port = 47702;
  /// When set, plain HTTP GETs on the web-socket port serve files from here.
  std::optional<std::string> static_dir;
};

/// Datagram endpoint plus web-socket bridge in front of one ServerCore.
/// All handlers run on the given io_context; run it from a single thread
/// and the core has exactly one writer.
class Server {
 public:
  Server(boost::asio::io_context& io, protocol::ServerCore& core, ServerConfig config);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  /// Binds both endpoints and starts accepting. Throws Error(Network).
  void start();
  void stop();

  std::uint16_t udp_port() const;
  std::uint16_t ws_port() const;
  const protocol::ReassemblyStats& udp_stats() const;

  class Impl;

 private:
  std::shared_ptr<Impl> impl_;
};

}  // namespace ave::net
