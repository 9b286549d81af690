#pragma once

#include <chrono>
#include <cstdint>
#include <deque>
#include <memory>
#include <optional>
#include <string>

#include "ave/protocol.hpp"

namespace ave::net {

/// Blocking datagram client. Incoming messages are reassembled and
/// queued; request() retries until the matching reply arrives and leaves
/// everything else (events) in the queue.
class DatagramClient {
 public:
  DatagramClient(const std::string& host, std::uint16_t port);
  ~DatagramClient();

  std::uint32_t send(protocol::MsgType type, const std::string& body);
  /// Re-sends an already numbered message (same msg_id).
  void resend(const protocol::Message& m);
  std::optional<protocol::Message> receive(std::chrono::milliseconds timeout);

  /// Sends and waits for the reply (ACK/ERR echoing the msg_id, or the
  /// snapshot for GET_SCENE), re-sending with the same msg_id after each
  /// timeout. Throws Error(Network) once retries are exhausted.
  protocol::Message request(protocol::MsgType type, const std::string& body,
                            std::chrono::milliseconds timeout = std::chrono::milliseconds(500), int attempts = 10);

  std::deque<protocol::Message>& backlog() { return backlog_; }

 private:
  class Impl;
  std::unique_ptr<Impl> impl_;
  std::deque<protocol::Message> backlog_;
  std::uint32_t next_id_ = 1;
};

/// Blocking web-socket client speaking the stream form of the protocol.
class StreamClient {
 public:
  StreamClient(const std::string& host, std::uint16_t port);
  ~StreamClient();

  std::uint32_t send(protocol::MsgType type, const std::string& body);
  std::optional<protocol::Message> receive(std::chrono::milliseconds timeout);
  protocol::Message request(protocol::MsgType type, const std::string& body,
                            std::chrono::milliseconds timeout = std::chrono::milliseconds(2000));
  /// Drops the TCP connection without a close handshake.
  void abort();

  std::deque<protocol::Message>& backlog() { return backlog_; }

 private:
  class Impl;
  std::unique_ptr<Impl> impl_;
  std::deque<protocol::Message> backlog_;
  std::uint32_t next_id_ = 1;
};

/// True when `reply` answers request `msg_id` of the given type.
bool is_reply_to(const protocol::Message& reply, protocol::MsgType request_type, std::uint32_t msg_id);

}  // namespace ave::net
