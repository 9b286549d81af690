#pragma once

#include <array>
#include <chrono>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "ave/scene.hpp"

namespace ave::protocol {

inline constexpr std::array<std::uint8_t, 4> kMagic{'A', 'V', 'E', '1'};
inline constexpr std::size_t kHeaderSize = 15;
inline constexpr std::size_t kMaxPayload = 1200;
inline constexpr std::size_t kMaxFragments = 65535;
inline constexpr std::size_t kMaxBody = kMaxPayload * kMaxFragments;

enum class MsgType : std::uint8_t {
  Hello = 1,
  Ack = 2,
  Err = 3,
  GetScene = 4,
  SceneSnapshot = 5,
  SetPose = 6,
  AddImage = 7,
  AddDetections = 8,
  SceneEvent = 9,
};

const char* to_string(MsgType t) noexcept;
bool is_known_type(std::uint8_t t) noexcept;

/// type is kept raw so that unknown codes survive decoding and can be
/// answered with ERR.
struct Message {
  std::uint32_t msg_id = 0;
  std::uint8_t type = 0;
  std::string body;

  friend bool operator==(const Message&, const Message&) = default;
};

/// Wire layout, all integers big-endian:
///   0  magic "AVE1"      4  msg_id u32     8  type u8
///   9  frag_index u16   11  frag_count u16 13  payload_len u16
///  15  payload
struct Frame {
  std::uint32_t msg_id = 0;
  std::uint8_t type = 0;
  std::uint16_t frag_index = 0;
  std::uint16_t frag_count = 1;
  std::vector<std::uint8_t> payload;

  friend bool operator==(const Frame&, const Frame&) = default;
};

enum class FrameFault { None, Short, BadMagic, BadFragment, LengthMismatch, Oversize };

std::vector<std::uint8_t> serialize(const Frame& f);
/// Strict parse of one datagram. On failure `fault` says why.
std::optional<Frame> parse_frame(std::span<const std::uint8_t> datagram, FrameFault* fault = nullptr);

/// Splits the body into 1200-byte fragments sharing msg_id; an empty body
/// still yields one frame. Throws Error(Encode) above kMaxBody.
std::vector<Frame> encode(const Message& m);
std::vector<std::vector<std::uint8_t>> encode_datagrams(const Message& m);

/// Stream (web-socket) form: [type u8][msg_id u32 BE][body], one message
/// per stream message, no fragmentation.
std::vector<std::uint8_t> encode_stream(const Message& m);
std::optional<Message> decode_stream(std::span<const std::uint8_t> data);

struct ReassemblyStats {
  std::uint64_t frames = 0;
  std::uint64_t emitted = 0;
  std::uint64_t bad_magic = 0;
  std::uint64_t malformed = 0;      // short, length mismatch, bad indices
  std::uint64_t inconsistent = 0;   // disagrees with its group's header
  std::uint64_t conflicting = 0;    // same fragment, different bytes
  std::uint64_t duplicates = 0;     // repeated fragment or completed msg_id
  std::uint64_t expired = 0;        // incomplete groups dropped
  std::uint64_t evicted = 0;        // groups dropped to bound memory

  std::uint64_t dropped() const { return bad_magic + malformed + inconsistent + conflicting; }
};

/// Per-peer fragment assembly. Hostile input is expected: every bad frame
/// is counted and dropped. A msg_id completes at most once while it is
/// among the peer's last `dedupe_window` completed ids.
class Reassembler {
 public:
  using Clock = std::chrono::steady_clock;

  struct Limits {
    std::size_t dedupe_window = 1024;
    Clock::duration expiry = std::chrono::seconds(5);
    std::size_t max_groups_per_peer = 64;
    std::size_t max_peers = 4096;
  };

  Reassembler() = default;
  explicit Reassembler(Limits limits) : limits_(limits) {}

  /// When the last fragment of an already completed msg_id arrives again
  /// (a retry or a network duplicate), nothing is emitted and
  /// `repeated`, if given, receives that msg_id so the caller can resend
  /// its reply.
  std::optional<Message> accept(const std::string& peer, std::span<const std::uint8_t> datagram, Clock::time_point now,
                                std::optional<std::uint32_t>* repeated = nullptr);
  /// Drops groups older than the expiry; accept() also does this lazily.
  void expire(Clock::time_point now);
  void forget(const std::string& peer);

  const ReassemblyStats& stats() const { return stats_; }
  std::size_t pending_groups() const;

 private:
  struct Group {
    std::uint8_t type = 0;
    std::uint16_t count = 0;
    std::map<std::uint16_t, std::vector<std::uint8_t>> parts;
    Clock::time_point started;
  };
  struct Peer {
    std::map<std::uint32_t, Group> groups;
    std::deque<std::uint32_t> recent;
    std::unordered_set<std::uint32_t> recent_set;
    Clock::time_point last_seen;
  };

  void remember(Peer& p, std::uint32_t id);
  void expire_peer(Peer& p, Clock::time_point now);

  Limits limits_;
  std::unordered_map<std::string, Peer> peers_;
  ReassemblyStats stats_;
};

/// Single-writer owner of the scene behind both transports. handle() takes
/// one complete request and returns every message to send, the reply
/// first and then SCENE_EVENT broadcasts. A request msg_id already
/// answered for that peer gets the cached reply again without being
/// re-applied.
class ServerCore {
 public:
  struct Outgoing {
    std::string peer;
    Message message;
  };

  explicit ServerCore(SceneState initial = {}, std::size_t reply_cache = 1024);

  std::vector<Outgoing> handle(const std::string& peer, const Message& request);
  /// The cached reply to msg_id for this peer, if still cached.
  std::vector<Outgoing> replay(const std::string& peer, std::uint32_t msg_id) const;
  void forget(const std::string& peer);

  const SceneState& scene() const { return scene_; }
  const std::set<std::string>& peers() const { return peers_; }
  /// Called after each committed mutation.
  std::function<void(const SceneState&, const std::vector<std::string>& warnings)> on_commit;

 private:
  struct Cache {
    std::map<std::uint32_t, Message> replies;
    std::deque<std::uint32_t> order;
  };

  Message reply(std::uint8_t type, std::string body);
  Message error(std::uint32_t in_reply_to, const std::string& reason);
  std::vector<Outgoing> commit(const std::string& peer, const Message& request, const Mutation& m,
                              std::vector<std::string> warnings = {});

  SceneState scene_;
  std::set<std::string> peers_;
  std::map<std::string, Cache> cache_;
  std::size_t cache_size_;
  std::uint32_t next_id_ = 1;
};

/// Message bodies. Parsers throw ParseError with a JSON path.
std::string hello_body(const std::string& client_name);
std::string ack_body(std::uint32_t in_reply_to, std::uint64_t revision, const std::vector<std::string>& warnings = {});
std::string err_body(std::uint32_t in_reply_to, const std::string& reason);
std::string event_body(std::uint64_t revision, const std::string& mutation, const std::string& summary);
std::string set_pose_body(ProjectorId id, const ProjectorPose& pose);
std::string add_image_body(const ImageRecord& image, const std::optional<ProjectorPose>& pose = std::nullopt);
std::string add_detections_body(const std::vector<Detection>& detections);

struct AckBody {
  std::uint32_t in_reply_to = 0;
  std::uint64_t revision = 0;
  std::vector<std::string> warnings;
};
struct ErrBody {
  std::uint32_t in_reply_to = 0;
  std::string reason;
};
struct EventBody {
  std::uint64_t revision = 0;
  std::string mutation;
  std::string summary;
};

AckBody parse_ack(const std::string& body);
ErrBody parse_err(const std::string& body);
EventBody parse_event(const std::string& body);
SetProjectorPose parse_set_pose(const std::string& body);
AddImage parse_add_image(const std::string& body);

}  // namespace ave::protocol
