#include "ave/protocol.hpp"

#include <algorithm>

#include "interchange.hpp"

namespace ave::protocol {

namespace {

using interchange::json;


void put32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int shift = 24; shift >= 0; shift -= 8) out.push_back(static_cast<std::uint8_t>(v >> shift));
}

std::uint16_t get16(const std::uint8_t* p) { return static_cast<std::uint16_t>(p[0] << 8 | p[1]); }

std::uint32_t get32(const std::uint8_t* p) {
  return std::uint32_t{p[0]} << 24 | std::uint32_t{p[1]} << 16 | std::uint32_t{p[2]} << 8 | std::uint32_t{p[3]};
}

std::string dump(const json& j) { return j.dump(); }

std::uint32_t u32_at(const json& j, std::string_view key) {
  const auto v = jsonio::unsigned_at(j, key, "");
  if (v > 0xffffffffu) throw ParseError("/" + std::string(key), "value out of range");
  return static_cast<std::uint32_t>(v);
}

}  // namespace

const char* to_string(MsgType t) noexcept {
  switch (t) {
    case MsgType::Hello: return "HELLO";
    case MsgType::Ack: return "ACK";
    case MsgType::Err: return "ERR";
    case MsgType::GetScene: return "GET_SCENE";
    case MsgType::SceneSnapshot: return "SCENE_SNAPSHOT";
    case MsgType::SetPose: return "SET_POSE";
    case MsgType::AddImage: return "ADD_IMAGE";
    case MsgType::AddDetections: return "ADD_DETECTIONS";
    case MsgType::SceneEvent: return "SCENE_EVENT";
  }
  return "UNKNOWN";
}

bool is_known_type(std::uint8_t t) noexcept { return t >= 1 && t <= 9; }

// Framing -----------------------------------------------------------------

std::vector<std::uint8_t> serialize(const Frame& f) {
  if (f.payload.size() > kMaxPayload) throw Error(ErrorCode::Encode, "frame payload exceeds 1200 bytes");
  std::vector<std::uint8_t> out(kHeaderSize + f.payload.size());
  std::copy(kMagic.begin(), kMagic.end(), out.begin());
  const auto be = [&](std::size_t at, std::uint32_t v, int bytes) {
    for (int i = 0; i < bytes; ++i) out[at + i] = static_cast<std::uint8_t>(v >> (8 * (bytes - 1 - i)));
  };
  be(4, f.msg_id, 4);
  out[8] = f.type;
  be(9, f.frag_index, 2);
  be(11, f.frag_count, 2);
  be(13, static_cast<std::uint32_t>(f.payload.size()), 2);
  std::copy(f.payload.begin(), f.payload.end(), out.begin() + kHeaderSize);
  return out;
}

std::optional<Frame> parse_frame(std::span<const std::uint8_t> d, FrameFault* fault) {
  const auto fail = [&](FrameFault f) -> std::optional<Frame> {
    if (fault) *fault = f;
    return std::nullopt;
  };
  if (d.size() < kHeaderSize) return fail(FrameFault::Short);
  if (!std::equal(kMagic.begin(), kMagic.end(), d.begin())) return fail(FrameFault::BadMagic);
  Frame f;
  f.msg_id = get32(d.data() + 4);
  f.type = d[8];
  f.frag_index = get16(d.data() + 9);
  f.frag_count = get16(d.data() + 11);
  const std::size_t len = get16(d.data() + 13);
  if (f.frag_count == 0 || f.frag_index >= f.frag_count) return fail(FrameFault::BadFragment);
  if (len > kMaxPayload) return fail(FrameFault::Oversize);
  if (d.size() != kHeaderSize + len) return fail(FrameFault::LengthMismatch);
  f.payload.assign(d.begin() + kHeaderSize, d.end());
  if (fault) *fault = FrameFault::None;
  return f;
}

std::vector<Frame> encode(const Message& m) {
  if (m.body.size() > kMaxBody) {
    throw Error(ErrorCode::Encode, "message body of " + std::to_string(m.body.size()) + " bytes exceeds " +
                                       std::to_string(kMaxBody));
  }
  const std::size_t count = std::max<std::size_t>(1, (m.body.size() + kMaxPayload - 1) / kMaxPayload);
  std::vector<Frame> frames(count);
  for (std::size_t i = 0; i < count; ++i) {
    Frame& f = frames[i];
    f.msg_id = m.msg_id;
    f.type = m.type;
    f.frag_index = static_cast<std::uint16_t>(i);
    f.frag_count = static_cast<std::uint16_t>(count);
    const std::size_t begin = i * kMaxPayload;
    const std::size_t end = std::min(m.body.size(), begin + kMaxPayload);
    f.payload.assign(m.body.begin() + static_cast<std::ptrdiff_t>(begin), m.body.begin() + static_cast<std::ptrdiff_t>(end));
  }
  return frames;
}

std::vector<std::vector<std::uint8_t>> encode_datagrams(const Message& m) {
  std::vector<std::vector<std::uint8_t>> out;
  for (const Frame& f : encode(m)) out.push_back(serialize(f));
  return out;
}

std::vector<std::uint8_t> encode_stream(const Message& m) {
  std::vector<std::uint8_t> out;
  out.reserve(5 + m.body.size());
  out.push_back(m.type);
  put32(out, m.msg_id);
  out.insert(out.end(), m.body.begin(), m.body.end());
  return out;
}

std::optional<Message> decode_stream(std::span<const std::uint8_t> d) {
  if (d.size() < 5) return std::nullopt;
  Message m;
  m.type = d[0];
  m.msg_id = get32(d.data() + 1);
  m.body.assign(d.begin() + 5, d.end());
  return m;
}

// Reassembly --------------------------------------------------------------

void Reassembler::remember(Peer& p, std::uint32_t id) {
  if (!p.recent_set.insert(id).second) return;
  p.recent.push_back(id);
  while (p.recent.size() > limits_.dedupe_window) {
    p.recent_set.erase(p.recent.front());
    p.recent.pop_front();
  }
}

void Reassembler::expire_peer(Peer& p, Clock::time_point now) {
  for (auto it = p.groups.begin(); it != p.groups.end();) {
    if (now - it->second.started >= limits_.expiry) {
      ++stats_.expired;
      it = p.groups.erase(it);
    } else {
      ++it;
    }
  }
}

void Reassembler::expire(Clock::time_point now) {
  for (auto& [name, peer] : peers_) expire_peer(peer, now);
}

void Reassembler::forget(const std::string& peer) { peers_.erase(peer); }

std::size_t Reassembler::pending_groups() const {
  std::size_t n = 0;
  for (const auto& [name, peer] : peers_) n += peer.groups.size();
  return n;
}

std::optional<Message> Reassembler::accept(const std::string& peer_name, std::span<const std::uint8_t> datagram,
                                           Clock::time_point now, std::optional<std::uint32_t>* repeated) {
  ++stats_.frames;
  FrameFault fault = FrameFault::None;
  auto frame = parse_frame(datagram, &fault);
  if (!frame) {
    if (fault == FrameFault::BadMagic) {
      ++stats_.bad_magic;
    } else {
      ++stats_.malformed;
    }
    return std::nullopt;
  }
  // Every fragment but the last is full size; anything else cannot come
  // from encode() and would make the message length ambiguous.
  if (frame->frag_index + 1 < frame->frag_count && frame->payload.size() != kMaxPayload) {
    ++stats_.malformed;
    return std::nullopt;
  }

  auto it = peers_.find(peer_name);
  if (it == peers_.end()) {
    if (peers_.size() >= limits_.max_peers) {
      // Make room by dropping the peer heard from least recently.
      auto oldest = std::min_element(peers_.begin(), peers_.end(), [](const auto& a, const auto& b) {
        return a.second.last_seen < b.second.last_seen;
      });
      stats_.evicted += oldest->second.groups.size();
      peers_.erase(oldest);
    }
    it = peers_.emplace(peer_name, Peer{}).first;
  }
  Peer& peer = it->second;
  peer.last_seen = now;
  expire_peer(peer, now);

  if (peer.recent_set.count(frame->msg_id)) {
    ++stats_.duplicates;
    if (repeated && frame->frag_index + 1 == frame->frag_count) *repeated = frame->msg_id;
    return std::nullopt;
  }

  if (frame->frag_count == 1) {
    remember(peer, frame->msg_id);
    ++stats_.emitted;
    return Message{frame->msg_id, frame->type, std::string(frame->payload.begin(), frame->payload.end())};
  }

  auto git = peer.groups.find(frame->msg_id);
  if (git == peer.groups.end()) {
    if (peer.groups.size() >= limits_.max_groups_per_peer) {
      auto oldest = std::min_element(peer.groups.begin(), peer.groups.end(), [](const auto& a, const auto& b) {
        return a.second.started < b.second.started;
      });
      ++stats_.evicted;
      peer.groups.erase(oldest);
    }
    Group g;
    g.type = frame->type;
    g.count = frame->frag_count;
    g.started = now;
    git = peer.groups.emplace(frame->msg_id, std::move(g)).first;
  }
  Group& g = git->second;
  if (g.count != frame->frag_count || g.type != frame->type) {
    ++stats_.inconsistent;
    return std::nullopt;
  }
  const auto [part, inserted] = g.parts.try_emplace(frame->frag_index, std::move(frame->payload));
  if (!inserted) {
    if (part->second != frame->payload) {
      ++stats_.conflicting;
    } else {
      ++stats_.duplicates;
    }
    return std::nullopt;
  }
  if (g.parts.size() < g.count) return std::nullopt;

  Message m;
  m.msg_id = git->first;
  m.type = g.type;
  for (const auto& [index, bytes] : g.parts) m.body.append(bytes.begin(), bytes.end());
  peer.groups.erase(git);
  remember(peer, m.msg_id);
  ++stats_.emitted;
  return m;
}

// Bodies --------------------------------------------------------------------

std::string hello_body(const std::string& client_name) { return dump({{"client", client_name}}); }

std::string ack_body(std::uint32_t in_reply_to, std::uint64_t revision, const std::vector<std::string>& warnings) {
  json j = {{"in_reply_to", in_reply_to}, {"revision", revision}};
  if (!warnings.empty()) j["warnings"] = warnings;
  return dump(j);
}

std::string err_body(std::uint32_t in_reply_to, const std::string& reason) {
  return dump({{"in_reply_to", in_reply_to}, {"reason", reason}});
}

std::string event_body(std::uint64_t revision, const std::string& mutation, const std::string& summary) {
  return dump({{"revision", revision}, {"mutation", mutation}, {"summary", summary}});
}

std::string set_pose_body(ProjectorId id, const ProjectorPose& pose) {
  return dump({{"projector_id", id}, {"pose", interchange::pose_to_json(pose)}});
}

std::string add_image_body(const ImageRecord& image, const std::optional<ProjectorPose>& pose) {
  json j = {{"image", interchange::image_to_json(image)}};
  if (pose) j["pose"] = interchange::pose_to_json(*pose);
  return dump(j);
}

std::string add_detections_body(const std::vector<Detection>& detections) {
  json list = json::array();
  for (const Detection& d : detections) list.push_back(interchange::detection_to_json(d));
  return dump({{"schema", "ave.detections"}, {"schema_version", kDetectionSchemaVersion}, {"detections", list}});
}

AckBody parse_ack(const std::string& body) {
  const json j = jsonio::parse(body);
  jsonio::object(j, "");
  AckBody a;
  a.in_reply_to = u32_at(j, "in_reply_to");
  a.revision = jsonio::unsigned_at(j, "revision", "");
  if (const json* w = jsonio::find(j, "warnings")) {
    jsonio::array(*w, "/warnings");
    for (std::size_t i = 0; i < w->size(); ++i) a.warnings.push_back(jsonio::string((*w)[i], jsonio::child("/warnings", i)));
  }
  return a;
}

ErrBody parse_err(const std::string& body) {
  const json j = jsonio::parse(body);
  jsonio::object(j, "");
  return {u32_at(j, "in_reply_to"), jsonio::string_at(j, "reason", "")};
}

EventBody parse_event(const std::string& body) {
  const json j = jsonio::parse(body);
  jsonio::object(j, "");
  return {jsonio::unsigned_at(j, "revision", ""), jsonio::string_at(j, "mutation", ""),
          jsonio::string_at(j, "summary", "")};
}

SetProjectorPose parse_set_pose(const std::string& body) {
  const json j = jsonio::parse(body);
  jsonio::object(j, "");
  SetProjectorPose m;
  m.projector_id = u32_at(j, "projector_id");
  m.pose = interchange::pose_from_json(jsonio::member(j, "pose", ""), "/pose");
  return m;
}

AddImage parse_add_image(const std::string& body) {
  const json j = jsonio::parse(body);
  jsonio::object(j, "");
  AddImage m;
  m.image = interchange::image_from_json(jsonio::member(j, "image", ""), "/image");
  if (const json* p = jsonio::find(j, "pose")) m.pose = interchange::pose_from_json(*p, "/pose");
  return m;
}

// Server --------------------------------------------------------------------

ServerCore::ServerCore(SceneState initial, std::size_t reply_cache)
    : scene_(std::move(initial)), cache_size_(std::max<std::size_t>(1, reply_cache)) {}

void ServerCore::forget(const std::string& peer) {
  peers_.erase(peer);
  cache_.erase(peer);
}

Message ServerCore::reply(std::uint8_t type, std::string body) { return Message{next_id_++, type, std::move(body)}; }

Message ServerCore::error(std::uint32_t in_reply_to, const std::string& reason) {
  return reply(static_cast<std::uint8_t>(MsgType::Err), err_body(in_reply_to, reason));
}

std::vector<ServerCore::Outgoing> ServerCore::commit(const std::string& peer, const Message& request,
                                                     const Mutation& m, std::vector<std::string> warnings) {
  ApplyResult r = ave::apply(scene_, m);
  r.warnings.insert(r.warnings.begin(), warnings.begin(), warnings.end());
  scene_ = std::move(r.state);
  if (on_commit) on_commit(scene_, r.warnings);
  std::vector<Outgoing> out;
  out.push_back({peer, reply(static_cast<std::uint8_t>(MsgType::Ack),
                             ack_body(request.msg_id, scene_.revision, r.warnings))});
  const std::string event = event_body(scene_.revision, mutation_name(m), r.summary);
  for (const std::string& p : peers_) {
    out.push_back({p, reply(static_cast<std::uint8_t>(MsgType::SceneEvent), event)});
  }
  return out;
}

std::vector<ServerCore::Outgoing> ServerCore::handle(const std::string& peer, const Message& request) {
  peers_.insert(peer);
  Cache& cache = cache_[peer];
  if (auto hit = cache.replies.find(request.msg_id); hit != cache.replies.end()) {
    return {{peer, hit->second}};
  }

  std::vector<Outgoing> out;
  try {
    if (!is_known_type(request.type)) {
      out.push_back({peer, error(request.msg_id, "unknown message type " + std::to_string(request.type))});
    } else {
      switch (static_cast<MsgType>(request.type)) {
        case MsgType::Hello:
          out.push_back({peer, reply(static_cast<std::uint8_t>(MsgType::Ack), ack_body(request.msg_id, scene_.revision))});
          break;
        case MsgType::GetScene:
          out.push_back({peer, reply(static_cast<std::uint8_t>(MsgType::SceneSnapshot), save_scene(scene_))});
          break;
        case MsgType::SetPose:
          out = commit(peer, request, parse_set_pose(request.body));
          break;
        case MsgType::AddImage:
          out = commit(peer, request, parse_add_image(request.body));
          break;
        case MsgType::AddDetections: {
          std::map<std::string, ImageSize> sizes;
          for (const ImageRecord& im : scene_.images) sizes.emplace(im.image_id, ImageSize{im.width, im.height});
          DetectionBatch batch = parse_detections(request.body, sizes);
          out = commit(peer, request, AddDetections{std::move(batch.detections)}, std::move(batch.warnings));
          break;
        }
        default:
          out.push_back({peer, error(request.msg_id, std::string(to_string(static_cast<MsgType>(request.type))) +
                                                         " is not a request")});
      }
    }
  } catch (const Error& e) {
    out.clear();
    out.push_back({peer, error(request.msg_id, e.what())});
  }

  // Only the direct reply is cached; a retry must not re-broadcast.
  cache.replies.emplace(request.msg_id, out.front().message);
  cache.order.push_back(request.msg_id);
  while (cache.order.size() > cache_size_) {
    cache.replies.erase(cache.order.front());
    cache.order.pop_front();
  }
  return out;
}

std::vector<ServerCore::Outgoing> ServerCore::replay(const std::string& peer, std::uint32_t msg_id) const {
  const auto c = cache_.find(peer);
  if (c == cache_.end()) return {};
  const auto hit = c->second.replies.find(msg_id);
  if (hit == c->second.replies.end()) return {};
  return {{peer, hit->second}};
}

}  // namespace ave::protocol
