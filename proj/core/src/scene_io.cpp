#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "ave/scene.hpp"
#include "interchange.hpp"

namespace ave::interchange {

using namespace jsonio;

namespace {

void write_string(const json& j, std::string& out) { out += j.dump(); }

void write_number(double v, std::string& out) {
  if (!std::isfinite(v)) throw Error(ErrorCode::Encode, "cannot serialize non-finite number");
  if (v == 0.0) v = 0.0;  // drops the sign of -0
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out += buf;
}

void write(const json& j, std::string& out, int depth) {
  const auto newline = [&](int d) {
    out += '\n';
    out.append(static_cast<std::size_t>(2 * d), ' ');
  };
  switch (j.type()) {
    case json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += '{';
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out += ',';
        first = false;
        newline(depth + 1);
        write_string(json(it.key()), out);
        out += ": ";
        write(it.value(), out, depth + 1);
      }
      newline(depth);
      out += '}';
      return;
    }
    case json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      // Short numeric tuples (coordinates, indices) stay on one line.
      const bool flat = j.size() <= 4 && std::all_of(j.begin(), j.end(), [](const json& e) { return e.is_number(); });
      out += '[';
      bool first = true;
      for (const json& e : j) {
        if (!first) out += flat ? ", " : ",";
        first = false;
        if (!flat) newline(depth + 1);
        write(e, out, depth + 1);
      }
      if (!flat) newline(depth);
      out += ']';
      return;
    }
    case json::value_t::number_float:
      write_number(j.get<double>(), out);
      return;
    case json::value_t::string:
      write_string(j, out);
      return;
    default:
      out += j.dump();
      return;
  }
}

json vec2_to_json(const Vec2& v) { return json::array({v.x, v.y}); }

std::uint32_t u32(const json& j, const std::string& path) {
  const auto v = unsigned_integer(j, path);
  if (v > std::numeric_limits<std::uint32_t>::max()) throw ParseError(path, "value out of range");
  return static_cast<std::uint32_t>(v);
}

int small_int(const json& j, const std::string& path) {
  const auto v = integer(j, path);
  if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) {
    throw ParseError(path, "value out of range");
  }
  return static_cast<int>(v);
}

Timestamp timestamp_from(const json& j, const std::string& path) {
  const auto t = parse_iso8601(string(j, path));
  if (!t) throw ParseError(path, "expected YYYY-MM-DDTHH:MM:SSZ");
  return *t;
}

json kind_to_json(SurfaceKind k) { return to_string(k); }

SurfaceKind kind_from_json(const json& j, const std::string& path) {
  const std::string s = string(j, path);
  if (s == "wall") return SurfaceKind::Wall;
  if (s == "roof") return SurfaceKind::Roof;
  if (s == "ground") return SurfaceKind::Ground;
  throw ParseError(path, "unknown surface kind '" + s + "'");
}

json surface_to_json(const Surface& s) {
  json j = json::object();
  j["id"] = s.id;
  j["kind"] = kind_to_json(s.kind);
  if (s.normal) j["normal"] = vec3_to_json(*s.normal);
  json verts = json::array();
  for (const LocalCoord& v : s.vertices) verts.push_back(vec3_to_json(v));
  j["vertices"] = std::move(verts);
  json tris = json::array();
  for (const Triangle& t : s.triangles) tris.push_back(json::array({t[0], t[1], t[2]}));
  j["triangles"] = std::move(tris);
  return j;
}

Surface surface_from_json(const json& j, const std::string& path) {
  object(j, path);
  Surface s;
  s.id = unsigned_at(j, "id", path);
  s.kind = kind_from_json(member(j, "kind", path), child(path, "kind"));
  if (const json* n = find(j, "normal")) s.normal = vec3_from_json(*n, child(path, "normal"));
  const std::string vpath = child(path, "vertices");
  const json& verts = array(member(j, "vertices", path), vpath);
  for (std::size_t i = 0; i < verts.size(); ++i) s.vertices.push_back(vec3_from_json(verts[i], child(vpath, i)));
  const std::string tpath = child(path, "triangles");
  const json& tris = array(member(j, "triangles", path), tpath);
  for (std::size_t i = 0; i < tris.size(); ++i) {
    const std::string p = child(tpath, i);
    const json& t = array(tris[i], p);
    if (t.size() != 3) throw ParseError(p, "expected three vertex indices");
    Triangle tri{};
    for (std::size_t k = 0; k < 3; ++k) {
      tri[k] = u32(t[k], child(p, k));
      if (tri[k] >= s.vertices.size()) throw ParseError(child(p, k), "vertex index out of range");
    }
    s.triangles.push_back(tri);
  }
  return s;
}

json mesh_to_json(const Mesh& m) {
  json j = json::object();
  if (m.building_id) j["building_id"] = *m.building_id;
  j["base_z"] = m.base_z;
  json surfaces = json::array();
  for (const Surface& s : m.surfaces) surfaces.push_back(surface_to_json(s));
  j["surfaces"] = std::move(surfaces);
  return j;
}

Mesh mesh_from_json(const json& j, const std::string& path) {
  object(j, path);
  Mesh m;
  if (const json* b = find(j, "building_id")) m.building_id = integer(*b, child(path, "building_id"));
  m.base_z = number_at(j, "base_z", path);
  const std::string spath = child(path, "surfaces");
  const json& surfaces = array(member(j, "surfaces", path), spath);
  for (std::size_t i = 0; i < surfaces.size(); ++i) m.surfaces.push_back(surface_from_json(surfaces[i], child(spath, i)));
  return m;
}

json intrinsics_to_json(const Intrinsics& k) {
  return {{"hfov", k.hfov}, {"aspect", k.aspect}, {"near", k.near}, {"far", k.far}};
}

Intrinsics intrinsics_from_json(const json& j, const std::string& path) {
  object(j, path);
  return {number_at(j, "hfov", path), number_at(j, "aspect", path), number_at(j, "near", path),
          number_at(j, "far", path)};
}

json projector_to_json(const Projector& p) {
  json j = {{"id", p.id}, {"image_id", p.image_id}, {"pose", pose_to_json(p.pose)},
            {"intrinsics", intrinsics_to_json(p.intrinsics)}};
  if (p.priority_timestamp) j["priority_timestamp"] = format_iso8601(*p.priority_timestamp);
  return j;
}

Projector projector_from_json(const json& j, const std::string& path) {
  object(j, path);
  Projector p;
  p.id = u32(member(j, "id", path), child(path, "id"));
  p.image_id = string_at(j, "image_id", path);
  p.pose = pose_from_json(member(j, "pose", path), child(path, "pose"));
  p.intrinsics = intrinsics_from_json(member(j, "intrinsics", path), child(path, "intrinsics"));
  if (const json* t = find(j, "priority_timestamp")) p.priority_timestamp = timestamp_from(*t, child(path, "priority_timestamp"));
  return p;
}

json masks_to_json(const SurfaceMaskTable& t) {
  json masks = json::array();
  for (const auto& [surface, set] : t.masks) {
    masks.push_back({{"surface", surface}, {"mask", set.to_hex()}, {"pool_id", t.pool.at(set)}});
  }
  json pool = json::array();
  for (const auto& [set, id] : t.pool) pool.push_back({{"mask", set.to_hex()}, {"pool_id", id}});
  return {{"masks", std::move(masks)}, {"pool", std::move(pool)}};
}

ProjectorSet set_from_json(const json& j, const std::string& path) {
  try {
    return ProjectorSet::from_hex(string(j, path));
  } catch (const DomainError& e) {
    throw ParseError(path, e.what());
  }
}

SurfaceMaskTable masks_from_json(const json& j, const std::string& path) {
  object(j, path);
  SurfaceMaskTable t;
  const std::string mpath = child(path, "masks");
  const json& masks = array(member(j, "masks", path), mpath);
  for (std::size_t i = 0; i < masks.size(); ++i) {
    const std::string p = child(mpath, i);
    object(masks[i], p);
    const SurfaceId surface = unsigned_at(masks[i], "surface", p);
    if (!t.masks.emplace(surface, set_from_json(member(masks[i], "mask", p), child(p, "mask"))).second) {
      throw ParseError(p, "duplicate surface " + std::to_string(surface));
    }
  }
  rebuild_pool(t);
  // The stored pool is derived data; it must agree with the recomputed one.
  const std::string ppath = child(path, "pool");
  const json& pool = array(member(j, "pool", path), ppath);
  if (pool.size() != t.pool.size()) throw ParseError(ppath, "pool does not match the masks");
  for (std::size_t i = 0; i < pool.size(); ++i) {
    const std::string p = child(ppath, i);
    object(pool[i], p);
    const ProjectorSet set = set_from_json(member(pool[i], "mask", p), child(p, "mask"));
    const auto it = t.pool.find(set);
    if (it == t.pool.end() || it->second != u32(member(pool[i], "pool_id", p), child(p, "pool_id"))) {
      throw ParseError(p, "pool entry does not match the masks");
    }
  }
  return t;
}

json placement_to_json(const Placement& p) {
  json j = {{"id", p.id}, {"detection", detection_to_json(p.detection)}, {"position", vec3_to_json(p.position)}};
  if (p.anchored_on.surface) {
    j["anchored_on"] = *p.anchored_on.surface;
  } else {
    j["anchored_on"] = "ground";
  }
  if (p.timestamp) j["timestamp"] = format_iso8601(*p.timestamp);
  return j;
}

Placement placement_from_json(const json& j, const std::string& path) {
  object(j, path);
  Placement p;
  p.id = unsigned_at(j, "id", path);
  p.detection = detection_from_json(member(j, "detection", path), child(path, "detection"));
  p.position = vec3_from_json(member(j, "position", path), child(path, "position"));
  const json& anchor = member(j, "anchored_on", path);
  if (anchor.is_string()) {
    if (anchor.get<std::string>() != "ground") throw ParseError(child(path, "anchored_on"), "expected a surface id or \"ground\"");
  } else {
    p.anchored_on.surface = unsigned_integer(anchor, child(path, "anchored_on"));
  }
  if (const json* t = find(j, "timestamp")) p.timestamp = timestamp_from(*t, child(path, "timestamp"));
  return p;
}

json trajectory_to_json(const Trajectory& t) { return {{"identity", t.identity}, {"points", t.points}}; }

Trajectory trajectory_from_json(const json& j, const std::string& path) {
  object(j, path);
  Trajectory t;
  t.identity = string_at(j, "identity", path);
  const std::string ppath = child(path, "points");
  const json& pts = array(member(j, "points", path), ppath);
  for (std::size_t i = 0; i < pts.size(); ++i) t.points.push_back(unsigned_integer(pts[i], child(ppath, i)));
  return t;
}

json settings_to_json(const SceneSettings& s) {
  return {{"fan", json::array({s.fan.nx, s.fan.ny})},
          {"near", s.near},
          {"far", s.far},
          {"default_building_height", s.default_building_height}};
}

SceneSettings settings_from_json(const json& j, const std::string& path) {
  object(j, path);
  SceneSettings s;
  const std::string fpath = child(path, "fan");
  const json& fan = array(member(j, "fan", path), fpath);
  if (fan.size() != 2) throw ParseError(fpath, "expected [nx, ny]");
  s.fan = {small_int(fan[0], child(fpath, 0)), small_int(fan[1], child(fpath, 1))};
  if (s.fan.nx < 2 || s.fan.ny < 2) throw ParseError(fpath, "fan must be at least 2x2");
  s.near = number_at(j, "near", path);
  s.far = number_at(j, "far", path);
  if (!(s.near > 0.0 && s.near < s.far)) throw ParseError(child(path, "near"), "need 0 < near < far");
  s.default_building_height = number_at(j, "default_building_height", path);
  if (!(s.default_building_height > 0.0)) throw ParseError(child(path, "default_building_height"), "must be positive");
  return s;
}

json textures_to_json(const SceneState& s) {
  json out = json::array();
  for (const SurfaceTexture& t : surface_textures(s)) {
    json uv = json::array();
    for (const Vec2& p : t.uv) uv.push_back(vec2_to_json(p));
    out.push_back({{"surface", t.surface}, {"projector", t.projector}, {"clamped", t.clamped}, {"uv", std::move(uv)}});
  }
  return out;
}

template <class T, class F>
std::vector<T> list_from(const json& root, std::string_view key, F&& read) {
  const std::string path = child("", key);
  const json& arr = array(member(root, key, ""), path);
  std::vector<T> out;
  out.reserve(arr.size());
  for (std::size_t i = 0; i < arr.size(); ++i) out.push_back(read(arr[i], child(path, i)));
  return out;
}

}  // namespace

std::string canonical_dump(const json& j) {
  std::string out;
  write(j, out, 0);
  out += '\n';
  return out;
}

json vec3_to_json(const Vec3& v) { return json::array({v.x, v.y, v.z}); }

Vec3 vec3_from_json(const json& j, const std::string& path) {
  array(j, path);
  if (j.size() != 3) throw ParseError(path, "expected [x, y, z]");
  return {number(j[0], child(path, 0)), number(j[1], child(path, 1)), number(j[2], child(path, 2))};
}

json geo_to_json(const GeoCoord& g) {
  json j = {{"lat", g.lat}, {"lon", g.lon}};
  if (g.alt) j["alt"] = *g.alt;
  return j;
}

GeoCoord geo_from_json(const json& j, const std::string& path) {
  object(j, path);
  return {number_at(j, "lat", path), number_at(j, "lon", path), opt_number(j, "alt", path)};
}

json frame_to_json(const LocalFrame& f) {
  return {{"anchor",
           {{"zone", f.anchor.zone},
            {"hemisphere", f.anchor.hemisphere == Hemisphere::North ? "N" : "S"},
            {"easting", f.anchor.easting},
            {"northing", f.anchor.northing}}},
          {"anchor_geo", geo_to_json(f.anchor_geo)},
          {"base_elevation", f.base_elevation}};
}

LocalFrame frame_from_json(const json& j, const std::string& path) {
  object(j, path);
  LocalFrame f;
  const std::string apath = child(path, "anchor");
  const json& a = object(member(j, "anchor", path), apath);
  f.anchor.zone = small_int(member(a, "zone", apath), child(apath, "zone"));
  if (f.anchor.zone < 1 || f.anchor.zone > 60) throw ParseError(child(apath, "zone"), "zone must be 1-60");
  const std::string h = string_at(a, "hemisphere", apath);
  if (h != "N" && h != "S") throw ParseError(child(apath, "hemisphere"), "expected \"N\" or \"S\"");
  f.anchor.hemisphere = h == "N" ? Hemisphere::North : Hemisphere::South;
  f.anchor.easting = number_at(a, "easting", apath);
  f.anchor.northing = number_at(a, "northing", apath);
  f.anchor_geo = geo_from_json(member(j, "anchor_geo", path), child(path, "anchor_geo"));
  f.base_elevation = number_at(j, "base_elevation", path);
  return f;
}

json image_to_json(const ImageRecord& im) {
  json j = {{"image_id", im.image_id},       {"source_path", im.source_path}, {"width", im.width},
            {"height", im.height},           {"geo", geo_to_json(im.geo)},    {"orientation", im.orientation},
            {"focal35_unscaled", im.focal35_unscaled}};
  if (im.heading) j["heading"] = *im.heading;
  if (im.timestamp) j["timestamp"] = format_iso8601(*im.timestamp);
  if (im.focal35) j["focal35"] = *im.focal35;
  return j;
}

ImageRecord image_from_json(const json& j, const std::string& path) {
  object(j, path);
  ImageRecord im;
  im.image_id = string_at(j, "image_id", path);
  if (const auto sp = opt_string(j, "source_path", path)) im.source_path = *sp;
  im.width = small_int(member(j, "width", path), child(path, "width"));
  im.height = small_int(member(j, "height", path), child(path, "height"));
  im.geo = geo_from_json(member(j, "geo", path), child(path, "geo"));
  im.heading = opt_number(j, "heading", path);
  if (const json* t = find(j, "timestamp")) im.timestamp = timestamp_from(*t, child(path, "timestamp"));
  im.focal35 = opt_number(j, "focal35", path);
  if (const json* u = find(j, "focal35_unscaled")) im.focal35_unscaled = boolean(*u, child(path, "focal35_unscaled"));
  if (const json* o = find(j, "orientation")) im.orientation = small_int(*o, child(path, "orientation"));
  try {
    validate(im);
  } catch (const DomainError& e) {
    throw ParseError(path, e.what());
  }
  return im;
}

json pose_to_json(const ProjectorPose& p) {
  return {{"position", vec3_to_json(p.position)}, {"yaw", p.yaw}, {"pitch", p.pitch}, {"roll", p.roll}};
}

ProjectorPose pose_from_json(const json& j, const std::string& path) {
  object(j, path);
  ProjectorPose p;
  p.position = vec3_from_json(member(j, "position", path), child(path, "position"));
  p.yaw = number_at(j, "yaw", path);
  p.pitch = number_at(j, "pitch", path);
  p.roll = number_at(j, "roll", path);
  return p;
}

json detection_to_json(const Detection& d) {
  json j = {{"image_id", d.image_id},
            {"class_label", d.class_label},
            {"confidence", d.confidence},
            {"bbox", json::array({d.bbox.x, d.bbox.y, d.bbox.w, d.bbox.h})}};
  if (d.identity) j["identity"] = *d.identity;
  return j;
}

Detection detection_from_json(const json& j, const std::string& path) {
  object(j, path);
  Detection d;
  d.image_id = string_at(j, "image_id", path);
  d.class_label = string_at(j, "class_label", path);
  d.confidence = number_at(j, "confidence", path);
  const std::string bpath = child(path, "bbox");
  const json& b = array(member(j, "bbox", path), bpath);
  if (b.size() != 4) throw ParseError(bpath, "expected [x, y, w, h]");
  d.bbox = {number(b[0], child(bpath, 0)), number(b[1], child(bpath, 1)), number(b[2], child(bpath, 2)),
            number(b[3], child(bpath, 3))};
  d.identity = opt_string(j, "identity", path);
  return d;
}

json scene_to_json(const SceneState& s) {
  json j = json::object();
  j["schema_version"] = s.schema_version;
  j["revision"] = s.revision;
  j["frame"] = s.frame ? frame_to_json(*s.frame) : json(nullptr);
  j["settings"] = settings_to_json(s.settings);
  json images = json::array();
  for (const ImageRecord& im : s.images) images.push_back(image_to_json(im));
  j["images"] = std::move(images);
  json buildings = json::array();
  for (const Mesh& m : s.buildings) buildings.push_back(mesh_to_json(m));
  j["buildings"] = std::move(buildings);
  j["terrain"] = s.terrain ? mesh_to_json(*s.terrain) : json(nullptr);
  json projectors = json::array();
  for (const Projector& p : s.projectors) projectors.push_back(projector_to_json(p));
  j["projectors"] = std::move(projectors);
  j["mask_table"] = masks_to_json(s.mask_table);
  j["textures"] = textures_to_json(s);
  json placements = json::array();
  for (const Placement& p : s.placements) placements.push_back(placement_to_json(p));
  j["placements"] = std::move(placements);
  json trajectories = json::array();
  for (const Trajectory& t : s.trajectories) trajectories.push_back(trajectory_to_json(t));
  j["trajectories"] = std::move(trajectories);
  return j;
}

SceneState scene_from_json(const json& j) {
  object(j, "");
  const auto version = integer_at(j, "schema_version", "");
  if (version != kSceneSchemaVersion) throw VersionError(static_cast<int>(version), kSceneSchemaVersion);
  SceneState s;
  s.revision = unsigned_at(j, "revision", "");
  if (const json* f = find(j, "frame")) s.frame = frame_from_json(*f, "/frame");
  s.settings = settings_from_json(member(j, "settings", ""), "/settings");
  s.images = list_from<ImageRecord>(j, "images", image_from_json);
  s.buildings = list_from<Mesh>(j, "buildings", mesh_from_json);
  if (const json* t = find(j, "terrain")) s.terrain = mesh_from_json(*t, "/terrain");
  s.projectors = list_from<Projector>(j, "projectors", projector_from_json);
  s.mask_table = masks_from_json(member(j, "mask_table", ""), "/mask_table");
  s.placements = list_from<Placement>(j, "placements", placement_from_json);
  s.trajectories = list_from<Trajectory>(j, "trajectories", trajectory_from_json);
  return s;
}

}  // namespace ave::interchange

namespace ave {

std::string save_scene(const SceneState& scene) {
  return interchange::canonical_dump(interchange::scene_to_json(scene));
}

SceneState load_scene(std::string_view text) {
  SceneState s = interchange::scene_from_json(jsonio::parse(text));
  validate(s);
  return s;
}

}  // namespace ave
