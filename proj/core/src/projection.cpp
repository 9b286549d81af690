#include "ave/projection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "ave/error.hpp"

namespace ave {
namespace {

constexpr double kEpsilon = 1e-9;
constexpr double kUvClampTolerance = 1e-9;
constexpr std::uint32_t kLeafSize = 4;

double tan_half(double hfov_deg) {
  double s = 0.0, c = 0.0;
  sincos_deg(hfov_deg / 2.0, s, c);
  return s / c;
}

bool better(const Hit& candidate, const std::optional<Hit>& best) {
  return !best || candidate.t < best->t || (candidate.t == best->t && candidate.surface_id < best->surface_id);
}

}  // namespace

void sincos_deg(double deg, double& s, double& c) {
  double r = std::fmod(deg, 360.0);
  if (r < 0.0) r += 360.0;
  const int quadrant = static_cast<int>(r / 90.0) % 4;
  const double x = r - 90.0 * quadrant;
  constexpr double kRad = std::numbers::pi / 180.0;
  double s0 = 0.0, c0 = 1.0;
  if (x == 0.0) {
    s0 = 0.0;
    c0 = 1.0;
  } else if (x == 45.0) {
    s0 = c0 = std::sqrt(0.5);
  } else if (x < 45.0) {
    s0 = std::sin(x * kRad);
    c0 = std::cos(x * kRad);
  } else {
    s0 = std::cos((90.0 - x) * kRad);
    c0 = std::sin((90.0 - x) * kRad);
  }
  switch (quadrant) {
    case 0:
      s = s0, c = c0;
      break;
    case 1:
      s = c0, c = -s0;
      break;
    case 2:
      s = -s0, c = -c0;
      break;
    default:
      s = -c0, c = s0;
      break;
  }
}

void validate(const Intrinsics& k) {
  if (!(k.hfov > 0.0 && k.hfov < 180.0)) throw DomainError("hfov must lie in (0, 180) degrees");
  if (!(k.aspect > 0.0) || !std::isfinite(k.aspect)) throw DomainError("aspect must be positive");
  if (!(k.near > 0.0 && k.near < k.far) || !std::isfinite(k.far)) throw DomainError("need 0 < near < far");
}

CameraBasis camera_basis(const ProjectorPose& pose) {
  double sy = 0, cy = 0, sp = 0, cp = 0, sr = 0, cr = 0;
  sincos_deg(pose.yaw, sy, cy);
  sincos_deg(pose.pitch, sp, cp);
  sincos_deg(pose.roll, sr, cr);
  const Vec3 forward{sy * cp, cy * cp, sp};
  const Vec3 right0{cy, -sy, 0.0};
  const Vec3 up0{-sy * sp, -cy * sp, cp};
  return {forward, cr * right0 - sr * up0, cr * up0 + sr * right0};
}

Ray view_ray(const Projector& p, double u, double v) {
  const CameraBasis b = camera_basis(p.pose);
  const double th = tan_half(p.intrinsics.hfov);
  const double tv = th / p.intrinsics.aspect;
  const Vec3 d = b.forward + ((2.0 * u - 1.0) * th) * b.right + ((1.0 - 2.0 * v) * tv) * b.up;
  return {p.pose.position, normalized(d)};
}

std::vector<Ray> projector_rays(const Projector& p, int nx, int ny) {
  if (nx < 2 || ny < 2) throw DomainError("ray fan needs at least 2x2 rays");
  std::vector<Ray> rays;
  rays.reserve(static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny));
  for (int j = 0; j < ny; ++j) {
    const double v = static_cast<double>(j) / (ny - 1);
    for (int i = 0; i < nx; ++i) rays.push_back(view_ray(p, static_cast<double>(i) / (nx - 1), v));
  }
  return rays;
}

std::optional<double> intersect_triangle(const Ray& ray, const Vec3& a, const Vec3& b, const Vec3& c) {
  const Vec3 e1 = b - a;
  const Vec3 e2 = c - a;
  const Vec3 pvec = cross(ray.direction, e2);
  const double det = dot(e1, pvec);
  if (det < kEpsilon) return std::nullopt;  // back-facing or parallel
  const double inv = 1.0 / det;
  const Vec3 tvec = ray.origin - a;
  const double u = dot(tvec, pvec) * inv;
  if (u < 0.0 || u > 1.0) return std::nullopt;
  const Vec3 qvec = cross(tvec, e1);
  const double v = dot(ray.direction, qvec) * inv;
  if (v < 0.0 || u + v > 1.0) return std::nullopt;
  return dot(e2, qvec) * inv;
}

// SurfaceIndex ------------------------------------------------------------

SurfaceIndex::SurfaceIndex(std::span<const Surface> surfaces) {
  for (const Surface& s : surfaces) {
    for (const Triangle& t : s.triangles) tris_.push_back({s.vertices[t[0]], s.vertices[t[1]], s.vertices[t[2]], s.id});
  }
  if (!tris_.empty()) {
    nodes_.reserve(2 * tris_.size());
    build(0, static_cast<std::uint32_t>(tris_.size()));
  }
}

std::uint32_t SurfaceIndex::build(std::uint32_t first, std::uint32_t count) {
  const auto index = static_cast<std::uint32_t>(nodes_.size());
  nodes_.emplace_back();
  constexpr double inf = std::numeric_limits<double>::infinity();
  Vec3 lo{inf, inf, inf}, hi{-inf, -inf, -inf};
  Vec3 clo = lo, chi = hi;
  const auto grow = [](Vec3& l, Vec3& h, const Vec3& p) {
    l = {std::min(l.x, p.x), std::min(l.y, p.y), std::min(l.z, p.z)};
    h = {std::max(h.x, p.x), std::max(h.y, p.y), std::max(h.z, p.z)};
  };
  const auto centre = [](const Tri& t) { return (t.a + t.b + t.c) * (1.0 / 3.0); };
  for (std::uint32_t i = first; i < first + count; ++i) {
    grow(lo, hi, tris_[i].a);
    grow(lo, hi, tris_[i].b);
    grow(lo, hi, tris_[i].c);
    grow(clo, chi, centre(tris_[i]));
  }
  nodes_[index].lo = lo;
  nodes_[index].hi = hi;
  if (count <= kLeafSize) {
    nodes_[index].first = first;
    nodes_[index].count = count;
    return index;
  }
  const Vec3 extent = chi - clo;
  const int axis = extent.x >= extent.y && extent.x >= extent.z ? 0 : (extent.y >= extent.z ? 1 : 2);
  const auto key = [axis, &centre](const Tri& t) {
    const Vec3 c = centre(t);
    return axis == 0 ? c.x : (axis == 1 ? c.y : c.z);
  };
  const std::uint32_t half = count / 2;
  std::nth_element(tris_.begin() + first, tris_.begin() + first + half, tris_.begin() + first + count,
                   [&](const Tri& a, const Tri& b) { return key(a) < key(b); });
  const std::uint32_t left = build(first, half);
  const std::uint32_t right = build(first + half, count - half);
  nodes_[index].first = left;
  nodes_[index].right = right;
  nodes_[index].count = 0;
  return index;
}

std::optional<Hit> SurfaceIndex::intersect(const Ray& ray, double t_min, double t_max) const {
  std::optional<Hit> best;
  if (nodes_.empty()) return best;

  const double o[3] = {ray.origin.x, ray.origin.y, ray.origin.z};
  const double d[3] = {ray.direction.x, ray.direction.y, ray.direction.z};
  const auto slab = [&](const Node& n, double limit) {
    const double lo[3] = {n.lo.x, n.lo.y, n.lo.z};
    const double hi[3] = {n.hi.x, n.hi.y, n.hi.z};
    double t0 = t_min, t1 = limit;
    for (int axis = 0; axis < 3; ++axis) {
      if (d[axis] == 0.0) {
        if (o[axis] < lo[axis] || o[axis] > hi[axis]) return false;
        continue;
      }
      const double inv = 1.0 / d[axis];
      double ta = (lo[axis] - o[axis]) * inv, tb = (hi[axis] - o[axis]) * inv;
      if (ta > tb) std::swap(ta, tb);
      t0 = std::max(t0, ta);
      t1 = std::min(t1, tb);
      if (t0 > t1) return false;
    }
    return true;
  };

  std::uint32_t stack[64];
  int top = 0;
  stack[top++] = 0;
  while (top > 0) {
    const Node& n = nodes_[stack[--top]];
    // Boxes are tested against t_max padded by a relative epsilon so that
    // equal-t ties in neighbouring leaves are still examined.
    const double limit = best ? best->t * (1.0 + 1e-12) + 1e-12 : t_max;
    if (!slab(n, limit)) continue;
    if (n.count > 0) {
      for (std::uint32_t i = n.first; i < n.first + n.count; ++i) {
        const Tri& tri = tris_[i];
        const auto t = intersect_triangle(ray, tri.a, tri.b, tri.c);
        if (!t || *t < t_min || *t > t_max) continue;
        const Hit hit{tri.surface, *t};
        if (better(hit, best)) best = hit;
      }
    } else {
      stack[top++] = n.right;
      stack[top++] = n.first;
    }
  }
  return best;
}

std::optional<Hit> intersect(const Ray& ray, std::span<const Surface> surfaces, double t_min, double t_max) {
  return SurfaceIndex(surfaces).intersect(ray, t_min, t_max);
}

std::set<SurfaceId> visible_surfaces(const Projector& p, const SurfaceIndex& index, FanResolution fan) {
  std::set<SurfaceId> seen;
  for (const Ray& ray : projector_rays(p, fan.nx, fan.ny)) {
    if (auto hit = index.intersect(ray, p.intrinsics.near, p.intrinsics.far)) seen.insert(hit->surface_id);
  }
  return seen;
}

std::set<SurfaceId> visible_surfaces(const Projector& p, std::span<const Surface> surfaces, FanResolution fan) {
  return visible_surfaces(p, SurfaceIndex(surfaces), fan);
}

// ProjectorSet ------------------------------------------------------------

void ProjectorSet::set(ProjectorId k) {
  const std::size_t word = k / 64;
  if (words_.size() <= word) words_.resize(word + 1, 0);
  words_[word] |= std::uint64_t{1} << (k % 64);
}

bool ProjectorSet::test(ProjectorId k) const {
  const std::size_t word = k / 64;
  return word < words_.size() && ((words_[word] >> (k % 64)) & 1u) != 0;
}

std::vector<ProjectorId> ProjectorSet::members() const {
  std::vector<ProjectorId> out;
  for (std::size_t w = 0; w < words_.size(); ++w) {
    for (unsigned b = 0; b < 64; ++b) {
      if ((words_[w] >> b) & 1u) out.push_back(static_cast<ProjectorId>(w * 64 + b));
    }
  }
  return out;
}

std::string ProjectorSet::to_hex() const {
  if (words_.empty()) return "0";
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  for (std::size_t w = words_.size(); w-- > 0;) {
    for (int nib = 15; nib >= 0; --nib) {
      const auto digit = static_cast<unsigned>((words_[w] >> (nib * 4)) & 0xF);
      if (out.empty() && digit == 0) continue;
      out.push_back(kDigits[digit]);
    }
  }
  return out;
}

ProjectorSet ProjectorSet::from_hex(std::string_view hex) {
  if (hex.empty()) throw DomainError("empty projector-set literal");
  ProjectorSet s;
  const std::size_t n = hex.size();
  s.words_.assign((n + 15) / 16, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const char ch = hex[n - 1 - i];
    unsigned digit = 0;
    if (ch >= '0' && ch <= '9') {
      digit = static_cast<unsigned>(ch - '0');
    } else if (ch >= 'a' && ch <= 'f') {
      digit = static_cast<unsigned>(ch - 'a' + 10);
    } else {
      throw DomainError("'" + std::string(hex) + "' is not a lowercase hex projector set");
    }
    s.words_[i / 16] |= std::uint64_t{digit} << ((i % 16) * 4);
  }
  s.trim();
  return s;
}

void ProjectorSet::trim() {
  while (!words_.empty() && words_.back() == 0) words_.pop_back();
}

bool operator<(const ProjectorSet& a, const ProjectorSet& b) {
  if (a.words_.size() != b.words_.size()) return a.words_.size() < b.words_.size();
  for (std::size_t w = a.words_.size(); w-- > 0;) {
    if (a.words_[w] != b.words_[w]) return a.words_[w] < b.words_[w];
  }
  return false;
}

// Masks -------------------------------------------------------------------

void rebuild_pool(SurfaceMaskTable& table) {
  table.pool.clear();
  if (table.masks.empty()) table.pool.emplace(ProjectorSet{}, 0);
  for (const auto& [surface, set] : table.masks) table.pool.emplace(set, 0);
  std::uint32_t next = 0;
  for (auto& [set, id] : table.pool) id = next++;
}

SurfaceMaskTable assign_masks(std::span<const Projector> projectors, std::span<const Surface> surfaces,
                              FanResolution fan) {
  for (std::size_t k = 0; k < projectors.size(); ++k) {
    if (projectors[k].id != k) throw DomainError("projector ids must be dense and ordered 0..P-1");
  }
  SurfaceMaskTable table;
  for (const Surface& s : surfaces) table.masks.emplace(s.id, ProjectorSet{});
  if (!surfaces.empty() && !projectors.empty()) {
    const SurfaceIndex index(surfaces);
    for (const Projector& p : projectors) {
      for (SurfaceId id : visible_surfaces(p, index, fan)) table.masks[id].set(p.id);
    }
  }
  rebuild_pool(table);
  return table;
}

// UV ------------------------------------------------------------------------

std::optional<ViewPoint> project_to_view(const Projector& p, const LocalCoord& point) {
  const CameraBasis b = camera_basis(p.pose);
  const Vec3 d = point - p.pose.position;
  const double depth = dot(d, b.forward);
  if (!(depth > 0.0)) return std::nullopt;
  const double th = tan_half(p.intrinsics.hfov);
  const double tv = th / p.intrinsics.aspect;
  const double x = dot(d, b.right) / (depth * th);
  const double y = dot(d, b.up) / (depth * tv);
  return ViewPoint{(x + 1.0) / 2.0, (1.0 - y) / 2.0, depth};
}

std::optional<Vec2> project_uv(const Projector& p, const LocalCoord& point) {
  const auto vp = project_to_view(p, point);
  if (!vp || vp->depth < p.intrinsics.near || vp->depth > p.intrinsics.far) return std::nullopt;
  const auto inside = [](double x) { return x >= -kUvClampTolerance && x <= 1.0 + kUvClampTolerance; };
  if (!inside(vp->u) || !inside(vp->v)) return std::nullopt;
  return Vec2{std::clamp(vp->u, 0.0, 1.0), std::clamp(vp->v, 0.0, 1.0)};
}

std::map<SurfaceId, ProjectorId> texture_assignment(const SurfaceMaskTable& table,
                                                    std::span<const Projector> projectors) {
  std::map<SurfaceId, ProjectorId> out;
  for (const auto& [surface, set] : table.masks) {
    std::optional<ProjectorId> chosen;
    for (ProjectorId k : set.members()) {
      if (k >= projectors.size()) throw DomainError("mask references unknown projector " + std::to_string(k));
      if (!chosen) {
        chosen = k;
        continue;
      }
      const auto& cur = projectors[*chosen].priority_timestamp;
      const auto& cand = projectors[k].priority_timestamp;
      // Members arrive in ascending id order, so only a strictly newer
      // timestamp displaces the current choice.
      if (cand && (!cur || *cand > *cur)) chosen = k;
    }
    if (chosen) out.emplace(surface, *chosen);
  }
  return out;
}

}  // namespace ave
