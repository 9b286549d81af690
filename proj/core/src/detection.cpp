#include "ave/detection.hpp"

#include <algorithm>
#include <cmath>

#include "json_util.hpp"

namespace ave {

std::optional<std::string> detection_problem(const Detection& d, const ImageSize& size) {
  if (!(d.confidence >= 0.0 && d.confidence <= 1.0)) {
    return "confidence " + std::to_string(d.confidence) + " outside [0, 1]";
  }
  const BoundingBox& b = d.bbox;
  if (!(b.w > 0.0 && b.h > 0.0)) return std::string("bounding box must have positive size");
  if (!(b.x >= 0.0 && b.y >= 0.0 && b.x + b.w <= size.width && b.y + b.h <= size.height)) {
    return "bounding box leaves the " + std::to_string(size.width) + "x" + std::to_string(size.height) + " image";
  }
  if (d.class_label.empty()) return std::string("empty class label");
  return std::nullopt;
}

DetectionBatch parse_detections(std::string_view doc, const std::map<std::string, ImageSize>& images) {
  using namespace jsonio;
  const json root = parse(doc);
  object(root, "");
  if (const auto schema = opt_string(root, "schema", ""); schema && *schema != "ave.detections") {
    throw ParseError("/schema", "expected \"ave.detections\"");
  }
  const auto version = integer_at(root, "schema_version", "");
  if (version != kDetectionSchemaVersion) throw VersionError(static_cast<int>(version), kDetectionSchemaVersion);

  const json& records = array(member(root, "detections", ""), "/detections");
  DetectionBatch out;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const std::string path = child("/detections", i);
    const json& r = object(records[i], path);
    Detection d;
    d.image_id = string_at(r, "image_id", path);
    d.class_label = string_at(r, "class_label", path);
    d.confidence = number_at(r, "confidence", path);
    const std::string bpath = child(path, "bbox");
    const json& bbox = array(member(r, "bbox", path), bpath);
    if (bbox.size() != 4) throw ParseError(bpath, "expected [x, y, w, h]");
    d.bbox = {number(bbox[0], child(bpath, 0)), number(bbox[1], child(bpath, 1)), number(bbox[2], child(bpath, 2)),
              number(bbox[3], child(bpath, 3))};
    d.identity = opt_string(r, "identity", path);

    const auto it = images.find(d.image_id);
    if (it == images.end()) {
      throw Error(ErrorCode::DanglingReference, path + ": unknown image_id '" + d.image_id + "'");
    }
    if (auto problem = detection_problem(d, it->second)) {
      out.warnings.push_back(path + " rejected: " + *problem);
      continue;
    }
    out.detections.push_back(std::move(d));
  }
  return out;
}

Vec2 foot_point(const Detection& det, const ImageSize& size) {
  return {(det.bbox.x + det.bbox.w / 2.0) / size.width, (det.bbox.y + det.bbox.h) / size.height};
}

Ray foot_ray(const Detection& det, const Projector& proj, const ImageSize& size) {
  const Vec2 uv = foot_point(det, size);
  return view_ray(proj, uv.x, uv.y);
}

std::optional<std::pair<double, LocalCoord>> intersect_ground_plane(const Ray& ray, double t_min, double t_max) {
  if (!(ray.direction.z < 0.0) || !(ray.origin.z > 0.0)) return std::nullopt;
  // Scale the direction to a unit drop in z so the horizontal offsets come
  // straight from the direction ratios.
  const double drop = -ray.direction.z;
  const double t = ray.origin.z / drop;
  if (t < t_min || t > t_max) return std::nullopt;
  const LocalCoord p{ray.origin.x + ray.direction.x / drop * ray.origin.z,
                     ray.origin.y + ray.direction.y / drop * ray.origin.z, 0.0};
  return std::pair{t, p};
}

std::optional<Placement> place(const Detection& det, const Projector& proj, const ImageSize& size,
                               const SurfaceIndex& scene, PlacementId id, std::optional<Timestamp> timestamp,
                               GroundPlane ground) {
  const Ray ray = foot_ray(det, proj, size);
  const double near = proj.intrinsics.near, far = proj.intrinsics.far;
  const auto surface_hit = scene.intersect(ray, near, far);
  std::optional<std::pair<double, LocalCoord>> ground_hit;
  if (ground == GroundPlane::Nearest || !surface_hit) ground_hit = intersect_ground_plane(ray, near, far);
  if (!surface_hit && !ground_hit) return std::nullopt;

  Placement p;
  p.id = id;
  p.detection = det;
  p.timestamp = timestamp;
  if (surface_hit && (!ground_hit || surface_hit->t <= ground_hit->first)) {
    p.position = ray.origin + ray.direction * surface_hit->t;
    p.anchored_on.surface = surface_hit->surface_id;
  } else {
    p.position = ground_hit->second;
  }
  return p;
}

TrajectoryLinks link_trajectories(std::span<const Placement> placements) {
  TrajectoryLinks out;
  std::map<std::string, std::vector<const Placement*>> groups;
  for (const Placement& p : placements) {
    const auto& identity = p.detection.identity;
    if (!identity || identity->empty()) {
      if (!p.timestamp) {
        out.warnings.push_back("placement " + std::to_string(p.id) +
                               " has neither identity nor timestamp; excluded from trajectories");
      }
      continue;
    }
    groups[*identity].push_back(&p);
  }
  for (auto& [identity, members] : groups) {
    std::stable_sort(members.begin(), members.end(), [](const Placement* a, const Placement* b) {
      if (a->timestamp.has_value() != b->timestamp.has_value()) return a->timestamp.has_value();
      if (a->timestamp && *a->timestamp != *b->timestamp) return *a->timestamp < *b->timestamp;
      return a->id < b->id;
    });
    Trajectory t;
    t.identity = identity;
    for (const Placement* p : members) t.points.push_back(p->id);
    out.trajectories.push_back(std::move(t));
  }
  return out;
}

}  // namespace ave
