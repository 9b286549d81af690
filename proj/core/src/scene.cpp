#include "ave/scene.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "ave/error.hpp"

namespace ave {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::map<std::string, ImageSize> image_sizes(const SceneState& s) {
  std::map<std::string, ImageSize> out;
  for (const ImageRecord& im : s.images) out.emplace(im.image_id, ImageSize{im.width, im.height});
  return out;
}

std::size_t image_index(const SceneState& s, std::string_view id) {
  for (std::size_t i = 0; i < s.images.size(); ++i) {
    if (s.images[i].image_id == id) return i;
  }
  throw Error(ErrorCode::DanglingReference, "unknown image_id '" + std::string(id) + "'");
}

SurfaceIndex terrain_index(const SceneState& s) {
  if (!s.terrain) return {};
  return SurfaceIndex(s.terrain->surfaces);
}

void recompute_masks(SceneState& s) {
  const std::vector<Surface> surfaces = all_surfaces(s);
  s.mask_table = assign_masks(s.projectors, surfaces, s.settings.fan);
}

void relink(SceneState& s, std::vector<std::string>& warnings) {
  TrajectoryLinks links = link_trajectories(s.placements);
  s.trajectories = std::move(links.trajectories);
  warnings.insert(warnings.end(), links.warnings.begin(), links.warnings.end());
}

// Casts every detection again and renumbers the survivors 0..n-1.
std::vector<Placement> cast_placements(const SceneState& s, const std::vector<Detection>& detections,
                                       std::vector<std::string>& warnings) {
  const std::vector<Surface> surfaces = all_surfaces(s);
  const SurfaceIndex index(surfaces);
  const GroundPlane ground = s.terrain ? GroundPlane::Fallback : GroundPlane::Nearest;
  std::vector<Placement> out;
  for (const Detection& det : detections) {
    const std::size_t k = image_index(s, det.image_id);
    const ImageRecord& im = s.images[k];
    auto p = place(det, s.projectors[k], ImageSize{im.width, im.height}, index, out.size(), im.timestamp, ground);
    if (!p) {
      warnings.push_back("unplaceable: " + det.class_label + " in " + det.image_id +
                         " (foot ray leaves the scene)");
      continue;
    }
    out.push_back(std::move(*p));
  }
  return out;
}

std::vector<Detection> detections_of(const std::vector<Placement>& placements) {
  std::vector<Detection> out;
  out.reserve(placements.size());
  for (const Placement& p : placements) out.push_back(p.detection);
  return out;
}

void translate(Mesh& mesh, const Vec3& delta) {
  mesh.base_z += delta.z;
  for (Surface& s : mesh.surfaces) {
    for (LocalCoord& v : s.vertices) v = v + delta;
  }
}

std::string apply_add_image(SceneState& s, const AddImage& m, std::vector<std::string>&) {
  validate(m.image);
  if (!s.frame) s.frame = make_frame(m.image.geo);
  const auto it = std::find_if(s.images.begin(), s.images.end(),
                               [&](const ImageRecord& im) { return im.image_id == m.image.image_id; });
  Projector proj;
  if (it == s.images.end()) {
    proj.id = static_cast<ProjectorId>(s.projectors.size());
    proj.pose = m.pose.value_or(seed_pose(m.image, *s.frame, terrain_index(s)));
    s.images.push_back(m.image);
  } else {
    proj = s.projectors[static_cast<std::size_t>(it - s.images.begin())];
    if (m.pose) proj.pose = *m.pose;
    *it = m.image;
  }
  proj.image_id = m.image.image_id;
  proj.intrinsics = seed_intrinsics(m.image, s.settings);
  proj.priority_timestamp = m.image.timestamp;
  if (proj.id == s.projectors.size()) {
    s.projectors.push_back(proj);
  } else {
    s.projectors[proj.id] = proj;
  }
  recompute_masks(s);
  return "image " + m.image.image_id + " -> projector " + std::to_string(proj.id);
}

std::string apply_set_pose(SceneState& s, const SetProjectorPose& m, std::vector<std::string>&) {
  if (m.projector_id >= s.projectors.size()) {
    throw Error(ErrorCode::DanglingReference, "unknown projector " + std::to_string(m.projector_id));
  }
  const ProjectorPose& p = m.pose;
  if (!is_finite(p.position) || !std::isfinite(p.yaw) || !std::isfinite(p.pitch) || !std::isfinite(p.roll)) {
    throw DomainError("pose must be finite");
  }
  s.projectors[m.projector_id].pose = p;
  recompute_masks(s);
  return "projector " + std::to_string(m.projector_id) + " pose";
}

std::string apply_add_detections(SceneState& s, const AddDetections& m, std::vector<std::string>& warnings) {
  const auto sizes = image_sizes(s);
  std::set<std::string> batch_images;
  std::vector<Detection> accepted;
  for (const Detection& d : m.detections) {
    const auto it = sizes.find(d.image_id);
    if (it == sizes.end()) throw Error(ErrorCode::DanglingReference, "unknown image_id '" + d.image_id + "'");
    batch_images.insert(d.image_id);
    if (auto problem = detection_problem(d, it->second)) {
      warnings.push_back("detection in " + d.image_id + " rejected: " + *problem);
      continue;
    }
    accepted.push_back(d);
  }
  std::vector<Detection> all;
  for (const Placement& p : s.placements) {
    if (!batch_images.count(p.detection.image_id)) all.push_back(p.detection);
  }
  const std::size_t kept = all.size();
  all.insert(all.end(), accepted.begin(), accepted.end());
  s.placements = cast_placements(s, all, warnings);
  relink(s, warnings);
  return std::to_string(s.placements.size() - std::min(kept, s.placements.size())) + " placements from " +
         std::to_string(m.detections.size()) + " detections";
}

std::string apply_rebuild(SceneState& s, const RebuildGeometry& m, std::vector<std::string>& warnings) {
  if (!s.frame) throw DomainError("scene has no frame; set one before building geometry");
  const double default_height = m.default_height.value_or(s.settings.default_building_height);
  if (!(default_height > 0.0)) throw DomainError("default building height must be positive");
  const TerrainGrid* grid = m.terrain ? &*m.terrain : nullptr;

  std::vector<Mesh> buildings;
  SurfaceId next = 0;
  for (const BuildingFootprint& fp : m.footprints) {
    Mesh mesh;
    try {
      mesh = building_mesh(fp, *s.frame, grid, default_height);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::ZoneMismatch) throw;
      warnings.push_back("building " + std::to_string(fp.osm_id) + " skipped: " + e.what());
      continue;
    }
    for (Surface& surface : mesh.surfaces) surface.id = next++;
    buildings.push_back(std::move(mesh));
  }
  std::optional<Mesh> terrain;
  if (grid) {
    terrain = terrain_mesh(*grid, *s.frame);
    for (Surface& surface : terrain->surfaces) surface.id = next++;
  }
  s.buildings = std::move(buildings);
  s.terrain = std::move(terrain);
  if (m.default_height) s.settings.default_building_height = *m.default_height;

  s.placements = cast_placements(s, detections_of(s.placements), warnings);
  relink(s, warnings);
  recompute_masks(s);
  return std::to_string(s.buildings.size()) + " buildings, " + std::to_string(next) + " surfaces";
}

std::string apply_set_frame(SceneState& s, const SetFrame& m, std::vector<std::string>&) {
  const LocalFrame& to = m.frame;
  if (s.frame) {
    const LocalFrame& from = *s.frame;
    if (from.anchor.zone != to.anchor.zone || from.anchor.hemisphere != to.anchor.hemisphere) {
      throw Error(ErrorCode::ZoneMismatch, "new frame is in zone " + std::to_string(to.anchor.zone) +
                                               ", scene is in zone " + std::to_string(from.anchor.zone));
    }
    const Vec3 delta{from.anchor.easting - to.anchor.easting, from.anchor.northing - to.anchor.northing,
                     from.base_elevation - to.base_elevation};
    for (Mesh& b : s.buildings) translate(b, delta);
    if (s.terrain) translate(*s.terrain, delta);
    for (Projector& p : s.projectors) p.pose.position = p.pose.position + delta;
    for (Placement& p : s.placements) p.position = p.position + delta;
  }
  s.frame = to;
  // Placements on the ground plane move with z = 0, so they are re-cast.
  std::vector<std::string> ignored;
  s.placements = cast_placements(s, detections_of(s.placements), ignored);
  relink(s, ignored);
  return "frame anchored at zone " + std::to_string(to.anchor.zone) + " E" + std::to_string(to.anchor.easting) +
         " N" + std::to_string(to.anchor.northing);
}

std::string apply_recompute(SceneState& s, const RecomputeMasks& m, std::vector<std::string>&) {
  if (m.fan) {
    if (m.fan->nx < 2 || m.fan->ny < 2) throw DomainError("fan resolution must be at least 2x2");
    s.settings.fan = *m.fan;
  }
  recompute_masks(s);
  return "pool size " + std::to_string(s.mask_table.pool.size());
}

}  // namespace

std::vector<Surface> all_surfaces(const SceneState& scene) {
  std::vector<Surface> out;
  for (const Mesh& m : scene.buildings) out.insert(out.end(), m.surfaces.begin(), m.surfaces.end());
  if (scene.terrain) out.insert(out.end(), scene.terrain->surfaces.begin(), scene.terrain->surfaces.end());
  return out;
}

const ImageRecord* find_image(const SceneState& scene, std::string_view image_id) {
  for (const ImageRecord& im : scene.images) {
    if (im.image_id == image_id) return &im;
  }
  return nullptr;
}

void validate(const SceneState& scene) {
  const auto dangling = [](const std::string& what) { throw Error(ErrorCode::DanglingReference, what); };
  if (scene.projectors.size() != scene.images.size()) {
    throw DomainError("expected one projector per image (" + std::to_string(scene.images.size()) + " images, " +
                      std::to_string(scene.projectors.size()) + " projectors)");
  }
  std::set<std::string> ids;
  for (const ImageRecord& im : scene.images) {
    validate(im);
    if (!ids.insert(im.image_id).second) throw DomainError("duplicate image_id '" + im.image_id + "'");
  }
  for (std::size_t k = 0; k < scene.projectors.size(); ++k) {
    const Projector& p = scene.projectors[k];
    if (p.id != k) throw DomainError("projector ids must be dense 0..P-1");
    if (p.image_id != scene.images[k].image_id) {
      dangling("projector " + std::to_string(k) + " refers to image '" + p.image_id + "'");
    }
    validate(p.intrinsics);
  }
  std::set<SurfaceId> surfaces;
  for (const Surface& s : all_surfaces(scene)) {
    if (!surfaces.insert(s.id).second) throw DomainError("duplicate surface id " + std::to_string(s.id));
    for (const Triangle& t : s.triangles) {
      for (auto i : t) {
        if (i >= s.vertices.size()) throw DomainError("surface " + std::to_string(s.id) + " indexes past its vertices");
      }
    }
  }
  for (const auto& [surface, set] : scene.mask_table.masks) {
    if (!surfaces.count(surface)) dangling("mask for unknown surface " + std::to_string(surface));
    for (ProjectorId k : set.members()) {
      if (k >= scene.projectors.size()) dangling("mask references unknown projector " + std::to_string(k));
    }
    if (!scene.mask_table.pool.count(set)) throw DomainError("mask " + set.to_hex() + " missing from pool");
  }
  std::set<PlacementId> placements;
  for (const Placement& p : scene.placements) {
    if (!ids.count(p.detection.image_id)) dangling("placement " + std::to_string(p.id) + " refers to unknown image '" + p.detection.image_id + "'");
    if (p.anchored_on.surface && !surfaces.count(*p.anchored_on.surface)) {
      dangling("placement " + std::to_string(p.id) + " anchored on unknown surface");
    }
    if (!is_finite(p.position)) throw DomainError("placement " + std::to_string(p.id) + " is not finite");
    if (!placements.insert(p.id).second) throw DomainError("duplicate placement id " + std::to_string(p.id));
  }
  for (const Trajectory& t : scene.trajectories) {
    if (t.points.empty()) throw DomainError("trajectory '" + t.identity + "' is empty");
    for (PlacementId id : t.points) {
      if (!placements.count(id)) dangling("trajectory '" + t.identity + "' refers to unknown placement");
    }
  }
}

std::string mutation_name(const Mutation& m) {
  return std::visit(overloaded{
                        [](const AddImage&) { return "add_image"; },
                        [](const SetProjectorPose&) { return "set_projector_pose"; },
                        [](const AddDetections&) { return "add_detections"; },
                        [](const RebuildGeometry&) { return "rebuild_geometry"; },
                        [](const SetFrame&) { return "set_frame"; },
                        [](const RecomputeMasks&) { return "recompute_masks"; },
                    },
                    m);
}

ApplyResult apply(const SceneState& scene, const Mutation& m) {
  ApplyResult r{scene, {}, {}};
  r.summary = std::visit(overloaded{
                             [&](const AddImage& x) { return apply_add_image(r.state, x, r.warnings); },
                             [&](const SetProjectorPose& x) { return apply_set_pose(r.state, x, r.warnings); },
                             [&](const AddDetections& x) { return apply_add_detections(r.state, x, r.warnings); },
                             [&](const RebuildGeometry& x) { return apply_rebuild(r.state, x, r.warnings); },
                             [&](const SetFrame& x) { return apply_set_frame(r.state, x, r.warnings); },
                             [&](const RecomputeMasks& x) { return apply_recompute(r.state, x, r.warnings); },
                         },
                         m);
  r.state.revision = scene.revision + 1;
  return r;
}

ProjectorPose seed_pose(const ImageRecord& image, const LocalFrame& frame, const SurfaceIndex& terrain) {
  ProjectorPose pose;
  pose.position = geo_to_local(image.geo, frame);
  if (!image.geo.alt) {
    double ground = 0.0;
    const Ray down{{pose.position.x, pose.position.y, 1.0e5}, {0.0, 0.0, -1.0}};
    if (auto hit = terrain.intersect(down, 0.0, 2.0e5)) ground = down.origin.z - hit->t;
    pose.position.z = ground + kDefaultEyeHeight;
  }
  pose.yaw = image.heading.value_or(0.0);
  return pose;
}

Intrinsics seed_intrinsics(const ImageRecord& image, const SceneSettings& settings) {
  Intrinsics k;
  const double f = image.focal35 && !image.focal35_unscaled ? *image.focal35 : kDefaultFocal35;
  k.hfov = horizontal_fov(f, image.width, image.height);
  k.aspect = static_cast<double>(image.width) / image.height;
  k.near = settings.near;
  k.far = settings.far;
  validate(k);
  return k;
}

UtmCoord footprint_centroid(const std::vector<BuildingFootprint>& footprints) {
  if (footprints.empty()) throw DomainError("no footprints to take a centroid of");
  std::optional<UtmCoord> ref;
  double area_sum = 0.0, cx = 0.0, cy = 0.0;
  for (const BuildingFootprint& fp : footprints) {
    std::vector<Vec2> ring;
    for (const GeoCoord& g : fp.ring) {
      const UtmCoord u = latlon_to_utm(g);
      if (!ref) ref = u;
      if (u.zone != ref->zone || u.hemisphere != ref->hemisphere) {
        throw Error(ErrorCode::ZoneMismatch, "footprints span UTM zones " + std::to_string(ref->zone) + " and " +
                                                 std::to_string(u.zone));
      }
      // Relative to the first vertex seen, to keep the shoelace well conditioned.
      ring.push_back({u.easting - ref->easting, u.northing - ref->northing});
    }
    if (ring.size() > 1 && ring.front() == ring.back()) ring.pop_back();
    if (ring.size() < 3) continue;
    const double a = std::abs(signed_area(ring));
    const Vec2 c = centroid(ring);
    area_sum += a;
    cx += a * c.x;
    cy += a * c.y;
  }
  if (!ref || !(area_sum > 0.0)) throw DomainError("footprints have no area");
  UtmCoord out = *ref;
  out.easting += cx / area_sum;
  out.northing += cy / area_sum;
  return out;
}

std::vector<SurfaceTexture> surface_textures(const SceneState& scene) {
  const auto assignment = texture_assignment(scene.mask_table, scene.projectors);
  std::vector<SurfaceTexture> out;
  for (const Surface& s : all_surfaces(scene)) {
    const auto it = assignment.find(s.id);
    if (it == assignment.end()) continue;
    const Projector& p = scene.projectors[it->second];
    SurfaceTexture t;
    t.surface = s.id;
    t.projector = p.id;
    for (const LocalCoord& v : s.vertices) {
      Vec2 uv{0.0, 0.0};
      bool inside = false;
      if (auto exact = project_uv(p, v)) {
        uv = *exact;
        inside = true;
      } else if (auto vp = project_to_view(p, v)) {
        uv = {std::clamp(vp->u, 0.0, 1.0), std::clamp(vp->v, 0.0, 1.0)};
      }
      t.clamped = t.clamped || !inside;
      t.uv.push_back(uv);
    }
    out.push_back(std::move(t));
  }
  return out;
}

}  // namespace ave
