#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "ave/meshgen.hpp"
#include "ave/time.hpp"
#include "ave/vec.hpp"

namespace ave {

using ProjectorId = std::uint32_t;

struct Intrinsics {
  double hfov = 65.0;  // degrees, (0, 180)
  double aspect = 4.0 / 3.0;
  double near = 0.1;
  double far = 500.0;

  friend bool operator==(const Intrinsics&, const Intrinsics&) = default;
};

void validate(const Intrinsics& k);

/// Extrinsics. yaw turns clockwise about +z from north (yaw 90 faces east),
/// pitch tilts the view up, roll turns the image clockwise as seen by the
/// camera operator. Angles are kept as given; comparisons go modulo 360.
struct ProjectorPose {
  LocalCoord position;
  double yaw = 0.0;
  double pitch = 0.0;
  double roll = 0.0;

  friend bool operator==(const ProjectorPose&, const ProjectorPose&) = default;
};

struct Projector {
  ProjectorId id = 0;
  std::string image_id;
  ProjectorPose pose;
  Intrinsics intrinsics;
  std::optional<Timestamp> priority_timestamp;

  friend bool operator==(const Projector&, const Projector&) = default;
};

/// Orthonormal camera axes in the local frame.
struct CameraBasis {
  Vec3 forward;
  Vec3 right;
  Vec3 up;
};

CameraBasis camera_basis(const ProjectorPose& pose);

struct Ray {
  Vec3 origin;
  Vec3 direction;  // unit length
};

/// Ray through normalized view-plane coordinates (u right, v down, both
/// 0..1, (0, 0) top-left).
Ray view_ray(const Projector& p, double u, double v);

/// nx x ny rays at u = i/(nx-1), v = j/(ny-1), row-major in j. Includes
/// the four frustum corners. Throws DomainError for nx < 2 or ny < 2.
std::vector<Ray> projector_rays(const Projector& p, int nx, int ny);

struct Hit {
  SurfaceId surface_id = 0;
  double t = 0.0;
};

/// Möller–Trumbore, single-sided: triangles whose front (CCW) face does
/// not face the ray are rejected. Returns the ray parameter on a hit.
std::optional<double> intersect_triangle(const Ray& ray, const Vec3& a, const Vec3& b, const Vec3& c);

/// Bounding-volume hierarchy over every triangle of a surface set, for
/// nearest-hit queries. Ties in t go to the lower surface id.
class SurfaceIndex {
 public:
  SurfaceIndex() = default;
  explicit SurfaceIndex(std::span<const Surface> surfaces);

  std::optional<Hit> intersect(const Ray& ray, double t_min, double t_max) const;
  std::size_t triangle_count() const { return tris_.size(); }

 private:
  struct Tri {
    Vec3 a, b, c;
    SurfaceId surface;
  };
  struct Node {
    Vec3 lo, hi;
    std::uint32_t first = 0;  // leaf: first triangle; inner: left child
    std::uint32_t count = 0;  // 0 for inner nodes
    std::uint32_t right = 0;
  };

  std::uint32_t build(std::uint32_t first, std::uint32_t count);

  std::vector<Tri> tris_;
  std::vector<Node> nodes_;
};

/// Nearest front-facing hit with t in [t_min, t_max].
std::optional<Hit> intersect(const Ray& ray, std::span<const Surface> surfaces, double t_min = 0.1,
                             double t_max = 500.0);

struct FanResolution {
  int nx = 32;
  int ny = 18;

  friend bool operator==(const FanResolution&, const FanResolution&) = default;
};

/// Union of nearest-hit surface ids over the projector's ray fan. Only
/// the first surface each ray meets counts, so geometry hidden behind
/// another surface never receives the photo.
std::set<SurfaceId> visible_surfaces(const Projector& p, const SurfaceIndex& index, FanResolution fan = {});
std::set<SurfaceId> visible_surfaces(const Projector& p, std::span<const Surface> surfaces, FanResolution fan = {});

/// Arbitrary-width set of projector indices, ordered as the unsigned
/// integer whose bit k is projector k.
class ProjectorSet {
 public:
  ProjectorSet() = default;

  void set(ProjectorId k);
  bool test(ProjectorId k) const;
  bool empty() const { return words_.empty(); }
  std::vector<ProjectorId> members() const;
  /// Lowercase hex of the integer value without prefix, "0" when empty.
  std::string to_hex() const;
  /// Inverse of to_hex. Throws DomainError on non-hex input.
  static ProjectorSet from_hex(std::string_view hex);

  friend bool operator==(const ProjectorSet&, const ProjectorSet&) = default;
  friend bool operator<(const ProjectorSet& a, const ProjectorSet& b);

 private:
  void trim();
  std::vector<std::uint64_t> words_;  // little-endian words, no trailing zeros
};

/// Per-surface projector sets plus the pool that gives each distinct set a
/// dense id, assigned in ascending set-value order.
struct SurfaceMaskTable {
  std::map<SurfaceId, ProjectorSet> masks;
  std::map<ProjectorSet, std::uint32_t> pool{{ProjectorSet{}, 0}};

  std::uint32_t pool_id(SurfaceId s) const { return pool.at(masks.at(s)); }

  friend bool operator==(const SurfaceMaskTable&, const SurfaceMaskTable&) = default;
};

/// Rebuilds the pool from the masks. Always contains at least the value of
/// every mask present; with no surfaces it holds only the empty set.
void rebuild_pool(SurfaceMaskTable& table);

SurfaceMaskTable assign_masks(std::span<const Projector> projectors, std::span<const Surface> surfaces,
                              FanResolution fan = {});

struct ViewPoint {
  double u = 0.0;
  double v = 0.0;
  double depth = 0.0;  // along the forward axis
};

/// Projects into the normalized view plane without any frustum test.
/// nullopt only when the point is on or behind the camera plane.
std::optional<ViewPoint> project_to_view(const Projector& p, const LocalCoord& point);

/// (u, v) in [0, 1]² when the point lies inside the frustum (depth in
/// [near, far]); (0, 0) is the image's top-left. Values within 1e-9 of
/// the unit square are clamped onto it.
std::optional<Vec2> project_uv(const Projector& p, const LocalCoord& point);

/// For each surface with a non-empty set: the member with the latest
/// priority_timestamp (missing timestamps rank earliest), ties to the
/// lower id.
std::map<SurfaceId, ProjectorId> texture_assignment(const SurfaceMaskTable& table,
                                                    std::span<const Projector> projectors);

/// sin and cos of an angle in degrees, exact at multiples of 45°.
void sincos_deg(double deg, double& s, double& c);

}  // namespace ave
