#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ave/ingest/image_record.hpp"
#include "ave/projection.hpp"

namespace ave {

using PlacementId = std::uint64_t;

struct BoundingBox {
  double x = 0.0;  // top-left, pixels
  double y = 0.0;
  double w = 0.0;
  double h = 0.0;

  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

struct Detection {
  std::string image_id;
  std::string class_label;
  double confidence = 0.0;
  BoundingBox bbox;
  std::optional<std::string> identity;

  friend bool operator==(const Detection&, const Detection&) = default;
};

struct ImageSize {
  int width = 0;
  int height = 0;
};

inline constexpr int kDetectionSchemaVersion = 1;

struct DetectionBatch {
  std::vector<Detection> detections;
  std::vector<std::string> warnings;
};

/// Reads the detection interchange document:
///
///   {"schema": "ave.detections", "schema_version": 1,
///    "detections": [{"image_id", "class_label", "confidence",
///                    "bbox": [x, y, w, h], "identity"?}]}
///
/// Each record is checked against its image's size. Records with
/// confidence outside [0, 1], non-positive box size or a box leaving the
/// image are dropped with a warning. Throws Error(DanglingReference) for an
/// image_id absent from `images`, VersionError for other schema versions,
/// ParseError for structural problems.
DetectionBatch parse_detections(std::string_view doc, const std::map<std::string, ImageSize>& images);

/// Record-level check used by parse_detections and scene mutations.
/// Returns the reason a detection is unusable, or nullopt when it is fine.
std::optional<std::string> detection_problem(const Detection& d, const ImageSize& size);

/// Normalized view-plane position of the box's bottom centre.
Vec2 foot_point(const Detection& det, const ImageSize& size);

/// Ray through the foot point, where a grounded object meets the ground.
Ray foot_ray(const Detection& det, const Projector& proj, const ImageSize& size);

/// What a placement landed on. An empty surface means the z = 0 ground
/// plane.
struct Anchor {
  std::optional<SurfaceId> surface;

  bool is_ground_plane() const { return !surface.has_value(); }
  friend bool operator==(const Anchor&, const Anchor&) = default;
};

struct Placement {
  PlacementId id = 0;
  Detection detection;
  LocalCoord position;
  Anchor anchored_on;
  std::optional<Timestamp> timestamp;

  friend bool operator==(const Placement&, const Placement&) = default;
};

/// Hit of a ray with the plane z = 0 within [t_min, t_max], as a point.
std::optional<std::pair<double, LocalCoord>> intersect_ground_plane(const Ray& ray, double t_min, double t_max);

/// How the z = 0 plane takes part in placement. Nearest: it competes with
/// the surfaces. Fallback: it is used only when no surface is hit (scenes
/// with a terrain mesh, where the terrain is the ground).
enum class GroundPlane { Nearest, Fallback };

/// Casts the foot ray against the scene and the ground plane and keeps the
/// nearest hit inside the projector's [near, far]. nullopt when the ray
/// leaves the scene (e.g. aims at the sky); the caller reports that as
/// unplaceable.
std::optional<Placement> place(const Detection& det, const Projector& proj, const ImageSize& size,
                               const SurfaceIndex& scene, PlacementId id, std::optional<Timestamp> timestamp,
                               GroundPlane ground = GroundPlane::Nearest);

struct Trajectory {
  std::string identity;
  std::vector<PlacementId> points;

  friend bool operator==(const Trajectory&, const Trajectory&) = default;
};

struct TrajectoryLinks {
  std::vector<Trajectory> trajectories;
  std::vector<std::string> warnings;
};

/// Groups placements by identity label (ascending label order) and sorts
/// each group by timestamp, stable on placement id. Placements without an
/// identity are not linked; those lacking both identity and timestamp are
/// reported. Untimestamped members of a group go last.
TrajectoryLinks link_trajectories(std::span<const Placement> placements);

}  // namespace ave
