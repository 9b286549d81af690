#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "ave/detection.hpp"
#include "ave/geodesy.hpp"
#include "ave/ingest/image_record.hpp"
#include "ave/ingest/overpass.hpp"
#include "ave/ingest/terrain.hpp"
#include "ave/meshgen.hpp"
#include "ave/projection.hpp"

namespace ave {

inline constexpr int kSceneSchemaVersion = 1;

/// Eye height assumed for a photo without GPS altitude.
inline constexpr double kDefaultEyeHeight = 1.6;
/// 35 mm equivalent used when the image has no usable focal length.
inline constexpr double kDefaultFocal35 = 28.0;

struct SceneSettings {
  FanResolution fan;
  double near = 0.1;
  double far = 500.0;
  double default_building_height = 8.0;

  friend bool operator==(const SceneSettings&, const SceneSettings&) = default;
};

/// Everything a scene file holds. Projector k belongs to images[k].
struct SceneState {
  int schema_version = kSceneSchemaVersion;
  std::uint64_t revision = 0;
  std::optional<LocalFrame> frame;
  SceneSettings settings;
  std::vector<ImageRecord> images;
  std::vector<Mesh> buildings;
  std::optional<Mesh> terrain;
  std::vector<Projector> projectors;
  SurfaceMaskTable mask_table;
  std::vector<Placement> placements;
  std::vector<Trajectory> trajectories;

  friend bool operator==(const SceneState&, const SceneState&) = default;
};

/// All surfaces in id order: building surfaces, then terrain tiles.
std::vector<Surface> all_surfaces(const SceneState& scene);
const ImageRecord* find_image(const SceneState& scene, std::string_view image_id);

/// Throws Error(DanglingReference) naming the first reference that does
/// not resolve, DomainError for broken invariants (non-dense ids etc.).
void validate(const SceneState& scene);

// Mutations ----------------------------------------------------------------

/// New image, or metadata refresh of an existing image_id (its projector
/// keeps the current pose unless `pose` is given). A scene without a frame
/// is anchored at the first image.
struct AddImage {
  ImageRecord image;
  std::optional<ProjectorPose> pose;
};

struct SetProjectorPose {
  ProjectorId projector_id = 0;
  ProjectorPose pose;
};

/// Replaces the placements of every image named in the batch.
struct AddDetections {
  std::vector<Detection> detections;
};

/// Regenerates all meshes. Surface ids are reallocated densely from 0 in
/// input order, terrain last. Existing placements are re-cast.
struct RebuildGeometry {
  std::vector<BuildingFootprint> footprints;
  std::optional<TerrainGrid> terrain;
  std::optional<double> default_height;
};

/// Moves every local coordinate into the new frame (same zone only).
struct SetFrame {
  LocalFrame frame;
};

struct RecomputeMasks {
  std::optional<FanResolution> fan;
};

using Mutation = std::variant<AddImage, SetProjectorPose, AddDetections, RebuildGeometry, SetFrame, RecomputeMasks>;

/// "add_image", "set_projector_pose", ...
std::string mutation_name(const Mutation& m);

struct ApplyResult {
  SceneState state;
  std::vector<std::string> warnings;
  std::string summary;
};

/// Pure transition: the result has revision + 1 with masks and
/// trajectories brought up to date. A rejected mutation throws (Error and
/// subclasses) and the input scene is untouched.
ApplyResult apply(const SceneState& scene, const Mutation& m);

/// Starting pose for an image: geotag position (z from GPS altitude, else
/// ground + eye height), yaw from heading, level.
ProjectorPose seed_pose(const ImageRecord& image, const LocalFrame& frame, const SurfaceIndex& terrain);
Intrinsics seed_intrinsics(const ImageRecord& image, const SceneSettings& settings);

/// Area-weighted centroid of the footprints' UTM polygons. Throws
/// DomainError when the list is empty or spans zones.
UtmCoord footprint_centroid(const std::vector<BuildingFootprint>& footprints);

// Persistence --------------------------------------------------------------

/// Canonical text: sorted keys, two-space indent, doubles with 17
/// significant digits, trailing newline. Equal scenes give equal bytes.
std::string save_scene(const SceneState& scene);

/// Throws VersionError when schema_version differs, ParseError with the
/// JSON path of the first structural problem, and whatever validate()
/// throws for unresolved references.
SceneState load_scene(std::string_view text);

/// Per textured surface: the chosen projector and one (u, v) per vertex,
/// clamped to the unit square; `clamped` is set when any vertex fell
/// outside the frustum.
struct SurfaceTexture {
  SurfaceId surface = 0;
  ProjectorId projector = 0;
  std::vector<Vec2> uv;
  bool clamped = false;
};

std::vector<SurfaceTexture> surface_textures(const SceneState& scene);

// Export -------------------------------------------------------------------

struct ObjExport {
  std::string obj;
  std::string mtl;
};

/// Wavefront OBJ, one group per surface, plus its material library.
/// mtl_name is the file name the OBJ's mtllib line refers to.
ObjExport export_obj(const SceneState& scene, const std::string& mtl_name);

}  // namespace ave
