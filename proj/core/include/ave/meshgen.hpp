#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "ave/geodesy.hpp"
#include "ave/ingest/overpass.hpp"
#include "ave/ingest/terrain.hpp"
#include "ave/vec.hpp"

namespace ave {

using SurfaceId = std::uint64_t;

/// Simple polygon in local metres, counter-clockwise, no repeated closing
/// vertex.
struct Polygon2D {
  std::vector<Vec2> vertices;

  friend bool operator==(const Polygon2D&, const Polygon2D&) = default;
};

enum class SurfaceKind { Wall, Roof, Ground };

const char* to_string(SurfaceKind kind) noexcept;

using Triangle = std::array<std::uint32_t, 3>;

/// An individually addressable piece of geometry: one wall, one roof, or
/// one terrain tile. Triangles index into this surface's own vertices and
/// wind counter-clockwise seen from the front (the side normal points to).
struct Surface {
  SurfaceId id = 0;
  SurfaceKind kind = SurfaceKind::Wall;
  std::vector<Triangle> triangles;
  std::vector<LocalCoord> vertices;
  std::optional<Vec3> normal;  // present for planar surfaces

  friend bool operator==(const Surface&, const Surface&) = default;
};

struct Mesh {
  std::optional<std::int64_t> building_id;
  std::vector<Surface> surfaces;
  double base_z = 0.0;

  friend bool operator==(const Mesh&, const Mesh&) = default;
};

// Polygon utilities -------------------------------------------------------

double signed_area(std::span<const Vec2> ring);
double perimeter(std::span<const Vec2> ring);
/// Area centroid. Falls back to the vertex mean for zero-area rings.
Vec2 centroid(std::span<const Vec2> ring);
/// True when no two non-adjacent edges touch or cross.
bool is_simple(std::span<const Vec2> ring);

/// lat/lon ring -> local CCW polygon. Drops the closing duplicate, merges
/// consecutive vertices closer than 1 cm, reverses clockwise input.
/// Throws Error(DegenerateFootprint) with fewer than three vertices left or
/// zero area, Error(NonSimplePolygon) when edges cross, and ZoneMismatch
/// when the ring lies outside the frame's zone.
Polygon2D normalize_footprint(std::span<const GeoCoord> ring, const LocalFrame& frame);

/// Same cleaning rules applied to a ring already in local metres.
Polygon2D clean_polygon(std::vector<Vec2> ring);

/// Quad from p0 to p1 spanning z0..z1. Its outward normal is the edge
/// direction rotated -90°, i.e. the exterior side of a CCW footprint.
Surface wall_quad(Vec2 p0, Vec2 p1, double z0, double z1);

/// One wall per polygon edge. Throws DomainError for height <= 0.
std::vector<Surface> extrude_walls(const Polygon2D& fp, double height, double base_z);

/// Ear clipping. Returns exactly n-2 CCW triangles indexing fp.vertices.
/// Ears are searched from the lowest remaining vertex index, so output is
/// deterministic. Throws NonSimplePolygon / DegenerateFootprint.
std::vector<Triangle> triangulate(const Polygon2D& fp);

/// Flat roof at base_z + height, normal +z.
Surface roof_surface(const Polygon2D& fp, double height, double base_z);

/// Walls then roof for one footprint. base_z is draped from the terrain
/// at the footprint centroid when a grid is supplied and covers it; 0
/// otherwise. Surface ids are left at 0 for the caller to allocate.
Mesh building_mesh(const BuildingFootprint& fp, const LocalFrame& frame, const TerrainGrid* terrain = nullptr,
                   double default_height = 8.0);

/// Cells whose four nodes all carry data become two triangles each;
/// cells are grouped into square tiles of tile_cells x tile_cells, one
/// Ground surface per non-empty tile. z = value - base_elevation.
/// Throws Error(EmptyTerrain) when no cell survives.
Mesh terrain_mesh(const TerrainGrid& grid, const LocalFrame& frame, std::size_t tile_cells = 16);

/// Bilinear interpolation of the four nodes around local (x, y), in grid
/// elevation units (not shifted by base_elevation). Throws
/// Error(NoElevation) outside the node extent or next to NODATA.
double sample_elevation(const TerrainGrid& grid, const LocalFrame& frame, double x, double y);

/// Same, addressed in the grid's native coordinates.
double sample_elevation_native(const TerrainGrid& grid, double gx, double gy);

/// Local position of a grid node (z = value - base_elevation).
LocalCoord terrain_node(const TerrainGrid& grid, const LocalFrame& frame, std::size_t col, std::size_t row);

double triangle_area(const LocalCoord& a, const LocalCoord& b, const LocalCoord& c);
/// Sum of triangle areas of one surface.
double surface_area(const Surface& s);

}  // namespace ave
