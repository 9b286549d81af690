#include "ave/meshgen.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include "ave/error.hpp"

namespace ave {
namespace {

constexpr double kMergeEpsilon = 0.01;      // metres
constexpr double kEarAreaTolerance = 1e-9;  // m², collinear-ear guard

double orient(Vec2 a, Vec2 b, Vec2 c) { return cross(b - a, c - a); }

bool on_segment(Vec2 a, Vec2 b, Vec2 p) {
  return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) && std::min(a.y, b.y) <= p.y &&
         p.y <= std::max(a.y, b.y);
}

bool segments_touch(Vec2 a, Vec2 b, Vec2 c, Vec2 d) {
  const double o1 = orient(a, b, c), o2 = orient(a, b, d), o3 = orient(c, d, a), o4 = orient(c, d, b);
  if (((o1 > 0 && o2 < 0) || (o1 < 0 && o2 > 0)) && ((o3 > 0 && o4 < 0) || (o3 < 0 && o4 > 0))) return true;
  if (o1 == 0 && on_segment(a, b, c)) return true;
  if (o2 == 0 && on_segment(a, b, d)) return true;
  if (o3 == 0 && on_segment(c, d, a)) return true;
  if (o4 == 0 && on_segment(c, d, b)) return true;
  return false;
}

Error degenerate(const std::string& what) { return Error(ErrorCode::DegenerateFootprint, what); }
Error non_simple(const std::string& what) { return Error(ErrorCode::NonSimplePolygon, what); }

bool point_in_triangle(Vec2 a, Vec2 b, Vec2 c, Vec2 p) {
  return orient(a, b, p) >= 0.0 && orient(b, c, p) >= 0.0 && orient(c, a, p) >= 0.0;
}

}  // namespace

const char* to_string(SurfaceKind kind) noexcept {
  switch (kind) {
    case SurfaceKind::Wall:
      return "wall";
    case SurfaceKind::Roof:
      return "roof";
    case SurfaceKind::Ground:
      return "ground";
  }
  return "?";
}

double signed_area(std::span<const Vec2> ring) {
  double twice = 0.0;
  for (std::size_t i = 0, n = ring.size(); i < n; ++i) twice += cross(ring[i], ring[(i + 1) % n]);
  return twice / 2.0;
}

double perimeter(std::span<const Vec2> ring) {
  double total = 0.0;
  for (std::size_t i = 0, n = ring.size(); i < n; ++i) total += norm(ring[(i + 1) % n] - ring[i]);
  return total;
}

Vec2 centroid(std::span<const Vec2> ring) {
  if (ring.empty()) return {};
  // Shift to the first vertex to keep the products small for UTM-sized input.
  const Vec2 o = ring[0];
  double a2 = 0.0, cx = 0.0, cy = 0.0;
  for (std::size_t i = 0, n = ring.size(); i < n; ++i) {
    const Vec2 p = ring[i] - o, q = ring[(i + 1) % ring.size()] - o;
    const double c = cross(p, q);
    a2 += c;
    cx += (p.x + q.x) * c;
    cy += (p.y + q.y) * c;
  }
  if (std::abs(a2) < 1e-12) {
    Vec2 mean{};
    for (const auto& p : ring) mean = mean + (p - o);
    return o + mean * (1.0 / static_cast<double>(ring.size()));
  }
  return o + Vec2{cx / (3.0 * a2), cy / (3.0 * a2)};
}

bool is_simple(std::span<const Vec2> ring) {
  const std::size_t n = ring.size();
  if (n < 3) return false;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 a = ring[i], b = ring[(i + 1) % n];
    // Adjacent edge folding back onto this one.
    const Vec2 c = ring[(i + 2) % n];
    if (orient(a, b, c) == 0.0 && dot(b - a, c - b) < 0.0) return false;
    for (std::size_t j = i + 2; j < n; ++j) {
      if (i == 0 && j == n - 1) continue;  // adjacent through the wrap
      if (segments_touch(a, b, ring[j], ring[(j + 1) % n])) return false;
    }
  }
  return true;
}

Polygon2D clean_polygon(std::vector<Vec2> ring) {
  if (ring.size() >= 2 && norm(ring.front() - ring.back()) < kMergeEpsilon) ring.pop_back();
  std::vector<Vec2> merged;
  merged.reserve(ring.size());
  for (const Vec2& p : ring) {
    if (merged.empty() || norm(p - merged.back()) >= kMergeEpsilon) merged.push_back(p);
  }
  while (merged.size() >= 2 && norm(merged.front() - merged.back()) < kMergeEpsilon) merged.pop_back();
  if (merged.size() < 3) {
    throw degenerate("footprint has " + std::to_string(merged.size()) + " distinct vertices after cleaning");
  }
  const double area = signed_area(merged);
  if (std::abs(area) <= kEarAreaTolerance) throw degenerate("footprint has zero area");
  if (area < 0.0) std::reverse(merged.begin(), merged.end());
  if (!is_simple(merged)) throw non_simple("footprint ring intersects itself");
  return Polygon2D{std::move(merged)};
}

Polygon2D normalize_footprint(std::span<const GeoCoord> ring, const LocalFrame& frame) {
  std::vector<Vec2> local;
  local.reserve(ring.size());
  for (const GeoCoord& g : ring) {
    const LocalCoord c = utm_to_local(latlon_to_utm(g), frame);
    local.push_back({c.x, c.y});
  }
  return clean_polygon(std::move(local));
}

Surface wall_quad(Vec2 p0, Vec2 p1, double z0, double z1) {
  Surface s;
  s.kind = SurfaceKind::Wall;
  s.vertices = {{p0.x, p0.y, z0}, {p1.x, p1.y, z0}, {p1.x, p1.y, z1}, {p0.x, p0.y, z1}};
  s.triangles = {Triangle{0, 1, 2}, Triangle{0, 2, 3}};
  const Vec2 d = p1 - p0;
  const double len = norm(d);
  s.normal = Vec3{d.y / len, -d.x / len, 0.0};
  return s;
}

std::vector<Surface> extrude_walls(const Polygon2D& fp, double height, double base_z) {
  if (!(height > 0.0)) throw DomainError("wall height must be positive");
  const auto& v = fp.vertices;
  std::vector<Surface> walls;
  walls.reserve(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) walls.push_back(wall_quad(v[i], v[(i + 1) % v.size()], base_z, base_z + height));
  return walls;
}

std::vector<Triangle> triangulate(const Polygon2D& fp) {
  const auto& v = fp.vertices;
  const std::size_t n = v.size();
  if (n < 3) throw degenerate("polygon needs at least 3 vertices");
  const double area = signed_area(v);
  if (std::abs(area) <= kEarAreaTolerance) throw degenerate("polygon has zero area");
  if (!is_simple(v)) throw non_simple("polygon intersects itself");
  if (area < 0.0) throw DomainError("polygon must be counter-clockwise");

  std::vector<std::uint32_t> remaining(n);
  for (std::uint32_t i = 0; i < n; ++i) remaining[i] = i;
  std::vector<Triangle> out;
  out.reserve(n - 2);

  const auto is_ear = [&](std::size_t k) {
    const std::size_t m = remaining.size();
    const auto ia = remaining[(k + m - 1) % m], ib = remaining[k], ic = remaining[(k + 1) % m];
    const Vec2 a = v[ia], b = v[ib], c = v[ic];
    if (orient(a, b, c) / 2.0 <= kEarAreaTolerance) return false;
    for (const auto ip : remaining) {
      if (ip == ia || ip == ib || ip == ic) continue;
      if (point_in_triangle(a, b, c, v[ip])) return false;
    }
    return true;
  };

  while (remaining.size() > 3) {
    const std::size_t m = remaining.size();
    std::size_t chosen = m;
    // remaining stays in ascending index order, so this scan starts at the
    // lowest remaining vertex.
    for (std::size_t k = 0; k < m; ++k) {
      if (is_ear(k)) {
        chosen = k;
        break;
      }
    }
    if (chosen == m) {
      // Numerically stuck (near-collinear chains): take the most convex
      // corner so the count stays n-2.
      double best = -1.0;
      for (std::size_t k = 0; k < m; ++k) {
        const double o = orient(v[remaining[(k + m - 1) % m]], v[remaining[k]], v[remaining[(k + 1) % m]]);
        if (o > best) {
          best = o;
          chosen = k;
        }
      }
    }
    out.push_back({remaining[(chosen + m - 1) % m], remaining[chosen], remaining[(chosen + 1) % m]});
    remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(chosen));
  }
  out.push_back({remaining[0], remaining[1], remaining[2]});
  return out;
}

Surface roof_surface(const Polygon2D& fp, double height, double base_z) {
  Surface s;
  s.kind = SurfaceKind::Roof;
  s.triangles = triangulate(fp);
  s.vertices.reserve(fp.vertices.size());
  for (const Vec2& p : fp.vertices) s.vertices.push_back({p.x, p.y, base_z + height});
  s.normal = Vec3{0.0, 0.0, 1.0};
  return s;
}

Mesh building_mesh(const BuildingFootprint& fp, const LocalFrame& frame, const TerrainGrid* terrain,
                   double default_height) {
  const Polygon2D poly = normalize_footprint(fp.ring, frame);
  const double height = building_height(fp, default_height);
  Mesh mesh;
  mesh.building_id = fp.osm_id;
  if (terrain) {
    const Vec2 c = centroid(poly.vertices);
    try {
      mesh.base_z = sample_elevation(*terrain, frame, c.x, c.y) - frame.base_elevation;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NoElevation) throw;
    }
  }
  mesh.surfaces = extrude_walls(poly, height, mesh.base_z);
  mesh.surfaces.push_back(roof_surface(poly, height, mesh.base_z));
  return mesh;
}

LocalCoord terrain_node(const TerrainGrid& grid, const LocalFrame& frame, std::size_t col, std::size_t row) {
  const double gx = grid.node_x(col), gy = grid.node_y(row);
  LocalCoord p;
  if (grid.crs == GridCrs::Geographic) {
    p = utm_to_local(latlon_to_utm(GeoCoord{gy, gx, std::nullopt}, frame.anchor.zone), frame);
  } else {
    p = {gx - frame.anchor.easting, gy - frame.anchor.northing, 0.0};
  }
  p.z = grid.at(col, row) - frame.base_elevation;
  return p;
}

Mesh terrain_mesh(const TerrainGrid& grid, const LocalFrame& frame, std::size_t tile_cells) {
  if (grid.ncols == 0 || grid.nrows == 0 || grid.values.size() != grid.ncols * grid.nrows) {
    throw Error(ErrorCode::EmptyTerrain, "terrain grid is empty");
  }
  if (tile_cells == 0) throw DomainError("tile size must be positive");
  Mesh mesh;
  const std::size_t cell_cols = grid.ncols > 0 ? grid.ncols - 1 : 0;
  const std::size_t cell_rows = grid.nrows > 0 ? grid.nrows - 1 : 0;
  // Tiles are ordered north-west to south-east.
  for (std::size_t ty = 0; ty < cell_rows; ty += tile_cells) {
    for (std::size_t tx = 0; tx < cell_cols; tx += tile_cells) {
      Surface tile;
      tile.kind = SurfaceKind::Ground;
      std::map<std::size_t, std::uint32_t> local_index;
      const auto vertex = [&](std::size_t col, std::size_t row) {
        const std::size_t key = row * grid.ncols + col;
        const auto [it, inserted] = local_index.emplace(key, static_cast<std::uint32_t>(tile.vertices.size()));
        if (inserted) tile.vertices.push_back(terrain_node(grid, frame, col, row));
        return it->second;
      };
      for (std::size_t r = ty; r < std::min(ty + tile_cells, cell_rows); ++r) {
        for (std::size_t c = tx; c < std::min(tx + tile_cells, cell_cols); ++c) {
          if (grid.is_nodata(c, r) || grid.is_nodata(c + 1, r) || grid.is_nodata(c, r + 1) ||
              grid.is_nodata(c + 1, r + 1)) {
            continue;
          }
          // Row r is north of row r + 1.
          const auto nw = vertex(c, r), ne = vertex(c + 1, r), sw = vertex(c, r + 1), se = vertex(c + 1, r + 1);
          tile.triangles.push_back({sw, se, ne});
          tile.triangles.push_back({sw, ne, nw});
        }
      }
      if (!tile.triangles.empty()) mesh.surfaces.push_back(std::move(tile));
    }
  }
  if (mesh.surfaces.empty()) {
    throw Error(ErrorCode::EmptyTerrain, "terrain grid has no cell with four valid nodes");
  }
  return mesh;
}

double sample_elevation_native(const TerrainGrid& grid, double gx, double gy) {
  const auto none = [&](const std::string& why) {
    return Error(ErrorCode::NoElevation, "no elevation at (" + std::to_string(gx) + ", " + std::to_string(gy) +
                                             "): " + why);
  };
  if (grid.ncols == 0 || grid.nrows == 0) throw none("empty grid");
  const double col = (gx - grid.xll_corner) / grid.cellsize - 0.5;
  const double row = static_cast<double>(grid.nrows) - 0.5 - (gy - grid.yll_corner) / grid.cellsize;
  const double max_col = static_cast<double>(grid.ncols - 1), max_row = static_cast<double>(grid.nrows - 1);
  if (!(col >= 0.0 && col <= max_col && row >= 0.0 && row <= max_row)) throw none("outside the grid");

  const auto c0 = grid.ncols == 1 ? std::size_t{0} : std::min(static_cast<std::size_t>(col), grid.ncols - 2);
  const auto r0 = grid.nrows == 1 ? std::size_t{0} : std::min(static_cast<std::size_t>(row), grid.nrows - 2);
  const std::size_t c1 = std::min(c0 + 1, grid.ncols - 1), r1 = std::min(r0 + 1, grid.nrows - 1);
  const double fx = col - static_cast<double>(c0), fy = row - static_cast<double>(r0);
  if (grid.is_nodata(c0, r0) || grid.is_nodata(c1, r0) || grid.is_nodata(c0, r1) || grid.is_nodata(c1, r1)) {
    throw none("NODATA cell");
  }
  return (1.0 - fx) * (1.0 - fy) * grid.at(c0, r0) + fx * (1.0 - fy) * grid.at(c1, r0) +
         (1.0 - fx) * fy * grid.at(c0, r1) + fx * fy * grid.at(c1, r1);
}

double sample_elevation(const TerrainGrid& grid, const LocalFrame& frame, double x, double y) {
  if (grid.crs == GridCrs::Geographic) {
    const GeoCoord g = utm_to_latlon(local_to_utm({x, y, 0.0}, frame));
    return sample_elevation_native(grid, g.lon, g.lat);
  }
  return sample_elevation_native(grid, x + frame.anchor.easting, y + frame.anchor.northing);
}

double triangle_area(const LocalCoord& a, const LocalCoord& b, const LocalCoord& c) {
  return norm(cross(b - a, c - a)) / 2.0;
}

double surface_area(const Surface& s) {
  double total = 0.0;
  for (const auto& t : s.triangles) total += triangle_area(s.vertices[t[0]], s.vertices[t[1]], s.vertices[t[2]]);
  return total;
}

}  // namespace ave
