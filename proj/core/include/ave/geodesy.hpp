#pragma once

#include <optional>

#include "ave/vec.hpp"

namespace ave {

/// WGS84 geodetic position, degrees. alt is metres above the ellipsoid
/// when known.
struct GeoCoord {
  double lat = 0.0;
  double lon = 0.0;
  std::optional<double> alt;

  friend bool operator==(const GeoCoord&, const GeoCoord&) = default;
};

enum class Hemisphere { North, South };

struct UtmCoord {
  int zone = 0;
  Hemisphere hemisphere = Hemisphere::North;
  double easting = 0.0;
  double northing = 0.0;

  friend bool operator==(const UtmCoord&, const UtmCoord&) = default;
};

/// Anchor of the scene's local ENU frame. Every LocalCoord in a scene is
/// relative to exactly one of these.
struct LocalFrame {
  UtmCoord anchor;
  GeoCoord anchor_geo;
  double base_elevation = 0.0;

  friend bool operator==(const LocalFrame&, const LocalFrame&) = default;
};

/// Standard 6° zoning, no Norway/Svalbard exceptions. Throws DomainError
/// for lon outside [-180, 180]; lon == 180 folds into zone 60.
int zone_for(double lon, double lat);

/// Transverse Mercator on WGS84 (Krüger series to sixth order in the third
/// flattening), k0 = 0.9996, false easting 500 km, false northing 10,000 km
/// south of the equator. Valid for lat in (-80, 84).
UtmCoord latlon_to_utm(const GeoCoord& p);

/// Same projection forced into a given zone. Used where a caller must stay
/// in the scene's zone; |lon - central meridian| beyond ~9° loses accuracy.
UtmCoord latlon_to_utm(const GeoCoord& p, int zone);

/// Inverse of latlon_to_utm. alt is left empty.
GeoCoord utm_to_latlon(const UtmCoord& p);

/// Pure translation into the frame. Cross-zone input throws an Error with
/// code ZoneMismatch naming both zones. z is left at 0; elevation is
/// supplied separately.
LocalCoord utm_to_local(const UtmCoord& p, const LocalFrame& frame);

/// Back from local x/y to UTM in the frame's zone.
UtmCoord local_to_utm(const LocalCoord& p, const LocalFrame& frame);

/// latlon_to_utm then utm_to_local; z = alt - base_elevation when the
/// altitude is known, 0 otherwise.
LocalCoord geo_to_local(const GeoCoord& p, const LocalFrame& frame);

LocalFrame make_frame(const GeoCoord& anchor, double base_elevation = 0.0);
LocalFrame make_frame(const UtmCoord& anchor, double base_elevation = 0.0);

double central_meridian(int zone);

}  // namespace ave
