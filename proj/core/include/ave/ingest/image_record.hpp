#pragma once

#include <optional>
#include <string>

#include "ave/geodesy.hpp"
#include "ave/time.hpp"

namespace ave {

/// Everything the engine knows about one photograph. width/height are the
/// displayed dimensions, i.e. after applying the EXIF orientation.
struct ImageRecord {
  std::string image_id;
  std::string source_path;
  int width = 0;
  int height = 0;
  GeoCoord geo;
  std::optional<double> heading;  // degrees clockwise from true north, [0, 360)
  std::optional<Timestamp> timestamp;
  std::optional<double> focal35;  // mm, 35 mm equivalent unless focal35_unscaled
  bool focal35_unscaled = false;
  int orientation = 1;

  friend bool operator==(const ImageRecord&, const ImageRecord&) = default;
};

/// Throws DomainError when the record breaks its invariants (non-positive
/// size, heading outside [0, 360), orientation outside 1-8, bad lat/lon).
void validate(const ImageRecord& image);

/// 2·atan(18 / focal35) for landscape frames. For portrait frames the
/// 36 mm side follows the long (vertical) axis and the horizontal FOV is
/// derived from the vertical one through the aspect ratio. Degrees.
double horizontal_fov(double focal35, int width, int height);

}  // namespace ave
