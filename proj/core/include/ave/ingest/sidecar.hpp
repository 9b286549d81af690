#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "ave/ingest/exif.hpp"
#include "ave/ingest/image_record.hpp"

namespace ave {

inline constexpr int kSidecarSchemaVersion = 1;

/// Per-image metadata file. Every field is optional; present fields win
/// over whatever the JPEG carries. Same field names as an image entry in
/// the scene file:
///
///   {"schema_version": 1, "image_id", "source_path", "width", "height",
///    "geo": {"lat", "lon", "alt"?}, "heading", "timestamp",
///    "focal35", "focal35_unscaled", "orientation"}
struct ImageSidecar {
  std::optional<std::string> image_id;
  std::optional<std::string> source_path;
  std::optional<int> width;
  std::optional<int> height;
  std::optional<GeoCoord> geo;
  std::optional<double> heading;
  std::optional<Timestamp> timestamp;
  std::optional<double> focal35;
  std::optional<bool> focal35_unscaled;
  std::optional<int> orientation;
};

/// Throws ParseError with a JSON path, VersionError for other versions.
ImageSidecar parse_sidecar(std::string_view doc);

/// Combines what the JPEG yielded (if anything) with a sidecar (if any).
/// image_id defaults to `default_id`, source_path to `source_path`.
/// Throws ExifError(MissingGeotag) when neither source has a position,
/// DomainError when the merged record is invalid (e.g. no dimensions).
ImageRecord merge_image_metadata(const std::optional<ExifData>& exif, const std::optional<ImageSidecar>& sidecar,
                                 const std::string& default_id, const std::string& source_path);

}  // namespace ave
