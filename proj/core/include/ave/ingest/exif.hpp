#pragma once

#include <cstdint>
#include <optional>
#include <span>

#include "ave/ingest/image_record.hpp"

namespace ave {

/// Raw result of reading a JPEG's Exif block. Fields stay empty when the
/// corresponding tag is absent; no defaults are filled in here.
struct ExifData {
  bool big_endian = false;
  std::optional<double> latitude;
  std::optional<double> longitude;
  std::optional<double> altitude;
  std::optional<double> img_direction;
  std::optional<Timestamp> date_time_original;
  std::optional<double> focal_length_35mm;
  std::optional<double> focal_length;
  std::optional<int> orientation;
  std::optional<int> pixel_x;  // ExifIFD PixelXDimension
  std::optional<int> pixel_y;
  std::optional<int> frame_width;  // from the SOF marker
  std::optional<int> frame_height;

  bool has_geotag() const { return latitude.has_value() && longitude.has_value(); }
};

/// Walks the JPEG marker stream and decodes IFD0, the Exif IFD and the GPS
/// IFD (either byte order). Only the tags the engine uses are read.
///
/// Throws ExifError: NoExif when the stream has no APP1 Exif segment (or
/// is not a JPEG), MalformedExif with the byte offset of the first
/// inconsistency.
ExifData read_exif(std::span<const std::uint8_t> jpeg);

/// read_exif, then folds the result into an ImageRecord. Throws
/// ExifError(MissingGeotag) when the GPS position is absent; callers with
/// a sidecar should use read_exif and merge instead.
ImageRecord parse_exif(std::span<const std::uint8_t> jpeg);

/// The ImageRecord fields derivable from ExifData, without requiring GPS.
/// Focal length falls back to the raw FocalLength (flagged unscaled).
ImageRecord record_from_exif(const ExifData& exif);

}  // namespace ave
