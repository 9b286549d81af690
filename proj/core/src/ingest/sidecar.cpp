#include "ave/ingest/sidecar.hpp"

#include <limits>

#include "json_util.hpp"

namespace ave {

namespace {

int small_int(const jsonio::json& j, const std::string& path) {
  const auto v = jsonio::integer(j, path);
  if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) {
    throw ParseError(path, "integer out of range");
  }
  return static_cast<int>(v);
}

}  // namespace

ImageSidecar parse_sidecar(std::string_view doc) {
  using namespace jsonio;
  const json root = parse(doc);
  object(root, "");
  const auto version = integer_at(root, "schema_version", "");
  if (version != kSidecarSchemaVersion) throw VersionError(static_cast<int>(version), kSidecarSchemaVersion);

  ImageSidecar s;
  s.image_id = opt_string(root, "image_id", "");
  s.source_path = opt_string(root, "source_path", "");
  if (const json* v = find(root, "width")) s.width = small_int(*v, "/width");
  if (const json* v = find(root, "height")) s.height = small_int(*v, "/height");
  if (const json* g = find(root, "geo")) {
    object(*g, "/geo");
    GeoCoord geo;
    geo.lat = number_at(*g, "lat", "/geo");
    geo.lon = number_at(*g, "lon", "/geo");
    geo.alt = opt_number(*g, "alt", "/geo");
    s.geo = geo;
  }
  s.heading = opt_number(root, "heading", "");
  if (const auto ts = opt_string(root, "timestamp", "")) {
    s.timestamp = parse_iso8601(*ts);
    if (!s.timestamp) throw ParseError("/timestamp", "expected YYYY-MM-DDTHH:MM:SSZ");
  }
  s.focal35 = opt_number(root, "focal35", "");
  if (const json* v = find(root, "focal35_unscaled")) s.focal35_unscaled = boolean(*v, "/focal35_unscaled");
  if (const json* v = find(root, "orientation")) s.orientation = small_int(*v, "/orientation");
  return s;
}

ImageRecord merge_image_metadata(const std::optional<ExifData>& exif, const std::optional<ImageSidecar>& sidecar,
                                 const std::string& default_id, const std::string& source_path) {
  ImageRecord r;
  bool have_geo = false;
  if (exif) {
    r = record_from_exif(*exif);
    have_geo = exif->has_geotag();
  }
  r.image_id = default_id;
  r.source_path = source_path;
  if (sidecar) {
    const ImageSidecar& s = *sidecar;
    if (s.image_id) r.image_id = *s.image_id;
    if (s.source_path) r.source_path = *s.source_path;
    if (s.orientation) r.orientation = *s.orientation;
    if (s.width) r.width = *s.width;
    if (s.height) r.height = *s.height;
    if (s.geo) {
      r.geo = *s.geo;
      have_geo = true;
    }
    if (s.heading) r.heading = *s.heading;
    if (s.timestamp) r.timestamp = *s.timestamp;
    if (s.focal35) {
      r.focal35 = *s.focal35;
      r.focal35_unscaled = false;
    }
    if (s.focal35_unscaled) r.focal35_unscaled = *s.focal35_unscaled;
  }
  if (!have_geo) throw ExifError(ErrorCode::MissingGeotag, default_id + ": no GPS position in EXIF or sidecar");
  validate(r);
  return r;
}

}  // namespace ave
