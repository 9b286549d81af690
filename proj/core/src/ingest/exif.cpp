#include "ave/ingest/exif.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <string>
#include <string_view>

#include "ave/error.hpp"

namespace ave {
namespace {

constexpr std::uint16_t kTagOrientation = 0x0112;
constexpr std::uint16_t kTagExifIfd = 0x8769;
constexpr std::uint16_t kTagGpsIfd = 0x8825;
constexpr std::uint16_t kTagDateTimeOriginal = 0x9003;
constexpr std::uint16_t kTagFocalLength = 0x920A;
constexpr std::uint16_t kTagFocal35 = 0xA405;
constexpr std::uint16_t kTagPixelX = 0xA002;
constexpr std::uint16_t kTagPixelY = 0xA003;

constexpr std::uint16_t kGpsLatRef = 1;
constexpr std::uint16_t kGpsLat = 2;
constexpr std::uint16_t kGpsLonRef = 3;
constexpr std::uint16_t kGpsLon = 4;
constexpr std::uint16_t kGpsAltRef = 5;
constexpr std::uint16_t kGpsAlt = 6;
constexpr std::uint16_t kGpsImgDirection = 0x11;

enum FieldType : std::uint16_t {
  kByte = 1,
  kAscii = 2,
  kShort = 3,
  kLong = 4,
  kRational = 5,
  kUndefined = 7,
  kSLong = 9,
  kSRational = 10,
  kFloat = 11,
  kDouble = 12,
};

std::size_t type_size(std::uint16_t type) {
  switch (type) {
    case kByte:
    case kAscii:
    case kUndefined:
      return 1;
    case kShort:
      return 2;
    case kLong:
    case kSLong:
    case kFloat:
      return 4;
    case kRational:
    case kSRational:
    case kDouble:
      return 8;
    default:
      return 0;
  }
}

[[noreturn]] void malformed(const std::string& what, std::size_t offset) {
  throw ExifError(ErrorCode::MalformedExif, "malformed Exif: " + what + " at byte " + std::to_string(offset),
                  offset);
}

/// Bounds-checked view of the TIFF structure inside the APP1 payload.
class TiffReader {
 public:
  TiffReader(std::span<const std::uint8_t> tiff, std::size_t base) : tiff_(tiff), base_(base) {
    if (tiff.size() < 8) malformed("TIFF header truncated", base);
    if (tiff[0] == 'I' && tiff[1] == 'I') {
      big_endian_ = false;
    } else if (tiff[0] == 'M' && tiff[1] == 'M') {
      big_endian_ = true;
    } else {
      malformed("unknown byte order", base);
    }
    if (u16(2) != 42) malformed("bad TIFF magic", base + 2);
  }

  bool big_endian() const { return big_endian_; }
  std::uint32_t ifd0() const { return u32(4); }
  std::size_t absolute(std::size_t rel) const { return base_ + rel; }

  std::uint16_t u16(std::size_t at) const {
    need(at, 2);
    const auto a = tiff_[at], b = tiff_[at + 1];
    return big_endian_ ? static_cast<std::uint16_t>(a << 8 | b) : static_cast<std::uint16_t>(b << 8 | a);
  }

  std::uint32_t u32(std::size_t at) const {
    need(at, 4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
      const std::uint32_t byte = tiff_[at + (big_endian_ ? i : 3 - i)];
      v = v << 8 | byte;
    }
    return v;
  }

  std::uint8_t u8(std::size_t at) const {
    need(at, 1);
    return tiff_[at];
  }

  void need(std::size_t at, std::size_t len) const {
    if (at > tiff_.size() || len > tiff_.size() - at) malformed("value outside the Exif segment", base_ + at);
  }

  std::span<const std::uint8_t> bytes(std::size_t at, std::size_t len) const {
    need(at, len);
    return tiff_.subspan(at, len);
  }

 private:
  std::span<const std::uint8_t> tiff_;
  std::size_t base_;
  bool big_endian_ = false;
};

struct Entry {
  std::uint16_t tag;
  std::uint16_t type;
  std::uint32_t count;
  std::size_t value_at;  // relative to TIFF start; inline or pointed-to
  std::size_t entry_at;
};

template <typename Fn>
void for_each_entry(const TiffReader& r, std::uint32_t ifd_offset, Fn&& fn) {
  const std::uint16_t n = r.u16(ifd_offset);
  r.need(ifd_offset + 2, std::size_t{n} * 12);
  for (std::uint16_t i = 0; i < n; ++i) {
    const std::size_t at = ifd_offset + 2 + std::size_t{i} * 12;
    Entry e{r.u16(at), r.u16(at + 2), r.u32(at + 4), at + 8, at};
    const std::size_t size = type_size(e.type);
    if (size == 0) continue;  // unknown type: skip, per TIFF rules
    const std::uint64_t total = std::uint64_t{size} * e.count;
    if (total > 4) {
      e.value_at = r.u32(at + 8);
      if (total > 0xFFFFFFFFu) malformed("oversized tag", r.absolute(at));
      r.need(e.value_at, static_cast<std::size_t>(total));
    }
    fn(e);
  }
}

std::optional<double> rational(const TiffReader& r, const Entry& e, std::uint32_t index) {
  if (index >= e.count) malformed("expected RATIONAL", r.absolute(e.entry_at));
  if (e.type == kFloat) {
    const float f = std::bit_cast<float>(r.u32(e.value_at + std::size_t{index} * 4));
    if (!std::isfinite(f)) return std::nullopt;
    return static_cast<double>(f);
  }
  if (e.type == kDouble) {
    const std::size_t at = e.value_at + std::size_t{index} * 8;
    const std::uint64_t hi = r.u32(r.big_endian() ? at : at + 4), lo = r.u32(r.big_endian() ? at + 4 : at);
    const double d = std::bit_cast<double>(hi << 32 | lo);
    if (!std::isfinite(d)) return std::nullopt;
    return d;
  }
  if (e.type != kRational && e.type != kSRational) malformed("expected RATIONAL", r.absolute(e.entry_at));
  const std::size_t at = e.value_at + std::size_t{index} * 8;
  const std::uint32_t num = r.u32(at);
  const std::uint32_t den = r.u32(at + 4);
  if (den == 0) return std::nullopt;
  if (e.type == kSRational) {
    return static_cast<double>(static_cast<std::int32_t>(num)) / static_cast<double>(static_cast<std::int32_t>(den));
  }
  return static_cast<double>(num) / static_cast<double>(den);
}

std::optional<long> integer(const TiffReader& r, const Entry& e) {
  if (e.count < 1) return std::nullopt;
  switch (e.type) {
    case kByte:
    case kUndefined:
      return r.u8(e.value_at);
    case kShort:
      return r.u16(e.value_at);
    case kLong:
      return static_cast<long>(r.u32(e.value_at));
    case kSLong:
      return static_cast<long>(static_cast<std::int32_t>(r.u32(e.value_at)));
    default:
      malformed("expected an integer tag", r.absolute(e.entry_at));
  }
}

std::string ascii(const TiffReader& r, const Entry& e) {
  if (e.type != kAscii && e.type != kUndefined) malformed("expected ASCII", r.absolute(e.entry_at));
  const auto b = r.bytes(e.value_at, e.count);
  std::string s(b.begin(), b.end());
  if (const auto nul = s.find('\0'); nul != std::string::npos) s.resize(nul);
  return s;
}

std::optional<double> dms(const TiffReader& r, const Entry& e) {
  if (e.count < 3) malformed("GPS coordinate needs three rationals", r.absolute(e.entry_at));
  const auto d = rational(r, e, 0), m = rational(r, e, 1), s = rational(r, e, 2);
  if (!d || !m || !s) return std::nullopt;
  return *d + *m / 60.0 + *s / 3600.0;
}

void read_gps(const TiffReader& r, std::uint32_t offset, ExifData& out) {
  std::string lat_ref, lon_ref;
  std::optional<double> lat, lon, alt;
  long alt_ref = 0;
  std::size_t lat_at = 0, lon_at = 0;
  for_each_entry(r, offset, [&](const Entry& e) {
    switch (e.tag) {
      case kGpsLatRef:
        lat_ref = ascii(r, e);
        break;
      case kGpsLat:
        lat = dms(r, e);
        lat_at = e.entry_at;
        break;
      case kGpsLonRef:
        lon_ref = ascii(r, e);
        break;
      case kGpsLon:
        lon = dms(r, e);
        lon_at = e.entry_at;
        break;
      case kGpsAltRef:
        alt_ref = integer(r, e).value_or(0);
        break;
      case kGpsAlt:
        alt = rational(r, e, 0);
        break;
      case kGpsImgDirection:
        if (auto dir = rational(r, e, 0)) {
          double h = std::fmod(*dir, 360.0);
          if (h < 0.0) h += 360.0;
          out.img_direction = h;
        }
        break;
      default:
        break;
    }
  });
  if (lat && lon) {
    if (*lat > 90.0) malformed("GPSLatitude out of range", r.absolute(lat_at));
    if (*lon > 180.0) malformed("GPSLongitude out of range", r.absolute(lon_at));
    out.latitude = lat_ref == "S" ? -*lat : *lat;
    out.longitude = lon_ref == "W" ? -*lon : *lon;
  }
  if (alt) out.altitude = alt_ref == 1 ? -*alt : *alt;
}

void read_exif_ifd(const TiffReader& r, std::uint32_t offset, ExifData& out) {
  for_each_entry(r, offset, [&](const Entry& e) {
    switch (e.tag) {
      case kTagDateTimeOriginal:
        out.date_time_original = parse_exif_datetime(ascii(r, e));
        break;
      case kTagFocalLength:
        out.focal_length = rational(r, e, 0);
        break;
      case kTagFocal35:
        if (auto v = integer(r, e); v && *v > 0) out.focal_length_35mm = static_cast<double>(*v);
        break;
      case kTagPixelX:
        if (auto v = integer(r, e); v && *v > 0) out.pixel_x = static_cast<int>(*v);
        break;
      case kTagPixelY:
        if (auto v = integer(r, e); v && *v > 0) out.pixel_y = static_cast<int>(*v);
        break;
      default:
        break;
    }
  });
}

void read_tiff(std::span<const std::uint8_t> tiff, std::size_t base, ExifData& out) {
  const TiffReader r(tiff, base);
  out.big_endian = r.big_endian();
  std::optional<std::uint32_t> exif_ifd, gps_ifd;
  for_each_entry(r, r.ifd0(), [&](const Entry& e) {
    switch (e.tag) {
      case kTagOrientation:
        if (auto v = integer(r, e); v && *v >= 1 && *v <= 8) out.orientation = static_cast<int>(*v);
        break;
      case kTagExifIfd:
        exif_ifd = static_cast<std::uint32_t>(integer(r, e).value_or(0));
        break;
      case kTagGpsIfd:
        gps_ifd = static_cast<std::uint32_t>(integer(r, e).value_or(0));
        break;
      default:
        break;
    }
  });
  if (exif_ifd) read_exif_ifd(r, *exif_ifd, out);
  if (gps_ifd) read_gps(r, *gps_ifd, out);
}

bool is_sof(std::uint8_t m) { return m >= 0xC0 && m <= 0xCF && m != 0xC4 && m != 0xC8 && m != 0xCC; }

}  // namespace

ExifData read_exif(std::span<const std::uint8_t> jpeg) {
  if (jpeg.size() < 4 || jpeg[0] != 0xFF || jpeg[1] != 0xD8) {
    throw ExifError(ErrorCode::NoExif, "not a JPEG stream (missing SOI marker)");
  }
  ExifData out;
  bool found = false;
  std::size_t pos = 2;
  while (pos < jpeg.size()) {
    if (jpeg[pos] != 0xFF) malformed("expected a marker", pos);
    while (pos < jpeg.size() && jpeg[pos] == 0xFF) ++pos;  // fill bytes
    if (pos >= jpeg.size()) malformed("marker truncated", pos);
    const std::uint8_t marker = jpeg[pos++];
    if (marker == 0xD9 || marker == 0xDA) break;  // EOI / start of scan
    if (marker == 0x01 || (marker >= 0xD0 && marker <= 0xD7)) continue;
    if (pos + 2 > jpeg.size()) malformed("segment length truncated", pos);
    const std::size_t len = std::size_t{jpeg[pos]} << 8 | jpeg[pos + 1];
    if (len < 2) malformed("segment length below 2", pos);
    if (len > jpeg.size() - pos) malformed("segment truncated", pos);
    const auto payload = jpeg.subspan(pos + 2, len - 2);
    if (marker == 0xE1 && !found && payload.size() >= 6 && std::memcmp(payload.data(), "Exif\0\0", 6) == 0) {
      read_tiff(payload.subspan(6), pos + 8, out);
      found = true;
    } else if (is_sof(marker) && payload.size() >= 5) {
      out.frame_height = payload[1] << 8 | payload[2];
      out.frame_width = payload[3] << 8 | payload[4];
    }
    pos += len;
  }
  if (!found) throw ExifError(ErrorCode::NoExif, "JPEG has no APP1 Exif segment");
  return out;
}

ImageRecord record_from_exif(const ExifData& exif) {
  ImageRecord rec;
  rec.orientation = exif.orientation.value_or(1);
  int w = exif.frame_width.value_or(exif.pixel_x.value_or(0));
  int h = exif.frame_height.value_or(exif.pixel_y.value_or(0));
  if (rec.orientation >= 5) std::swap(w, h);
  rec.width = w;
  rec.height = h;
  if (exif.has_geotag()) {
    rec.geo.lat = *exif.latitude;
    rec.geo.lon = *exif.longitude;
    rec.geo.alt = exif.altitude;
  }
  rec.heading = exif.img_direction;
  rec.timestamp = exif.date_time_original;
  if (exif.focal_length_35mm) {
    rec.focal35 = exif.focal_length_35mm;
  } else if (exif.focal_length) {
    rec.focal35 = exif.focal_length;
    rec.focal35_unscaled = true;
  }
  return rec;
}

ImageRecord parse_exif(std::span<const std::uint8_t> jpeg) {
  const ExifData exif = read_exif(jpeg);
  if (!exif.has_geotag()) throw ExifError(ErrorCode::MissingGeotag, "Exif block has no GPS position");
  return record_from_exif(exif);
}

}  // namespace ave
