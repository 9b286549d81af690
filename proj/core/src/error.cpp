#include "ave/error.hpp"

namespace ave {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::Domain: return "domain";
    case ErrorCode::ZoneMismatch: return "zone-mismatch";
    case ErrorCode::NoExif: return "no-exif";
    case ErrorCode::MissingGeotag: return "missing-geotag";
    case ErrorCode::MalformedExif: return "malformed-exif";
    case ErrorCode::Parse: return "parse";
    case ErrorCode::DegenerateFootprint: return "degenerate-footprint";
    case ErrorCode::NonSimplePolygon: return "non-simple-polygon";
    case ErrorCode::EmptyTerrain: return "empty-terrain";
    case ErrorCode::NoElevation: return "no-elevation";
    case ErrorCode::DanglingReference: return "dangling-reference";
    case ErrorCode::VersionMismatch: return "version-mismatch";
    case ErrorCode::Encode: return "encode";
    case ErrorCode::Network: return "network";
    case ErrorCode::Config: return "config";
    case ErrorCode::Io: return "io";
  }
  return "unknown";
}

}  // namespace ave
