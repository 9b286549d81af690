#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ave {

enum class ErrorCode {
  Domain,
  ZoneMismatch,
  NoExif,
  MissingGeotag,
  MalformedExif,
  Parse,
  DegenerateFootprint,
  NonSimplePolygon,
  EmptyTerrain,
  NoElevation,
  DanglingReference,
  VersionMismatch,
  Encode,
  Network,
  Config,
  Io,
};

const char* to_string(ErrorCode code) noexcept;

/// Base of every error the engine throws. Callers switch on code() when
/// they need to tell recoverable per-item failures from fatal ones.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

class DomainError : public Error {
 public:
  explicit DomainError(const std::string& what) : Error(ErrorCode::Domain, what) {}
};

/// Raised by the EXIF reader. offset() is the byte position in the JPEG
/// stream where decoding failed (0 when not meaningful).
class ExifError : public Error {
 public:
  ExifError(ErrorCode code, const std::string& what, std::size_t offset = 0)
      : Error(code, what), offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

/// Structured-document error. path() is a JSON-pointer-like location
/// ("/elements/3/geometry") or a "line N" marker for text formats.
class ParseError : public Error {
 public:
  ParseError(std::string path, const std::string& reason)
      : Error(ErrorCode::Parse, path.empty() ? reason : path + ": " + reason), path_(std::move(path)) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

class VersionError : public Error {
 public:
  VersionError(int found, int supported)
      : Error(ErrorCode::VersionMismatch, "schema_version " + std::to_string(found) +
                                              " is not supported (this build reads version " +
                                              std::to_string(supported) + ")"),
        found_(found),
        supported_(supported) {}
  int found() const noexcept { return found_; }
  int supported() const noexcept { return supported_; }

 private:
  int found_;
  int supported_;
};

}  // namespace ave
