#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>

namespace ave {

/// UTC instant at one-second resolution (EXIF carries no finer time).
using Timestamp = std::chrono::sys_seconds;

/// "2024-05-17T14:03:22Z". Returns nullopt for anything else.
std::optional<Timestamp> parse_iso8601(std::string_view text);
std::string format_iso8601(Timestamp t);

/// EXIF DateTimeOriginal, "YYYY:MM:DD HH:MM:SS". The tag has no zone; the
/// value is taken as UTC.
std::optional<Timestamp> parse_exif_datetime(std::string_view text);

}  // namespace ave
