#pragma once

#include <string>

namespace ave::net {

inline constexpr const char* kDefaultOverpassUrl = "https://overpass-api.de/api/interpreter";

/// POSTs an Overpass QL query and returns the response body. Throws
/// Error(Network) on connection failure, timeout or a non-200 status.
std::string fetch_overpass(const std::string& url, const std::string& query, int timeout_s = 30);

}  // namespace ave::net
