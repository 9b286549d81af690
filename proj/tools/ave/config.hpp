#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>

#include "ave/projection.hpp"
#include "ave/scene.hpp"

namespace ave::cli {

/// Operator settings. Unset fields fall back to scene or built-in defaults.
///
/// YAML file, every key optional:
///   overpass_url: https://overpass-api.de/api/interpreter
///   overpass_timeout: 30            # seconds
///   fan: [32, 18]                   # ray fan nx, ny (each >= 2)
///   near: 0.1                       # metres, 0 < near < far
///   far: 500.0
///   default_building_height: 8.0    # metres, > 0
///   bind: 127.0.0.1
///   udp_port: 47701
///   ws_port: 47702
///   static_dir: ./viewer/dist
struct Config {
  std::string overpass_url;
  int overpass_timeout = 30;
  std::optional<FanResolution> fan;
  std::optional<double> near;
  std::optional<double> far;
  std::optional<double> default_building_height;
  std::string bind = "127.0.0.1";
  std::uint16_t udp_port = 47701;
  std::uint16_t ws_port = 47702;
  std::optional<std::string> static_dir;

  /// Settings for a newly created scene.
  SceneSettings scene_settings() const;
};

Config default_config();

/// Parses and validates a YAML config document. Errors name the file,
/// line and column and the offending key: Error(Config).
Config parse_config(const std::string& text, const std::string& origin, Config base = default_config());
Config load_config(const std::string& path, Config base = default_config());

/// AVE_OVERPASS_URL, AVE_UDP_PORT, AVE_WS_PORT, AVE_BIND.
Config apply_env(Config c, const std::map<std::string, std::string>& env);
std::map<std::string, std::string> process_env();

}  // namespace ave::cli
