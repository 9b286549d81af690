#include "config.hpp"

#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "ave/error.hpp"
#include "ave/net/overpass_client.hpp"

namespace ave::cli {

namespace {

[[noreturn]] void fail(const std::string& origin, const YAML::Mark& mark, const std::string& key,
                       const std::string& reason) {
  std::string where = origin;
  if (!mark.is_null()) where += ":" + std::to_string(mark.line + 1) + ":" + std::to_string(mark.column + 1);
  throw Error(ErrorCode::Config, where + ": " + key + ": " + reason);
}

template <class T>
T scalar(const YAML::Node& n, const std::string& origin, const std::string& key, const char* expected) {
  if (!n.IsScalar()) fail(origin, n.Mark(), key, std::string("expected ") + expected);
  try {
    return n.as<T>();
  } catch (const YAML::Exception&) {
    fail(origin, n.Mark(), key, std::string("expected ") + expected + ", got '" + n.Scalar() + "'");
  }
}

std::uint16_t port(const YAML::Node& n, const std::string& origin, const std::string& key) {
  const auto v = scalar<long long>(n, origin, key, "a port number");
  if (v < 0 || v > 65535) fail(origin, n.Mark(), key, "port must be 0-65535");
  return static_cast<std::uint16_t>(v);
}

std::uint16_t env_port(const std::string& name, const std::string& value) {
  char* end = nullptr;
  const long v = std::strtol(value.c_str(), &end, 10);
  if (value.empty() || *end != '\0' || v < 0 || v > 65535) {
    throw Error(ErrorCode::Config, "environment " + name + ": expected a port number, got '" + value + "'");
  }
  return static_cast<std::uint16_t>(v);
}

}  // namespace

SceneSettings Config::scene_settings() const {
  SceneSettings s;
  if (fan) s.fan = *fan;
  if (near) s.near = *near;
  if (far) s.far = *far;
  if (default_building_height) s.default_building_height = *default_building_height;
  return s;
}

Config default_config() {
  Config c;
  c.overpass_url = net::kDefaultOverpassUrl;
  return c;
}

Config parse_config(const std::string& text, const std::string& origin, Config c) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    fail(origin, e.mark, "document", e.msg);
  }
  if (root.IsNull()) return c;
  if (!root.IsMap()) fail(origin, root.Mark(), "document", "expected a mapping of settings");

  static const std::set<std::string> known{"overpass_url", "overpass_timeout", "fan",      "near",
                                           "far",          "default_building_height", "bind", "udp_port",
                                           "ws_port",      "static_dir"};
  for (const auto& kv : root) {
    const std::string key = kv.first.as<std::string>();
    const YAML::Node& v = kv.second;
    if (!known.count(key)) fail(origin, kv.first.Mark(), key, "unknown setting");
    if (key == "overpass_url") {
      c.overpass_url = scalar<std::string>(v, origin, key, "a URL");
      if (c.overpass_url.rfind("http://", 0) != 0 && c.overpass_url.rfind("https://", 0) != 0) {
        fail(origin, v.Mark(), key, "must start with http:// or https://");
      }
    } else if (key == "overpass_timeout") {
      c.overpass_timeout = scalar<int>(v, origin, key, "an integer");
      if (c.overpass_timeout <= 0) fail(origin, v.Mark(), key, "must be positive");
    } else if (key == "fan") {
      if (!v.IsSequence() || v.size() != 2) fail(origin, v.Mark(), key, "expected [nx, ny]");
      FanResolution f{scalar<int>(v[0], origin, key + "[0]", "an integer"),
                      scalar<int>(v[1], origin, key + "[1]", "an integer")};
      if (f.nx < 2 || f.ny < 2) fail(origin, v.Mark(), key, "each dimension must be at least 2");
      c.fan = f;
    } else if (key == "near") {
      c.near = scalar<double>(v, origin, key, "a number");
      if (!(*c.near > 0.0)) fail(origin, v.Mark(), key, "must be positive");
    } else if (key == "far") {
      c.far = scalar<double>(v, origin, key, "a number");
    } else if (key == "default_building_height") {
      c.default_building_height = scalar<double>(v, origin, key, "a number");
      if (!(*c.default_building_height > 0.0)) fail(origin, v.Mark(), key, "must be positive");
    } else if (key == "bind") {
      c.bind = scalar<std::string>(v, origin, key, "an address");
    } else if (key == "udp_port") {
      c.udp_port = port(v, origin, key);
    } else if (key == "ws_port") {
      c.ws_port = port(v, origin, key);
    } else if (key == "static_dir") {
      c.static_dir = scalar<std::string>(v, origin, key, "a path");
    }
  }
  const double near = c.near.value_or(SceneSettings{}.near);
  const double far = c.far.value_or(SceneSettings{}.far);
  if (!(near < far)) {
    fail(origin, root[c.far ? "far" : "near"].Mark(), c.far ? "far" : "near", "need near < far");
  }
  return c;
}

Config load_config(const std::string& path, Config base) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Config, path + ": cannot open config file");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str(), path, std::move(base));
}

Config apply_env(Config c, const std::map<std::string, std::string>& env) {
  if (auto it = env.find("AVE_OVERPASS_URL"); it != env.end()) c.overpass_url = it->second;
  if (auto it = env.find("AVE_UDP_PORT"); it != env.end()) c.udp_port = env_port(it->first, it->second);
  if (auto it = env.find("AVE_WS_PORT"); it != env.end()) c.ws_port = env_port(it->first, it->second);
  if (auto it = env.find("AVE_BIND"); it != env.end()) c.bind = it->second;
  return c;
}

std::map<std::string, std::string> process_env() {
  std::map<std::string, std::string> env;
  for (const char* name : {"AVE_OVERPASS_URL", "AVE_UDP_PORT", "AVE_WS_PORT", "AVE_BIND"}) {
    if (const char* v = std::getenv(name)) env.emplace(name, v);
  }
  return env;
}

}  // namespace ave::cli
