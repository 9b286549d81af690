#include <gtest/gtest.h>

#include "ave/error.hpp"
#include "config.hpp"

using namespace ave;
using namespace ave::cli;

namespace {

std::string config_error(const std::string& yaml) {
  try {
    parse_config(yaml, "ave.yaml");
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Config);
    return e.what();
  }
  return "<no error>";
}

}  // namespace

TEST(Config, Defaults) {
  const Config c = default_config();
  EXPECT_EQ(c.overpass_url.rfind("https://", 0), 0u);
  EXPECT_EQ(c.udp_port, 47701);
  EXPECT_EQ(c.ws_port, 47702);
  EXPECT_EQ(c.scene_settings(), SceneSettings{});
  EXPECT_EQ(parse_config("", "empty.yaml").udp_port, 47701);
}

TEST(Config, FullDocument) {
  const Config c = parse_config(R"(overpass_url: http://localhost:12345/api
overpass_timeout: 5
fan: [8, 6]
near: 0.5
far: 250
default_building_height: 9.5
bind: 0.0.0.0
udp_port: 4000
ws_port: 4001
static_dir: ./www
)",
                                "ave.yaml");
  EXPECT_EQ(c.overpass_url, "http://localhost:12345/api");
  EXPECT_EQ(c.overpass_timeout, 5);
  EXPECT_EQ(c.bind, "0.0.0.0");
  EXPECT_EQ(c.udp_port, 4000);
  EXPECT_EQ(c.ws_port, 4001);
  EXPECT_EQ(c.static_dir, "./www");
  const SceneSettings s = c.scene_settings();
  EXPECT_EQ(s.fan, (FanResolution{8, 6}));
  EXPECT_EQ(s.near, 0.5);
  EXPECT_EQ(s.far, 250.0);
  EXPECT_EQ(s.default_building_height, 9.5);
}

TEST(Config, ErrorsNameLineColumnAndKey) {
  EXPECT_EQ(config_error("udp_port: 47701\nfan: [1, 5]\n"), "ave.yaml:2:6: fan: each dimension must be at least 2");
  EXPECT_NE(config_error("near: 0.1\n  far: [\n").find("ave.yaml:"), std::string::npos);
  EXPECT_EQ(config_error("colour: blue\n"), "ave.yaml:1:1: colour: unknown setting");
  EXPECT_NE(config_error("udp_port: 70000\n").find("udp_port: port must be 0-65535"), std::string::npos);
  EXPECT_NE(config_error("udp_port: lots\n").find("got 'lots'"), std::string::npos);
  EXPECT_NE(config_error("overpass_url: ftp://x\n").find("overpass_url"), std::string::npos);
  EXPECT_NE(config_error("near: 5\nfar: 4\n").find("far: need near < far"), std::string::npos);
  EXPECT_NE(config_error("default_building_height: 0\n").find("must be positive"), std::string::npos);
  EXPECT_NE(config_error("- 1\n- 2\n").find("expected a mapping"), std::string::npos);
}

TEST(Config, MissingFile) {
  try {
    load_config("/nonexistent/ave.yaml");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Config);
    EXPECT_NE(std::string(e.what()).find("/nonexistent/ave.yaml"), std::string::npos);
  }
}

TEST(Config, EnvironmentOverridesFile) {
  const Config file = parse_config("udp_port: 4000\nbind: 10.0.0.1\n", "ave.yaml");
  const Config c = apply_env(file, {{"AVE_UDP_PORT", "5000"}, {"AVE_OVERPASS_URL", "http://mirror/api"}});
  EXPECT_EQ(c.udp_port, 5000);
  EXPECT_EQ(c.bind, "10.0.0.1");
  EXPECT_EQ(c.overpass_url, "http://mirror/api");
  EXPECT_EQ(c.ws_port, 47702);
  EXPECT_THROW(apply_env(file, {{"AVE_WS_PORT", "http"}}), Error);
  EXPECT_THROW(apply_env(file, {{"AVE_WS_PORT", "65536"}}), Error);
  EXPECT_THROW(apply_env(file, {{"AVE_WS_PORT", ""}}), Error);
}
