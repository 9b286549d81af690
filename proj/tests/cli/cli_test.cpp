#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "ave/scene.hpp"
#include "cli.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using namespace ave;
using nlohmann::json;

namespace {

struct Result {
  int status = 0;
  std::string out, err;
};

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("ave_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_ / "sidecars");
    const fs::path golden = oracle::data_dir() / "golden";
    for (const char* f : {"buildings.json", "terrain.asc", "img_a.jpg", "img_b.jpg", "detections.json"}) {
      fs::copy_file(golden / f, dir_ / f);
    }
    for (const char* f : {"img_a.json", "img_b.json"}) fs::copy_file(golden / "sidecars" / f, dir_ / "sidecars" / f);
  }
  void TearDown() override { fs::remove_all(dir_); }

  Result ave(std::vector<std::string> args, const std::map<std::string, std::string>& env = {}) {
    for (std::string& a : args) {
      if (a.rfind("@", 0) == 0) a = (dir_ / a.substr(1)).string();
    }
    std::ostringstream out, err;
    Result r;
    r.status = cli::run(args, out, err, env);
    r.out = out.str();
    r.err = err.str();
    return r;
  }

  SceneState scene() const { return load_scene(oracle::read_text(dir_ / "scene.json")); }

  void write(const std::string& name, const std::string& text) const { std::ofstream(dir_ / name) << text; }

  fs::path dir_;
};

}  // namespace

TEST_F(Cli, HelpAndUsage) {
  EXPECT_EQ(ave({"--help"}).status, 0);
  const Result none = ave({});
  EXPECT_NE(none.status, 0);
  EXPECT_NE(ave({"build"}).status, 0);
  EXPECT_NE(ave({"frobnicate"}).status, 0);
}

TEST_F(Cli, BuildFromOsmFile) {
  const Result r = ave({"build", "--scene", "@scene.json", "--osm", "@buildings.json"});
  ASSERT_EQ(r.status, 0) << r.err;
  EXPECT_NE(r.out.find("3 buildings"), std::string::npos) << r.out;
  const SceneState s = scene();
  EXPECT_EQ(s.buildings.size(), 3u);
  EXPECT_FALSE(s.terrain);
  ASSERT_TRUE(s.frame);
  // Auto anchor: the footprints' area-weighted centroid.
  const auto footprints = parse_overpass(oracle::read_text(dir_ / "buildings.json")).footprints;
  EXPECT_EQ(s.frame->anchor, footprint_centroid(footprints));
}

TEST_F(Cli, BuildTwoBuildingsGivesTwoMeshes) {
  fs::copy_file(oracle::data_dir() / "overpass_two.json", dir_ / "two.json");
  const Result r = ave({"build", "--scene", "@scene.json", "--osm", "@two.json"});
  ASSERT_EQ(r.status, 0) << r.err;
  EXPECT_EQ(scene().buildings.size(), 2u);
}

TEST_F(Cli, BuildWithTerrainAndExplicitAnchor) {
  const Result r = ave({"build", "--scene", "@scene.json", "--osm", "@buildings.json", "--terrain", "@terrain.asc",
                        "--anchor", "51.5007,-0.1246"});
  ASSERT_EQ(r.status, 0) << r.err;
  const SceneState s = scene();
  ASSERT_TRUE(s.terrain);
  EXPECT_EQ(s.frame->anchor_geo.lat, 51.5007);
  EXPECT_NE(s.frame->base_elevation, 0.0);
  EXPECT_NE(ave({"build", "--scene", "@scene.json", "--osm", "@buildings.json", "--anchor", "north"}).status, 0);
}

TEST_F(Cli, UnreachableOverpassFails) {
  const Result r = ave({"build", "--scene", "@scene.json", "--bbox", "51.50,-0.13,51.51,-0.12"},
                       {{"AVE_OVERPASS_URL", "http://127.0.0.1:1/api/interpreter"}});
  EXPECT_EQ(r.status, 1);
  EXPECT_NE(r.err.find("ave: error:"), std::string::npos) << r.err;
  EXPECT_FALSE(fs::exists(dir_ / "scene.json"));
  EXPECT_NE(ave({"build", "--scene", "@scene.json", "--bbox", "51.5,-0.13"}).status, 0);
}

TEST_F(Cli, IngestWithSidecars) {
  const Result r = ave({"ingest", "--scene", "@scene.json", "--sidecar", "@sidecars", "@img_a.jpg", "@img_b.jpg"});
  ASSERT_EQ(r.status, 0) << r.err;
  const SceneState s = scene();
  ASSERT_EQ(s.images.size(), 2u);
  EXPECT_EQ(s.images[0].image_id, "img_a");
  EXPECT_EQ(s.projectors.size(), 2u);
  EXPECT_EQ(s.revision, 2u);
}

TEST_F(Cli, IngestWithoutMetadataIsPartial) {
  fs::copy_file(oracle::data_dir() / "exif" / "gps_be.jpg", dir_ / "tagged.jpg");
  const Result r = ave({"ingest", "--scene", "@scene.json", "@img_a.jpg", "@tagged.jpg"});
  EXPECT_EQ(r.status, 2);
  EXPECT_NE(r.err.find("img_a.jpg"), std::string::npos) << r.err;
  const SceneState s = scene();
  ASSERT_EQ(s.images.size(), 1u);
  EXPECT_EQ(s.images[0].image_id, "tagged");
}

TEST_F(Cli, SidecarBeatsExif) {
  fs::copy_file(oracle::data_dir() / "exif" / "gps_be.jpg", dir_ / "tagged.jpg");
  write("sidecars/tagged.json", R"({"schema_version": 1, "geo": {"lat": 51.5, "lon": -0.12}, "heading": 45})");
  const Result r = ave({"ingest", "--scene", "@scene.json", "--sidecar", "@sidecars", "@tagged.jpg"});
  ASSERT_EQ(r.status, 0) << r.err;
  const SceneState s = scene();
  EXPECT_EQ(s.images[0].geo.lat, 51.5);
  EXPECT_EQ(s.images[0].heading, 45.0);
  EXPECT_EQ(s.images[0].width, 64);
}

TEST_F(Cli, FullPipelineAndExport) {
  ASSERT_EQ(ave({"build", "--scene", "@scene.json", "--osm", "@buildings.json", "--terrain", "@terrain.asc"}).status, 0);
  ASSERT_EQ(ave({"ingest", "--scene", "@scene.json", "--sidecar", "@sidecars", "@img_a.jpg", "@img_b.jpg"}).status, 0);
  const Result place = ave({"place", "--scene", "@scene.json", "--detections", "@detections.json"});
  ASSERT_EQ(place.status, 0) << place.err;
  const Result project = ave({"project", "--scene", "@scene.json", "--fan", "16x9"});
  ASSERT_EQ(project.status, 0) << project.err;
  EXPECT_NE(project.out.find("pool size"), std::string::npos);
  const SceneState s = scene();
  EXPECT_EQ(s.settings.fan, (FanResolution{16, 9}));
  EXPECT_EQ(s.placements.size(), 3u);
  EXPECT_EQ(s.trajectories.size(), 1u);

  fs::create_directories(dir_ / "out");
  const Result exp = ave({"export", "--scene", "@scene.json", "--out", "@out/model.obj"});
  ASSERT_EQ(exp.status, 0) << exp.err;
  const std::string obj = oracle::read_text(dir_ / "out" / "model.obj");
  const std::string mtl = oracle::read_text(dir_ / "out" / "model.mtl");
  EXPECT_NE(obj.find("mtllib model.mtl"), std::string::npos);
  std::size_t v = 0;
  std::istringstream in(obj);
  for (std::string line; std::getline(in, line);) v += line.rfind("v ", 0) == 0;
  std::size_t want = 0;
  for (const Surface& sf : all_surfaces(s)) want += sf.vertices.size();
  EXPECT_EQ(v, want);
  EXPECT_NE(mtl.find("newmtl"), std::string::npos);
  EXPECT_EQ(export_obj(s, "model.mtl").obj, obj);
}

TEST_F(Cli, PlaceReportsUnplaceableRecords) {
  ASSERT_EQ(ave({"build", "--scene", "@scene.json", "--osm", "@buildings.json", "--terrain", "@terrain.asc"}).status, 0);
  ASSERT_EQ(ave({"ingest", "--scene", "@scene.json", "--sidecar", "@sidecars", "@img_a.jpg"}).status, 0);
  // The second box sits at the top of the frame and looks at the sky.
  write("sky.json", R"({"schema": "ave.detections", "schema_version": 1, "detections": [
      {"image_id": "img_a", "class_label": "person", "confidence": 0.9, "bbox": [1900, 1400, 120, 420]},
      {"image_id": "img_a", "class_label": "kite", "confidence": 0.9, "bbox": [1900, 10, 50, 50]}]})");
  const Result r = ave({"place", "--scene", "@scene.json", "--detections", "@sky.json"});
  EXPECT_EQ(r.status, 0) << r.err;
  EXPECT_NE(r.err.find("warning"), std::string::npos) << r.err;
  EXPECT_EQ(scene().placements.size(), 1u);
}

TEST_F(Cli, PlaceRejectsUnknownImage) {
  ASSERT_EQ(ave({"ingest", "--scene", "@scene.json", "--sidecar", "@sidecars", "@img_a.jpg"}).status, 0);
  const std::string before = oracle::read_text(dir_ / "scene.json");
  const Result r = ave({"place", "--scene", "@scene.json", "--detections", "@detections.json"});
  EXPECT_EQ(r.status, 1);
  EXPECT_NE(r.err.find("img_b"), std::string::npos) << r.err;
  EXPECT_NE(r.err.find("[dangling-reference]"), std::string::npos) << r.err;
  EXPECT_EQ(oracle::read_text(dir_ / "scene.json"), before);
}

TEST_F(Cli, BrokenSceneFileNamesPath) {
  write("scene.json", "{\"schema_version\": 1, \"revision\": \"x\"}");
  const Result r = ave({"project", "--scene", "@scene.json"});
  EXPECT_EQ(r.status, 1);
  EXPECT_NE(r.err.find("scene.json"), std::string::npos) << r.err;
  write("scene.json", "{\"schema_version\": 9}");
  EXPECT_NE(ave({"project", "--scene", "@scene.json"}).err.find("[version-mismatch]"), std::string::npos);
}

TEST_F(Cli, ConfigFileSettingsReachNewScenes) {
  write("ave.yaml", "fan: [6, 4]\nfar: 250\n");
  ASSERT_EQ(ave({"--config", "@ave.yaml", "build", "--scene", "@scene.json", "--osm", "@buildings.json"}).status, 0);
  const SceneState s = scene();
  EXPECT_EQ(s.settings.fan, (FanResolution{6, 4}));
  EXPECT_EQ(s.settings.far, 250.0);
  write("bad.yaml", "fan: 3\n");
  const Result r = ave({"--config", "@bad.yaml", "project", "--scene", "@scene.json"});
  EXPECT_EQ(r.status, 1);
  EXPECT_NE(r.err.find("bad.yaml:1:6: fan"), std::string::npos) << r.err;
}
