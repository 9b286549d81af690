#include <gtest/gtest.h>

#include <nlohmann/json.hpp>
#include <sstream>

#include "ave/error.hpp"
#include "ave/ingest/sidecar.hpp"
#include "ave/scene.hpp"
#include "oracles.hpp"

using namespace ave;
using nlohmann::json;

namespace {

std::filesystem::path golden() { return oracle::data_dir() / "golden"; }

ImageRecord golden_image(const std::string& id) {
  const ImageSidecar sc = parse_sidecar(oracle::read_text(golden() / "sidecars" / (id + ".json")));
  return merge_image_metadata(std::nullopt, sc, id, id + ".jpg");
}

std::vector<BuildingFootprint> golden_footprints() {
  return parse_overpass(oracle::read_text(golden() / "buildings.json")).footprints;
}

SceneState step(const SceneState& s, const Mutation& m) { return apply(s, m).state; }

// Frame, geometry with terrain, two images, detections.
SceneState golden_scene() {
  const auto footprints = golden_footprints();
  SceneState s;
  s = step(s, SetFrame{make_frame(footprint_centroid(footprints))});
  s = step(s, RebuildGeometry{footprints, parse_terrain(oracle::read_text(golden() / "terrain.asc")), std::nullopt});
  s = step(s, AddImage{golden_image("img_a"), std::nullopt});
  s = step(s, AddImage{golden_image("img_b"), std::nullopt});
  const auto batch =
      parse_detections(oracle::read_text(golden() / "detections.json"), {{"img_a", {4000, 3000}}, {"img_b", {4000, 3000}}});
  s = step(s, AddDetections{batch.detections});
  return s;
}

// Vertex, texture coordinate and face counts of an OBJ text.
struct ObjCounts {
  std::size_t v = 0, vt = 0, f = 0, g = 0;
  bool faces_in_range = true;
};

ObjCounts count_obj(const std::string& obj) {
  ObjCounts c;
  std::istringstream in(obj);
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    if (tag == "v") ++c.v;
    if (tag == "vt") ++c.vt;
    if (tag == "g") ++c.g;
    if (tag == "f") {
      ++c.f;
      std::string corner;
      while (ls >> corner) {
        const std::size_t vi = std::stoul(corner);
        if (vi < 1 || vi > c.v) c.faces_in_range = false;
        if (const auto slash = corner.find('/'); slash != std::string::npos) {
          const std::size_t ti = std::stoul(corner.substr(slash + 1));
          if (ti < 1 || ti > c.vt) c.faces_in_range = false;
        }
      }
    }
  }
  return c;
}

}  // namespace

TEST(Apply, RevisionsCountMutations) {
  const auto footprints = golden_footprints();
  SceneState s;
  EXPECT_EQ(s.revision, 0u);
  s = step(s, SetFrame{make_frame(footprint_centroid(footprints))});
  EXPECT_EQ(s.revision, 1u);
  s = step(s, RebuildGeometry{footprints, std::nullopt, std::nullopt});
  EXPECT_EQ(s.revision, 2u);
  EXPECT_EQ(s.buildings.size(), 3u);
  EXPECT_FALSE(s.terrain);
  s = step(s, AddImage{golden_image("img_a"), std::nullopt});
  EXPECT_EQ(s.revision, 3u);
  ASSERT_EQ(s.projectors.size(), 1u);
  const ProjectorPose same = s.projectors[0].pose;
  s = step(s, SetProjectorPose{0, same});
  EXPECT_EQ(s.revision, 4u);
  EXPECT_EQ(s.projectors[0].pose, same);
  s = step(s, RecomputeMasks{FanResolution{8, 6}});
  EXPECT_EQ(s.revision, 5u);
  EXPECT_EQ(s.settings.fan, (FanResolution{8, 6}));
}

TEST(Apply, RejectedMutationLeavesSceneAlone) {
  const SceneState s = golden_scene();
  const std::string before = save_scene(s);
  EXPECT_THROW(apply(s, SetProjectorPose{7, {}}), Error);
  ProjectorPose nan_pose;
  nan_pose.yaw = std::nan("");
  EXPECT_THROW(apply(s, SetProjectorPose{0, nan_pose}), DomainError);
  EXPECT_THROW(apply(s, AddDetections{{Detection{"nope", "car", 0.5, {1, 1, 5, 5}, std::nullopt}}}), Error);
  EXPECT_THROW(apply(s, RecomputeMasks{FanResolution{1, 4}}), DomainError);
  EXPECT_EQ(save_scene(s), before);
  EXPECT_THROW(apply(SceneState{}, RebuildGeometry{golden_footprints(), std::nullopt, std::nullopt}), DomainError);
}

TEST(Apply, GoldenSceneContents) {
  const SceneState s = golden_scene();
  EXPECT_EQ(s.revision, 5u);
  EXPECT_NO_THROW(validate(s));
  EXPECT_EQ(s.images.size(), 2u);
  EXPECT_EQ(s.projectors.size(), 2u);
  ASSERT_TRUE(s.terrain);
  EXPECT_EQ(all_surfaces(s).size(), s.mask_table.masks.size());
  EXPECT_EQ(s.placements.size(), 3u);
  ASSERT_EQ(s.trajectories.size(), 1u);
  EXPECT_EQ(s.trajectories[0].identity, "subject-1");
  EXPECT_EQ(s.trajectories[0].points.size(), 2u);
  // Terrain is the ground: nothing lands on the bare z = 0 plane.
  for (const Placement& p : s.placements) EXPECT_FALSE(p.anchored_on.is_ground_plane());
}

TEST(Apply, AddImageRefreshKeepsPose) {
  SceneState s = golden_scene();
  ProjectorPose moved = s.projectors[1].pose;
  moved.yaw = 12.5;
  s = step(s, SetProjectorPose{1, moved});
  ImageRecord again = golden_image("img_b");
  again.heading = 100;
  s = step(s, AddImage{again, std::nullopt});
  EXPECT_EQ(s.images.size(), 2u);
  EXPECT_EQ(s.projectors[1].pose, moved);
  EXPECT_EQ(s.images[1].heading, 100.0);
}

TEST(Apply, FramelessSceneAnchorsOnFirstImage) {
  const SceneState s = step(SceneState{}, AddImage{golden_image("img_a"), std::nullopt});
  ASSERT_TRUE(s.frame);
  EXPECT_NEAR(s.projectors[0].pose.position.x, 0.0, 1e-6);
  EXPECT_NEAR(s.projectors[0].pose.position.y, 0.0, 1e-6);
}

TEST(Apply, SetFrameTranslates) {
  const SceneState s = golden_scene();
  LocalFrame shifted = *s.frame;
  shifted.anchor.easting += 10;
  shifted.anchor.northing -= 4;
  shifted.base_elevation += 2;
  shifted = make_frame(shifted.anchor, shifted.base_elevation);
  const SceneState t = step(s, SetFrame{shifted});
  EXPECT_NEAR(t.projectors[0].pose.position.x, s.projectors[0].pose.position.x - 10, 1e-9);
  EXPECT_NEAR(t.projectors[0].pose.position.y, s.projectors[0].pose.position.y + 4, 1e-9);
  EXPECT_NEAR(t.projectors[0].pose.position.z, s.projectors[0].pose.position.z - 2, 1e-9);
  const LocalCoord a = s.buildings[0].surfaces[0].vertices[0], b = t.buildings[0].surfaces[0].vertices[0];
  EXPECT_NEAR(b.x, a.x - 10, 1e-9);
  EXPECT_NEAR(b.y, a.y + 4, 1e-9);
  EXPECT_NEAR(b.z, a.z - 2, 1e-9);
  EXPECT_EQ(t.mask_table, s.mask_table);
  LocalFrame other = make_frame(GeoCoord{51.5, 9.0});
  EXPECT_THROW(apply(s, SetFrame{other}), Error);
}

TEST(Persist, RoundTripIsByteIdentical) {
  const SceneState s = golden_scene();
  const std::string text = save_scene(s);
  const SceneState back = load_scene(text);
  EXPECT_EQ(back, s);
  EXPECT_EQ(save_scene(back), text);
  EXPECT_EQ(text.back(), '\n');
  const json j = json::parse(text);
  EXPECT_EQ(j["schema_version"], 1);
  EXPECT_EQ(j["revision"], 5);
  EXPECT_TRUE(j.contains("textures"));
}

TEST(Persist, EmptyScene) {
  const SceneState s;
  EXPECT_EQ(load_scene(save_scene(s)), s);
}

TEST(Persist, Errors) {
  json j = json::parse(save_scene(golden_scene()));
  json future = j;
  future["schema_version"] = 2;
  EXPECT_THROW(load_scene(future.dump()), VersionError);
  json dangling = j;
  dangling["placements"][0]["detection"]["image_id"] = "ghost";
  try {
    load_scene(dangling.dump());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DanglingReference);
    EXPECT_NE(std::string(e.what()).find("ghost"), std::string::npos) << e.what();
  }
  json broken = j;
  broken["projectors"][0]["pose"]["yaw"] = "north";
  try {
    load_scene(broken.dump());
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.path(), "/projectors/0/pose/yaw");
  }
  EXPECT_THROW(load_scene("{"), ParseError);
}

TEST(Persist, MaskTableStoredAsHex) {
  const json j = json::parse(save_scene(golden_scene()));
  ASSERT_TRUE(j.contains("mask_table"));
  std::size_t textured = 0;
  for (const auto& t : j["textures"]) {
    EXPECT_LT(t["projector"].get<int>(), 2);
    ++textured;
  }
  EXPECT_GT(textured, 0u);
}

TEST(Textures, UvInsideUnitSquare) {
  const SceneState s = golden_scene();
  const auto textures = surface_textures(s);
  ASSERT_FALSE(textures.empty());
  const auto surfaces = all_surfaces(s);
  for (const SurfaceTexture& t : textures) {
    EXPECT_EQ(t.uv.size(), surfaces[t.surface].vertices.size());
    EXPECT_TRUE(s.mask_table.masks.at(t.surface).test(t.projector));
    for (const Vec2& uv : t.uv) {
      EXPECT_GE(uv.x, 0.0);
      EXPECT_LE(uv.x, 1.0);
      EXPECT_GE(uv.y, 0.0);
      EXPECT_LE(uv.y, 1.0);
    }
  }
}

TEST(Obj, NoProjectorsNoTextureCoordinates) {
  const auto footprints = golden_footprints();
  SceneState s = step(SceneState{}, SetFrame{make_frame(footprint_centroid(footprints))});
  s = step(s, RebuildGeometry{footprints, std::nullopt, std::nullopt});
  const ObjExport out = export_obj(s, "scene.mtl");
  const ObjCounts c = count_obj(out.obj);
  EXPECT_EQ(c.vt, 0u);
  EXPECT_EQ(c.g, all_surfaces(s).size());
  EXPECT_TRUE(c.faces_in_range);
  EXPECT_NE(out.obj.find("mtllib scene.mtl"), std::string::npos);
}

TEST(Obj, UnitSquareRoof) {
  SceneState s = step(SceneState{}, SetFrame{make_frame(UtmCoord{30, Hemisphere::North, 699000, 5710000})});
  Mesh m;
  m.building_id = 1;
  Surface roof = roof_surface(Polygon2D{{{0, 0}, {1, 0}, {1, 1}, {0, 1}}}, 3, 0);
  roof.id = 0;
  m.surfaces.push_back(roof);
  s.buildings.push_back(m);
  s = step(s, RecomputeMasks{});
  const ObjCounts c = count_obj(export_obj(s, "x.mtl").obj);
  EXPECT_EQ(c.v, 4u);
  EXPECT_EQ(c.f, 2u);
}

TEST(Obj, GoldenSceneReparses) {
  const SceneState s = golden_scene();
  const ObjExport out = export_obj(s, "scene.mtl");
  const ObjCounts c = count_obj(out.obj);
  std::size_t verts = 0, tris = 0;
  for (const Surface& sf : all_surfaces(s)) {
    verts += sf.vertices.size();
    tris += sf.triangles.size();
  }
  EXPECT_EQ(c.v, verts);
  EXPECT_EQ(c.f, tris);
  EXPECT_GT(c.vt, 0u);
  EXPECT_TRUE(c.faces_in_range);
  EXPECT_NE(out.mtl.find("map_Kd img_a.jpg"), std::string::npos) << out.mtl;
  EXPECT_EQ(export_obj(s, "scene.mtl").obj, out.obj);
}

TEST(Seed, PoseFromImage) {
  const ImageRecord img = golden_image("img_b");
  const LocalFrame frame = make_frame(img.geo);
  const ProjectorPose p = seed_pose(img, frame, SurfaceIndex{});
  EXPECT_NEAR(p.position.x, 0.0, 1e-6);
  EXPECT_NEAR(p.position.y, 0.0, 1e-6);
  EXPECT_EQ(p.position.z, kDefaultEyeHeight);
  EXPECT_EQ(p.yaw, 350.0);
  EXPECT_EQ(p.pitch, 0.0);
  const Intrinsics k = seed_intrinsics(img, SceneSettings{});
  EXPECT_DOUBLE_EQ(k.hfov, horizontal_fov(26.0, 4000, 3000));
  EXPECT_DOUBLE_EQ(k.aspect, 4000.0 / 3000.0);
}

TEST(Centroid, SquaresAndZones) {
  BuildingFootprint a;
  const LocalFrame f = make_frame(UtmCoord{30, Hemisphere::North, 699000, 5710000});
  for (const auto& [x, y] : {std::pair{0.0, 0.0}, {10.0, 0.0}, {10.0, 10.0}, {0.0, 10.0}, {0.0, 0.0}}) {
    a.ring.push_back(utm_to_latlon(local_to_utm({x, y, 0}, f)));
  }
  const UtmCoord c = footprint_centroid({a});
  EXPECT_NEAR(c.easting, 699005, 1e-3);
  EXPECT_NEAR(c.northing, 5710005, 1e-3);
  EXPECT_THROW(footprint_centroid({}), DomainError);
}
