#include <gtest/gtest.h>

#include "ave/detection.hpp"
#include "ave/error.hpp"
#include "oracles.hpp"

using namespace ave;

namespace {

const std::map<std::string, ImageSize> kImages{{"img_a", {4000, 3000}}, {"img_b", {4000, 3000}}};

std::string doc_with(const std::string& record) {
  return R"({"schema": "ave.detections", "schema_version": 1, "detections": [)" + record + "]}";
}

Detection det(BoundingBox box, std::optional<std::string> identity = std::nullopt) {
  return Detection{"img", "person", 0.9, box, std::move(identity)};
}

Projector camera(LocalCoord at, double yaw, double pitch, double hfov, double aspect) {
  Projector p;
  p.pose.position = at;
  p.pose.yaw = yaw;
  p.pose.pitch = pitch;
  p.intrinsics.hfov = hfov;
  p.intrinsics.aspect = aspect;
  return p;
}

Placement placed(PlacementId id, std::optional<std::string> identity, std::optional<std::int64_t> t) {
  Placement p;
  p.id = id;
  p.detection.identity = std::move(identity);
  if (t) p.timestamp = Timestamp{std::chrono::seconds{*t}};
  return p;
}

}  // namespace

TEST(Parse, GoldenFile) {
  const auto batch = parse_detections(oracle::read_text(oracle::data_dir() / "golden" / "detections.json"), kImages);
  ASSERT_EQ(batch.detections.size(), 3u);
  EXPECT_TRUE(batch.warnings.empty());
  EXPECT_EQ(batch.detections[0].identity, "subject-1");
  EXPECT_FALSE(batch.detections[1].identity);
  EXPECT_EQ(batch.detections[1].bbox, (BoundingBox{2600, 1500, 700, 380}));
}

TEST(Parse, AdapterOutput) {
  const auto golden = parse_detections(oracle::read_text(oracle::data_dir() / "golden" / "detections.json"), kImages);
  const auto yolo =
      parse_detections(oracle::read_text(oracle::data_dir() / "yolo" / "img_a.detections.json"), kImages);
  ASSERT_EQ(yolo.detections.size(), 2u);
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_EQ(yolo.detections[i].class_label, golden.detections[i].class_label);
    EXPECT_EQ(yolo.detections[i].confidence, golden.detections[i].confidence);
    EXPECT_NEAR(yolo.detections[i].bbox.x, golden.detections[i].bbox.x, 1e-6);
    EXPECT_NEAR(yolo.detections[i].bbox.y, golden.detections[i].bbox.y, 1e-3);
    EXPECT_NEAR(yolo.detections[i].bbox.w, golden.detections[i].bbox.w, 1e-6);
    EXPECT_NEAR(yolo.detections[i].bbox.h, golden.detections[i].bbox.h, 1e-3);
  }
  EXPECT_EQ(yolo.detections[0].identity, "track-1");
}

TEST(Parse, BadRecordsDroppedWithWarning) {
  const auto batch = parse_detections(
      doc_with(R"({"image_id": "img_a", "class_label": "car", "confidence": 1.2, "bbox": [1, 1, 10, 10]},
                  {"image_id": "img_a", "class_label": "car", "confidence": 0.5, "bbox": [3995, 1, 10, 10]},
                  {"image_id": "img_a", "class_label": "car", "confidence": 0.5, "bbox": [1, 1, 0, 10]},
                  {"image_id": "img_b", "class_label": "car", "confidence": 0.0, "bbox": [0, 0, 4000, 3000]})"),
      kImages);
  EXPECT_EQ(batch.detections.size(), 1u);
  ASSERT_EQ(batch.warnings.size(), 3u);
  EXPECT_NE(batch.warnings[0].find("confidence"), std::string::npos) << batch.warnings[0];
}

TEST(Parse, Errors) {
  try {
    parse_detections(doc_with(R"({"image_id": "img_z", "class_label": "car", "confidence": 0.5,
                                 "bbox": [1, 1, 10, 10]})"),
                     kImages);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DanglingReference);
    EXPECT_NE(std::string(e.what()).find("img_z"), std::string::npos);
  }
  EXPECT_THROW(parse_detections(R"({"schema": "ave.detections", "schema_version": 2, "detections": []})", kImages),
               VersionError);
  EXPECT_THROW(parse_detections(doc_with(R"({"image_id": "img_a", "class_label": "car", "confidence": 0.5,
                                            "bbox": [1, 1, 10]})"),
                                kImages),
               ParseError);
  EXPECT_THROW(parse_detections("[]", kImages), ParseError);
}

TEST(Foot, BottomCentre) {
  const Vec2 f = foot_point(det({100, 200, 50, 100}), {1000, 500});
  EXPECT_DOUBLE_EQ(f.x, 0.125);
  EXPECT_DOUBLE_EQ(f.y, 0.6);
}

TEST(Place, FortyFiveDegreesDown) {
  const Projector p = camera({0, 0, 1.5}, 0, -45, 90, 1.25);
  const SurfaceIndex empty;
  const auto pl = place(det({450, 300, 100, 100}), p, {1000, 800}, empty, 9, std::nullopt);
  ASSERT_TRUE(pl);
  EXPECT_EQ(pl->id, 9u);
  EXPECT_TRUE(pl->anchored_on.is_ground_plane());
  EXPECT_EQ(pl->position.x, 0.0);
  EXPECT_EQ(pl->position.y, 1.5);
  EXPECT_EQ(pl->position.z, 0.0);
}

TEST(Place, WallInFrontOfGround) {
  const Projector p = camera({0, 0, 1.5}, 0, -45, 90, 1.25);
  Surface wall = wall_quad({-5, 1}, {5, 1}, 0, 3);
  wall.id = 4;
  const SurfaceIndex index(std::vector<Surface>{wall});
  const auto pl = place(det({450, 300, 100, 100}), p, {1000, 800}, index, 0, std::nullopt);
  ASSERT_TRUE(pl);
  EXPECT_EQ(pl->anchored_on.surface, 4u);
  EXPECT_NEAR(pl->position.y, 1.0, 1e-12);
  EXPECT_NEAR(pl->position.z, 0.5, 1e-12);
}

TEST(Place, GroundPlaneModes) {
  const Projector p = camera({0, 0, 1.5}, 0, -45, 90, 1.25);
  Surface low;
  low.id = 2;
  low.kind = SurfaceKind::Ground;
  low.vertices = {{-50, -50, -1}, {50, -50, -1}, {50, 50, -1}, {-50, 50, -1}};
  low.triangles = {{0, 1, 2}, {0, 2, 3}};
  const SurfaceIndex index(std::vector<Surface>{low});
  const Detection d = det({450, 300, 100, 100});
  const auto nearest = place(d, p, {1000, 800}, index, 0, std::nullopt, GroundPlane::Nearest);
  ASSERT_TRUE(nearest);
  EXPECT_TRUE(nearest->anchored_on.is_ground_plane());
  const auto fallback = place(d, p, {1000, 800}, index, 0, std::nullopt, GroundPlane::Fallback);
  ASSERT_TRUE(fallback);
  EXPECT_EQ(fallback->anchored_on.surface, 2u);
  EXPECT_NEAR(fallback->position.y, 2.5, 1e-12);
  EXPECT_NEAR(fallback->position.z, -1.0, 1e-12);
  const auto nothing = place(d, p, {1000, 800}, SurfaceIndex{}, 0, std::nullopt, GroundPlane::Fallback);
  ASSERT_TRUE(nothing);
  EXPECT_TRUE(nothing->anchored_on.is_ground_plane());
}

TEST(Place, SkywardOrTooFar) {
  const Projector up = camera({0, 0, 1.5}, 0, 30, 60, 1.25);
  EXPECT_FALSE(place(det({450, 100, 100, 100}), up, {1000, 800}, SurfaceIndex{}, 0, std::nullopt));
  Projector near_sighted = camera({0, 0, 1.5}, 0, -45, 90, 1.25);
  near_sighted.intrinsics.far = 2.0;
  EXPECT_FALSE(place(det({450, 300, 100, 100}), near_sighted, {1000, 800}, SurfaceIndex{}, 0, std::nullopt));
}

TEST(Place, MatchesOracleCamera) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(0.05, 0.95);
  int placed_count = 0;
  for (int i = 0; i < 300; ++i) {
    Projector p = oracle::random_projector(rng);
    p.pose.pitch = -10 - 30 * u(rng);
    const ImageSize size{1600, 1200};
    const double fu = u(rng), fv = u(rng);
    const Detection d = det({fu * size.width - 20, fv * size.height - 40, 40, 40});
    const auto pl = place(d, p, size, SurfaceIndex{}, 0, std::nullopt);
    const oracle::OracleCamera cam(p);
    const Vec3 dir = cam.direction(fu, fv);
    if (dir.z >= 0) {
      EXPECT_FALSE(pl);
      continue;
    }
    const double depth = -p.pose.position.z / dir.z;
    const Vec3 want = cam.point(fu, fv, depth);
    if (norm(want - p.pose.position) > p.intrinsics.far) continue;
    ASSERT_TRUE(pl);
    EXPECT_NEAR(pl->position.x, want.x, 1e-6);
    EXPECT_NEAR(pl->position.y, want.y, 1e-6);
    EXPECT_NEAR(pl->position.z, 0.0, 1e-9);
    ++placed_count;
  }
  EXPECT_GT(placed_count, 100);
}

TEST(GroundPlane, ParallelAndBehind) {
  EXPECT_FALSE(intersect_ground_plane({{0, 0, 1}, {0, 1, 0}}, 0, 100));
  EXPECT_FALSE(intersect_ground_plane({{0, 0, 1}, {0, 0, 1}}, 0, 100));
  const auto h = intersect_ground_plane({{0, 0, 2}, {0, 0, -1}}, 0, 100);
  ASSERT_TRUE(h);
  EXPECT_EQ(h->first, 2.0);
}

TEST(Trajectories, OrderingAndWarnings) {
  const std::vector<Placement> ps{placed(1, "b", 30), placed(2, "b", 10), placed(3, "a", 5),
                                  placed(4, "b", std::nullopt), placed(5, "b", 20), placed(6, std::nullopt, 1),
                                  placed(7, std::nullopt, std::nullopt)};
  const auto links = link_trajectories(ps);
  ASSERT_EQ(links.trajectories.size(), 2u);
  EXPECT_EQ(links.trajectories[0], (Trajectory{"a", {3}}));
  EXPECT_EQ(links.trajectories[1], (Trajectory{"b", {2, 5, 1, 4}}));
  ASSERT_EQ(links.warnings.size(), 1u);
  EXPECT_NE(links.warnings[0].find("placement 7"), std::string::npos);
}

TEST(Trajectories, OrderIndependentOfInput) {
  std::vector<Placement> ps;
  for (PlacementId i = 0; i < 20; ++i) ps.push_back(placed(i, i % 2 ? "x" : "y", static_cast<std::int64_t>(i * 7 % 5)));
  const auto first = link_trajectories(ps);
  std::mt19937_64 rng(2);
  for (int k = 0; k < 10; ++k) {
    std::shuffle(ps.begin(), ps.end(), rng);
    EXPECT_EQ(link_trajectories(ps).trajectories, first.trajectories);
  }
}

TEST(Trajectories, EqualTimestampsBreakOnId) {
  const std::vector<Placement> ps{placed(9, "z", 4), placed(3, "z", 4)};
  EXPECT_EQ(link_trajectories(ps).trajectories[0].points, (std::vector<PlacementId>{3, 9}));
}
