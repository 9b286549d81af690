#include <gtest/gtest.h>

#include <nlohmann/json.hpp>

#include "ave/error.hpp"
#include "ave/ingest/exif.hpp"
#include "ave/ingest/sidecar.hpp"
#include "oracles.hpp"

using namespace ave;
using nlohmann::json;

namespace {

std::vector<std::uint8_t> fixture(const std::string& name) {
  return oracle::read_bytes(oracle::data_dir() / "exif" / name);
}

ErrorCode exif_code(const std::vector<std::uint8_t>& bytes) {
  try {
    parse_exif(bytes);
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::Io;
}

}  // namespace

class ExifFixture : public ::testing::TestWithParam<std::string> {};

TEST_P(ExifFixture, MatchesReferenceWriter) {
  const json expected = json::parse(oracle::read_text(oracle::data_dir() / "exif" / "expected.json"))[GetParam()];
  const auto bytes = fixture(GetParam());
  const ExifData raw = read_exif(bytes);
  EXPECT_EQ(raw.big_endian, expected["byte_order"] == "MM");

  const ImageRecord r = parse_exif(bytes);
  EXPECT_EQ(r.geo.lat, expected["lat"].get<double>());
  EXPECT_EQ(r.geo.lon, expected["lon"].get<double>());
  ASSERT_TRUE(r.geo.alt);
  EXPECT_EQ(*r.geo.alt, expected["alt"].get<double>());
  EXPECT_EQ(r.width, expected["width"].get<int>());
  EXPECT_EQ(r.height, expected["height"].get<int>());
  EXPECT_EQ(r.orientation, expected["orientation"].get<int>());
  ASSERT_TRUE(r.timestamp);
  EXPECT_EQ(format_iso8601(*r.timestamp), expected["timestamp"].get<std::string>());
  ASSERT_TRUE(r.focal35);
  EXPECT_EQ(*r.focal35, expected["focal35"].get<double>());
  EXPECT_EQ(r.focal35_unscaled, expected["focal35_unscaled"].get<bool>());
  if (expected.contains("heading")) {
    ASSERT_TRUE(r.heading);
    EXPECT_EQ(*r.heading, expected["heading"].get<double>());
  } else {
    EXPECT_FALSE(r.heading);
  }
}

INSTANTIATE_TEST_SUITE_P(Writers, ExifFixture, ::testing::Values("gps_be.jpg", "gps_le.jpg"));

TEST(Exif, NoApp1IsNoExif) { EXPECT_EQ(exif_code(fixture("no_exif.jpg")), ErrorCode::NoExif); }

TEST(Exif, NotAJpegIsNoExif) {
  EXPECT_EQ(exif_code({'P', 'N', 'G'}), ErrorCode::NoExif);
  EXPECT_EQ(exif_code({}), ErrorCode::NoExif);
}

TEST(Exif, NoGpsIsMissingGeotag) {
  EXPECT_EQ(exif_code(fixture("exif_no_gps.jpg")), ErrorCode::MissingGeotag);
  const ExifData raw = read_exif(fixture("exif_no_gps.jpg"));
  EXPECT_FALSE(raw.has_geotag());
}

TEST(Exif, TruncationReportsOffset) {
  const auto full = fixture("gps_be.jpg");
  int malformed = 0;
  for (std::size_t cut = 30; cut < 200 && cut < full.size(); cut += 7) {
    std::vector<std::uint8_t> part(full.begin(), full.begin() + static_cast<std::ptrdiff_t>(cut));
    try {
      read_exif(part);
    } catch (const ExifError& e) {
      if (e.code() == ErrorCode::MalformedExif) {
        ++malformed;
        EXPECT_LE(e.offset(), cut);
        EXPECT_NE(std::string(e.what()).find("byte"), std::string::npos);
      }
    }
  }
  EXPECT_GT(malformed, 0);
}

TEST(Exif, CorruptIfdCountNeverCrashes) {
  const auto full = fixture("gps_le.jpg");
  for (std::size_t i = 0; i < full.size() && i < 400; ++i) {
    auto bytes = full;
    bytes[i] ^= 0xff;
    try {
      read_exif(bytes);
    } catch (const ExifError&) {
    }
  }
}

TEST(Fov, Landscape) {
  EXPECT_NEAR(horizontal_fov(18, 4000, 3000), 90.0, 1e-12);
  EXPECT_NEAR(horizontal_fov(36, 4000, 3000), 53.130102354155979, 1e-9);
  EXPECT_NEAR(horizontal_fov(28, 4000, 3000), 65.470452544215206, 1e-9);
  EXPECT_THROW(horizontal_fov(0, 4000, 3000), DomainError);
  EXPECT_THROW(horizontal_fov(-5, 4000, 3000), DomainError);
}

TEST(Fov, PortraitUsesLongAxis) {
  const double h = horizontal_fov(28, 3000, 4000);
  EXPECT_LT(h, horizontal_fov(28, 4000, 3000));
  EXPECT_GT(h, 0);
}

TEST(Time, Iso8601) {
  const auto t = parse_iso8601("2024-05-17T14:03:22Z");
  ASSERT_TRUE(t);
  EXPECT_EQ(format_iso8601(*t), "2024-05-17T14:03:22Z");
  EXPECT_FALSE(parse_iso8601("2024-05-17 14:03:22"));
  EXPECT_FALSE(parse_iso8601("2024-13-17T14:03:22Z"));
  const auto e = parse_exif_datetime("2024:05:17 14:03:22");
  ASSERT_TRUE(e);
  EXPECT_EQ(*e, *t);
}

TEST(Sidecar, OverridesExif) {
  const ImageSidecar sc = parse_sidecar(R"({"schema_version": 1, "geo": {"lat": 10.5, "lon": 20.25},
                                           "heading": 90, "focal35": 35})");
  const ExifData raw = read_exif(fixture("gps_be.jpg"));
  const ImageRecord r = merge_image_metadata(raw, sc, "gps_be", "gps_be.jpg");
  EXPECT_EQ(r.geo.lat, 10.5);
  EXPECT_EQ(r.geo.lon, 20.25);
  EXPECT_EQ(r.heading, 90.0);
  EXPECT_EQ(r.focal35, 35.0);
  EXPECT_FALSE(r.focal35_unscaled);
  EXPECT_EQ(r.width, 64);
  EXPECT_EQ(r.image_id, "gps_be");
  EXPECT_EQ(r.source_path, "gps_be.jpg");
}

TEST(Sidecar, RescuesMissingExif) {
  const ImageSidecar sc = parse_sidecar(
      oracle::read_text(oracle::data_dir() / "golden" / "sidecars" / "img_a.json"));
  const ImageRecord r = merge_image_metadata(std::nullopt, sc, "x", "img_a.jpg");
  EXPECT_EQ(r.image_id, "img_a");
  EXPECT_EQ(r.width, 4000);
  EXPECT_EQ(r.height, 3000);
  ASSERT_TRUE(r.timestamp);
  EXPECT_EQ(format_iso8601(*r.timestamp), "2024-05-17T14:03:22Z");
}

TEST(Sidecar, Errors) {
  EXPECT_THROW(parse_sidecar(R"({"schema_version": 2})"), VersionError);
  try {
    parse_sidecar(R"({"schema_version": 1, "geo": {"lat": "north"}})");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.path().rfind("/geo", 0), 0u) << e.path();
  }
  const ImageSidecar no_geo = parse_sidecar(R"({"schema_version": 1, "width": 10, "height": 10})");
  try {
    merge_image_metadata(std::nullopt, no_geo, "a", "a.jpg");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::MissingGeotag);
  }
  const ImageSidecar no_size = parse_sidecar(R"({"schema_version": 1, "geo": {"lat": 1, "lon": 2}})");
  EXPECT_THROW(merge_image_metadata(std::nullopt, no_size, "a", "a.jpg"), DomainError);
}
