#include <gtest/gtest.h>

#include <sstream>

#include "ave/error.hpp"
#include "ave/geodesy.hpp"
#include "oracles.hpp"

using namespace ave;

namespace {

struct OracleRow {
  std::string kind;
  double lat, lon;
  int zone;
  Hemisphere hemisphere;
  double easting, northing;
};

std::vector<OracleRow> oracle_rows() {
  std::istringstream csv(oracle::read_text(oracle::data_dir() / "utm_oracle.csv"));
  std::string line;
  std::getline(csv, line);
  std::vector<OracleRow> rows;
  while (std::getline(csv, line)) {
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
    rows.push_back({f[0], std::stod(f[1]), std::stod(f[2]), std::stoi(f[3]),
                    f[4] == "S" ? Hemisphere::South : Hemisphere::North, std::stod(f[5]), std::stod(f[6])});
  }
  return rows;
}

}  // namespace

TEST(Zone, Arithmetic) {
  EXPECT_EQ(zone_for(3, 0), 31);
  EXPECT_EQ(zone_for(-180, 10), 1);
  EXPECT_EQ(zone_for(-0.12, 51.5), 30);
  EXPECT_EQ(zone_for(180, 0), 60);
  EXPECT_EQ(zone_for(179.999, 0), 60);
  EXPECT_THROW(zone_for(180.5, 0), DomainError);
  EXPECT_THROW(zone_for(-181, 0), DomainError);
}

TEST(Utm, CentralMeridianAtEquator) {
  const UtmCoord u = latlon_to_utm({0.0, 3.0});
  EXPECT_EQ(u.zone, 31);
  EXPECT_EQ(u.hemisphere, Hemisphere::North);
  EXPECT_NEAR(u.easting, 500000.0, 1e-9);
  EXPECT_NEAR(u.northing, 0.0, 1e-9);
}

TEST(Utm, MatchesOracle) {
  const auto rows = oracle_rows();
  ASSERT_GE(rows.size(), 100u);
  for (const OracleRow& r : rows) {
    SCOPED_TRACE(std::to_string(r.lat) + "," + std::to_string(r.lon));
    const UtmCoord u = latlon_to_utm({r.lat, r.lon});
    EXPECT_EQ(u.zone, r.zone);
    EXPECT_EQ(u.hemisphere, r.hemisphere);
    EXPECT_NEAR(u.easting, r.easting, 1e-3);
    EXPECT_NEAR(u.northing, r.northing, 1e-3);
  }
}

TEST(Utm, InverseRoundTrip) {
  for (const OracleRow& r : oracle_rows()) {
    const GeoCoord g = utm_to_latlon({r.zone, r.hemisphere, r.easting, r.northing});
    EXPECT_NEAR(g.lat, r.lat, 1e-7);
    EXPECT_NEAR(g.lon, r.lon, 1e-7);
  }
}

TEST(Utm, RejectsLatitudeOutsideBand) {
  EXPECT_THROW(latlon_to_utm({84.5, 0}), DomainError);
  EXPECT_THROW(latlon_to_utm({-80.5, 0}), DomainError);
}

TEST(Local, Translation) {
  const LocalFrame f = make_frame(UtmCoord{30, Hemisphere::North, 699567.5, 5709427.5});
  const LocalCoord origin = utm_to_local(f.anchor, f);
  EXPECT_EQ(origin, (LocalCoord{0, 0, 0}));
  const LocalCoord p = utm_to_local({30, Hemisphere::North, 699567.5 + 12.5, 5709427.5 - 3.0}, f);
  EXPECT_DOUBLE_EQ(p.x, 12.5);
  EXPECT_DOUBLE_EQ(p.y, -3.0);
  EXPECT_EQ(p.z, 0.0);
  const UtmCoord back = local_to_utm(p, f);
  EXPECT_DOUBLE_EQ(back.easting, 699580.0);
}

TEST(Local, ZoneMismatchNamesBothZones) {
  const LocalFrame f = make_frame(UtmCoord{31, Hemisphere::North, 500000, 0});
  try {
    utm_to_local({30, Hemisphere::North, 500000, 0}, f);
    FAIL() << "expected zone mismatch";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ZoneMismatch);
    const std::string what = e.what();
    EXPECT_NE(what.find("30"), std::string::npos);
    EXPECT_NE(what.find("31"), std::string::npos);
  }
}

TEST(Local, GeoToLocalUsesAltitude) {
  const LocalFrame f = make_frame(GeoCoord{51.5007, -0.1246}, 10.0);
  EXPECT_NEAR(f.anchor.easting, 699567.539549, 1e-3);
  GeoCoord g{51.5007, -0.1246};
  EXPECT_EQ(geo_to_local(g, f).z, 0.0);
  g.alt = 25.0;
  const LocalCoord c = geo_to_local(g, f);
  EXPECT_NEAR(c.x, 0.0, 1e-9);
  EXPECT_NEAR(c.y, 0.0, 1e-9);
  EXPECT_DOUBLE_EQ(c.z, 15.0);
}

TEST(Local, SouthernHemisphere) {
  const UtmCoord u = latlon_to_utm({-33.8568, 151.2153});
  EXPECT_EQ(u.hemisphere, Hemisphere::South);
  EXPECT_EQ(u.zone, 56);
  EXPECT_DOUBLE_EQ(central_meridian(56), 153.0);
}
