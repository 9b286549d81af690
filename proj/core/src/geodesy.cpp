#include "ave/geodesy.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include "ave/error.hpp"

namespace ave {
namespace {

constexpr double kA = 6378137.0;
constexpr double kF = 1.0 / 298.257223563;
constexpr double kK0 = 0.9996;
constexpr double kFalseEasting = 500000.0;
constexpr double kFalseNorthingSouth = 10000000.0;
constexpr double kDeg = std::numbers::pi / 180.0;

// Krüger series coefficients, sixth order in n (Karney 2011 expansions).
struct Series {
  double e;    // first eccentricity
  double a_r;  // rectifying radius A
  std::array<double, 6> alpha;
  std::array<double, 6> beta;
  std::array<double, 6> delta;
};

Series make_series() {
  const double n = kF / (2.0 - kF);
  const double n2 = n * n, n3 = n2 * n, n4 = n3 * n, n5 = n4 * n, n6 = n5 * n;
  Series s{};
  s.e = std::sqrt(kF * (2.0 - kF));
  s.a_r = kA / (1.0 + n) * (1.0 + n2 / 4.0 + n4 / 64.0 + n6 / 256.0);
  s.alpha = {
      n / 2.0 - 2.0 * n2 / 3.0 + 5.0 * n3 / 16.0 + 41.0 * n4 / 180.0 - 127.0 * n5 / 288.0 +
          7891.0 * n6 / 37800.0,
      13.0 * n2 / 48.0 - 3.0 * n3 / 5.0 + 557.0 * n4 / 1440.0 + 281.0 * n5 / 630.0 -
          1983433.0 * n6 / 1935360.0,
      61.0 * n3 / 240.0 - 103.0 * n4 / 140.0 + 15061.0 * n5 / 26880.0 + 167603.0 * n6 / 181440.0,
      49561.0 * n4 / 161280.0 - 179.0 * n5 / 168.0 + 6601661.0 * n6 / 7257600.0,
      34729.0 * n5 / 80640.0 - 3418889.0 * n6 / 1995840.0,
      212378941.0 * n6 / 319334400.0,
  };
  s.beta = {
      n / 2.0 - 2.0 * n2 / 3.0 + 37.0 * n3 / 96.0 - n4 / 360.0 - 81.0 * n5 / 512.0 +
          96199.0 * n6 / 604800.0,
      n2 / 48.0 + n3 / 15.0 - 437.0 * n4 / 1440.0 + 46.0 * n5 / 105.0 - 1118711.0 * n6 / 3870720.0,
      17.0 * n3 / 480.0 - 37.0 * n4 / 840.0 - 209.0 * n5 / 4480.0 + 5569.0 * n6 / 90720.0,
      4397.0 * n4 / 161280.0 - 11.0 * n5 / 504.0 - 830251.0 * n6 / 7257600.0,
      4583.0 * n5 / 161280.0 - 108847.0 * n6 / 3991680.0,
      20648693.0 * n6 / 638668800.0,
  };
  s.delta = {
      2.0 * n - 2.0 * n2 / 3.0 - 2.0 * n3 + 116.0 * n4 / 45.0 + 26.0 * n5 / 45.0 -
          2854.0 * n6 / 675.0,
      7.0 * n2 / 3.0 - 8.0 * n3 / 5.0 - 227.0 * n4 / 45.0 + 2704.0 * n5 / 315.0 +
          2323.0 * n6 / 945.0,
      56.0 * n3 / 15.0 - 136.0 * n4 / 35.0 - 1262.0 * n5 / 105.0 + 73814.0 * n6 / 2835.0,
      4279.0 * n4 / 630.0 - 332.0 * n5 / 35.0 - 399572.0 * n6 / 14175.0,
      4174.0 * n5 / 315.0 - 144838.0 * n6 / 6237.0,
      601676.0 * n6 / 22275.0,
  };
  return s;
}

const Series& series() {
  static const Series s = make_series();
  return s;
}

void check_latlon(const GeoCoord& p) {
  if (!std::isfinite(p.lat) || !std::isfinite(p.lon)) throw DomainError("non-finite coordinate");
  if (!(p.lat > -80.0 && p.lat < 84.0)) {
    throw DomainError("latitude " + std::to_string(p.lat) + " outside the UTM band (-80, 84)");
  }
  if (p.lon < -180.0 || p.lon > 180.0) {
    throw DomainError("longitude " + std::to_string(p.lon) + " outside [-180, 180]");
  }
}

void check_zone(int zone) {
  if (zone < 1 || zone > 60) throw DomainError("UTM zone " + std::to_string(zone) + " outside 1-60");
}

}  // namespace

double central_meridian(int zone) { return -183.0 + 6.0 * zone; }

int zone_for(double lon, double /*lat*/) {
  if (!(lon >= -180.0 && lon <= 180.0)) {
    throw DomainError("longitude " + std::to_string(lon) + " outside [-180, 180)");
  }
  const int zone = static_cast<int>(std::floor((lon + 180.0) / 6.0)) + 1;
  return zone < 1 ? 1 : (zone > 60 ? 60 : zone);
}

UtmCoord latlon_to_utm(const GeoCoord& p) {
  check_latlon(p);
  return latlon_to_utm(p, zone_for(p.lon, p.lat));
}

UtmCoord latlon_to_utm(const GeoCoord& p, int zone) {
  check_latlon(p);
  check_zone(zone);
  const Series& s = series();

  double dlon = p.lon - central_meridian(zone);
  dlon = std::remainder(dlon, 360.0);
  const double phi = p.lat * kDeg;
  const double lam = dlon * kDeg;

  // Conformal latitude via tau' = tan(chi).
  const double sphi = std::sin(phi);
  const double t = std::sinh(std::atanh(sphi) - s.e * std::atanh(s.e * sphi));
  const double xi_p = std::atan2(t, std::cos(lam));
  const double eta_p = std::atanh(std::sin(lam) / std::sqrt(1.0 + t * t));

  double xi = xi_p;
  double eta = eta_p;
  for (int j = 1; j <= 6; ++j) {
    const double a = s.alpha[j - 1];
    xi += a * std::sin(2.0 * j * xi_p) * std::cosh(2.0 * j * eta_p);
    eta += a * std::cos(2.0 * j * xi_p) * std::sinh(2.0 * j * eta_p);
  }

  UtmCoord out;
  out.zone = zone;
  out.hemisphere = p.lat < 0.0 ? Hemisphere::South : Hemisphere::North;
  out.easting = kFalseEasting + kK0 * s.a_r * eta;
  out.northing = kK0 * s.a_r * xi;
  if (out.hemisphere == Hemisphere::South) out.northing += kFalseNorthingSouth;
  // -0.0 at the equator would otherwise leak into serialized output.
  if (out.northing == 0.0) out.northing = 0.0;
  return out;
}

GeoCoord utm_to_latlon(const UtmCoord& p) {
  check_zone(p.zone);
  if (!std::isfinite(p.easting) || !std::isfinite(p.northing)) {
    throw DomainError("non-finite UTM coordinate");
  }
  const Series& s = series();
  const double northing = p.hemisphere == Hemisphere::South ? p.northing - kFalseNorthingSouth : p.northing;
  const double xi = northing / (kK0 * s.a_r);
  const double eta = (p.easting - kFalseEasting) / (kK0 * s.a_r);

  double xi_p = xi;
  double eta_p = eta;
  for (int j = 1; j <= 6; ++j) {
    const double b = s.beta[j - 1];
    xi_p -= b * std::sin(2.0 * j * xi) * std::cosh(2.0 * j * eta);
    eta_p -= b * std::cos(2.0 * j * xi) * std::sinh(2.0 * j * eta);
  }
  const double chi = std::asin(std::sin(xi_p) / std::cosh(eta_p));
  double phi = chi;
  for (int j = 1; j <= 6; ++j) phi += s.delta[j - 1] * std::sin(2.0 * j * chi);
  const double lam = std::atan2(std::sinh(eta_p), std::cos(xi_p));

  GeoCoord g;
  g.lat = phi / kDeg;
  g.lon = std::remainder(central_meridian(p.zone) + lam / kDeg, 360.0);
  return g;
}

LocalCoord utm_to_local(const UtmCoord& p, const LocalFrame& frame) {
  if (p.zone != frame.anchor.zone || p.hemisphere != frame.anchor.hemisphere) {
    auto label = [](const UtmCoord& u) {
      return std::to_string(u.zone) + (u.hemisphere == Hemisphere::North ? "N" : "S");
    };
    throw Error(ErrorCode::ZoneMismatch, "point in UTM zone " + label(p) +
                                             " cannot be placed in a scene anchored in zone " +
                                             label(frame.anchor));
  }
  return {p.easting - frame.anchor.easting, p.northing - frame.anchor.northing, 0.0};
}

UtmCoord local_to_utm(const LocalCoord& p, const LocalFrame& frame) {
  UtmCoord u = frame.anchor;
  u.easting += p.x;
  u.northing += p.y;
  return u;
}

LocalCoord geo_to_local(const GeoCoord& p, const LocalFrame& frame) {
  LocalCoord c = utm_to_local(latlon_to_utm(p), frame);
  if (p.alt) c.z = *p.alt - frame.base_elevation;
  return c;
}

LocalFrame make_frame(const GeoCoord& anchor, double base_elevation) {
  return {latlon_to_utm(anchor), anchor, base_elevation};
}

LocalFrame make_frame(const UtmCoord& anchor, double base_elevation) {
  return {anchor, utm_to_latlon(anchor), base_elevation};
}

}  // namespace ave
