#include "ave/ingest/overpass.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <unordered_map>

#include "json_util.hpp"

namespace ave {
namespace {

using jsonio::json;

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t");
  return std::string(s.substr(first, last - first + 1));
}

struct Quantity {
  double value;
  std::string unit;
};

std::optional<Quantity> leading_number(std::string_view s) {
  std::string t = trim(s);
  // OSM users occasionally write decimal commas ("12,5").
  for (char& c : t) {
    if (c == ',') c = '.';
  }
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (ec != std::errc{} || !std::isfinite(value)) return std::nullopt;
  return Quantity{value, trim(std::string_view(t).substr(static_cast<std::size_t>(ptr - t.data())))};
}

bool is_building(const json& tags) {
  const json* b = jsonio::find(tags, "building");
  return b && b->is_string() && b->get<std::string>() != "no";
}

std::optional<std::string> tag(const json& tags, std::string_view key) {
  const json* v = jsonio::find(tags, key);
  if (!v || !v->is_string()) return std::nullopt;
  return v->get<std::string>();
}

GeoCoord coord(const json& j, const std::string& path) {
  GeoCoord g;
  g.lat = jsonio::number_at(j, "lat", path);
  g.lon = jsonio::number_at(j, "lon", path);
  if (!(g.lat >= -90.0 && g.lat <= 90.0) || !(g.lon >= -180.0 && g.lon <= 180.0)) {
    throw ParseError(path, "coordinate out of range");
  }
  return g;
}

std::size_t distinct_vertices(const std::vector<GeoCoord>& ring) {
  std::size_t n = ring.size();
  if (n > 1 && ring.front().lat == ring.back().lat && ring.front().lon == ring.back().lon) --n;
  std::vector<GeoCoord> seen;
  for (std::size_t i = 0; i < n; ++i) {
    bool dup = false;
    for (const auto& s : seen) {
      if (s.lat == ring[i].lat && s.lon == ring[i].lon) {
        dup = true;
        break;
      }
    }
    if (!dup) seen.push_back(ring[i]);
  }
  return seen.size();
}

}  // namespace

std::optional<double> parse_height_tag(std::string_view value) {
  const auto q = leading_number(value);
  if (!q || !(q->value > 0.0)) return std::nullopt;
  const std::string& unit = q->unit;
  if (unit.empty() || unit == "m" || unit == "meter" || unit == "meters" || unit == "metre" || unit == "metres") {
    return q->value;
  }
  if (unit == "ft" || unit == "feet" || unit == "'") return q->value * 0.3048;
  return std::nullopt;
}

double building_height(const BuildingFootprint& fp, double default_height) {
  if (fp.height_m && *fp.height_m > 0.0) return *fp.height_m;
  if (fp.levels && *fp.levels > 0.0) return *fp.levels * 3.0;
  return default_height;
}

OverpassResult parse_overpass(std::string_view body) {
  const json doc = jsonio::parse(body);
  const json& elements = jsonio::array(jsonio::member(doc, "elements", ""), "/elements");

  std::unordered_map<std::int64_t, GeoCoord> nodes;
  for (std::size_t i = 0; i < elements.size(); ++i) {
    const std::string path = jsonio::child("/elements", i);
    const json& el = jsonio::object(elements[i], path);
    if (jsonio::string_at(el, "type", path) == "node" && jsonio::find(el, "lat")) {
      nodes.emplace(jsonio::integer_at(el, "id", path), coord(el, path));
    }
  }

  OverpassResult out;
  for (std::size_t i = 0; i < elements.size(); ++i) {
    const std::string path = jsonio::child("/elements", i);
    const json& el = elements[i];
    if (jsonio::string_at(el, "type", path) != "way") continue;
    const std::int64_t id = jsonio::integer_at(el, "id", path);
    const json* tags = jsonio::find(el, "tags");
    if (!tags) continue;
    jsonio::object(*tags, jsonio::child(path, "tags"));
    if (!is_building(*tags)) continue;

    BuildingFootprint fp;
    fp.osm_id = id;
    bool closed = false;
    if (const json* geom = jsonio::find(el, "geometry")) {
      const std::string gpath = jsonio::child(path, "geometry");
      jsonio::array(*geom, gpath);
      for (std::size_t k = 0; k < geom->size(); ++k) fp.ring.push_back(coord((*geom)[k], jsonio::child(gpath, k)));
      if (const json* refs = jsonio::find(el, "nodes"); refs && refs->is_array() && refs->size() >= 2) {
        closed = refs->front() == refs->back();
      } else {
        closed = fp.ring.size() >= 2 && fp.ring.front() == fp.ring.back();
      }
    } else {
      const std::string npath = jsonio::child(path, "nodes");
      const json& refs = jsonio::array(jsonio::member(el, "nodes", path), npath);
      bool unresolved = false;
      for (std::size_t k = 0; k < refs.size(); ++k) {
        const auto ref = jsonio::integer(refs[k], jsonio::child(npath, k));
        const auto it = nodes.find(ref);
        if (it == nodes.end()) {
          out.warnings.push_back("way " + std::to_string(id) + ": node " + std::to_string(ref) +
                                 " not present in the response; way skipped");
          unresolved = true;
          break;
        }
        fp.ring.push_back(it->second);
      }
      if (unresolved) continue;
      closed = refs.size() >= 2 && refs.front() == refs.back();
    }

    if (!closed) {
      out.warnings.push_back("way " + std::to_string(id) + ": building way is not closed; skipped");
      continue;
    }
    if (distinct_vertices(fp.ring) < 3) {
      out.warnings.push_back("way " + std::to_string(id) + ": fewer than 3 distinct vertices; skipped");
      continue;
    }
    if (auto h = tag(*tags, "height")) {
      fp.height_m = parse_height_tag(*h);
      if (!fp.height_m) out.warnings.push_back("way " + std::to_string(id) + ": unreadable height '" + *h + "'");
    }
    if (auto lv = tag(*tags, "building:levels")) {
      const auto q = leading_number(*lv);
      if (q && q->unit.empty() && q->value > 0.0) {
        fp.levels = q->value;
      } else {
        out.warnings.push_back("way " + std::to_string(id) + ": unreadable building:levels '" + *lv + "'");
      }
    }
    fp.name = tag(*tags, "name");
    out.footprints.push_back(std::move(fp));
  }
  return out;
}

std::string overpass_query(double south, double west, double north, double east, int timeout_s) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "[out:json][timeout:%d];way[\"building\"](%.7f,%.7f,%.7f,%.7f);out geom;",
                timeout_s, south, west, north, east);
  return buf;
}

}  // namespace ave
