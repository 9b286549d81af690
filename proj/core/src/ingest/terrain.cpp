#include "ave/ingest/terrain.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <optional>
#include <string>

#include "ave/error.hpp"

namespace ave {
namespace {

class Tokenizer {
 public:
  explicit Tokenizer(std::string_view text) : text_(text) {}

  /// Next whitespace-delimited token; empty at end of input.
  std::string_view next() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) {
      if (text_[pos_] == '\n') ++line_;
      ++pos_;
    }
    const std::size_t start = pos_;
    while (pos_ < text_.size() && !std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    return text_.substr(start, pos_ - start);
  }

  std::string_view peek() {
    const std::size_t pos = pos_, line = line_;
    const auto tok = next();
    pos_ = pos;
    line_ = line;
    return tok;
  }

  std::string where() const { return "line " + std::to_string(line_); }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
};

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

std::optional<double> to_double(std::string_view tok) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc{} || ptr != tok.data() + tok.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

bool is_header_key(std::string_view tok) {
  return !tok.empty() && std::isalpha(static_cast<unsigned char>(tok.front()));
}

}  // namespace

std::size_t TerrainGrid::nodata_count() const {
  return static_cast<std::size_t>(std::count(values.begin(), values.end(), nodata));
}

TerrainGrid parse_terrain(std::string_view text) {
  Tokenizer tok(text);
  std::optional<double> ncols, nrows, xll, yll, cellsize, nodata;
  bool x_center = false, y_center = false;

  while (is_header_key(tok.peek())) {
    const std::string key = lower(tok.next());
    const std::string where = tok.where();
    const auto value_tok = tok.next();
    const auto value = to_double(value_tok);
    if (!value) throw ParseError(where, "header '" + key + "' has no numeric value");
    if (key == "ncols") {
      ncols = value;
    } else if (key == "nrows") {
      nrows = value;
    } else if (key == "xllcorner" || key == "xllcenter") {
      xll = value;
      x_center = key == "xllcenter";
    } else if (key == "yllcorner" || key == "yllcenter") {
      yll = value;
      y_center = key == "yllcenter";
    } else if (key == "cellsize") {
      cellsize = value;
    } else if (key == "nodata_value") {
      nodata = value;
    } else {
      throw ParseError(where, "unknown header key '" + key + "'");
    }
  }

  const auto require = [&](const std::optional<double>& v, const char* name) {
    if (!v) throw ParseError("header", std::string("missing '") + name + "'");
    return *v;
  };
  const double nc = require(ncols, "ncols");
  const double nr = require(nrows, "nrows");
  if (nc < 1 || nr < 1 || nc != std::floor(nc) || nr != std::floor(nr)) {
    throw ParseError("header", "ncols and nrows must be positive integers");
  }

  TerrainGrid grid;
  grid.ncols = static_cast<std::size_t>(nc);
  grid.nrows = static_cast<std::size_t>(nr);
  grid.cellsize = require(cellsize, "cellsize");
  if (!(grid.cellsize > 0.0)) throw ParseError("header", "cellsize must be positive");
  grid.xll_corner = require(xll, "xllcorner") - (x_center ? grid.cellsize / 2.0 : 0.0);
  grid.yll_corner = require(yll, "yllcorner") - (y_center ? grid.cellsize / 2.0 : 0.0);
  grid.nodata = nodata.value_or(-9999.0);

  const bool lonlat_corner = grid.xll_corner >= -180.0 && grid.xll_corner <= 180.0 && grid.yll_corner >= -90.0 &&
                             grid.yll_corner <= 90.0;
  grid.crs = lonlat_corner && grid.cellsize < 0.01 ? GridCrs::Geographic : GridCrs::Projected;

  const std::size_t expected = grid.ncols * grid.nrows;
  grid.values.reserve(expected);
  for (auto t = tok.next(); !t.empty(); t = tok.next()) {
    const auto v = to_double(t);
    if (!v) throw ParseError(tok.where(), "'" + std::string(t) + "' is not a number");
    grid.values.push_back(*v);
  }
  if (grid.values.size() != expected) {
    throw ParseError("data", "expected " + std::to_string(expected) + " values (" + std::to_string(grid.nrows) +
                                 " rows x " + std::to_string(grid.ncols) + " cols), found " +
                                 std::to_string(grid.values.size()));
  }
  return grid;
}

}  // namespace ave
