#include "ave/ingest/image_record.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "ave/error.hpp"

namespace ave {

void validate(const ImageRecord& image) {
  const std::string who = "image '" + image.image_id + "': ";
  if (image.image_id.empty()) throw DomainError("image record without image_id");
  if (image.width <= 0 || image.height <= 0) {
    throw DomainError(who + "dimensions must be positive (got " + std::to_string(image.width) + "x" +
                      std::to_string(image.height) + ")");
  }
  if (!(image.geo.lat >= -90.0 && image.geo.lat <= 90.0) || !(image.geo.lon >= -180.0 && image.geo.lon <= 180.0)) {
    throw DomainError(who + "lat/lon out of range");
  }
  if (image.heading && !(*image.heading >= 0.0 && *image.heading < 360.0)) {
    throw DomainError(who + "heading must lie in [0, 360)");
  }
  if (image.orientation < 1 || image.orientation > 8) throw DomainError(who + "orientation must be 1-8");
  if (image.focal35 && !(*image.focal35 > 0.0)) throw DomainError(who + "focal length must be positive");
}

double horizontal_fov(double focal35, int width, int height) {
  if (!(focal35 > 0.0) || !std::isfinite(focal35)) {
    throw DomainError("focal length must be positive, got " + std::to_string(focal35));
  }
  constexpr double kHalfFrame = 18.0;  // half of the 36 mm full-frame long side
  const double half_long = std::atan(kHalfFrame / focal35);
  double half_h = half_long;
  if (height > width && width > 0) {
    half_h = std::atan(std::tan(half_long) * static_cast<double>(width) / static_cast<double>(height));
  }
  return 2.0 * half_h * 180.0 / std::numbers::pi;
}

}  // namespace ave
