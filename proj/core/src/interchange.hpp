#pragma once

// JSON forms of the engine's records, shared by the scene file, the
// protocol message bodies and the CLI. Readers take the JSON path of the
// value for error messages.

#include <string>

#include "ave/scene.hpp"
#include "json_util.hpp"

namespace ave::interchange {

using jsonio::json;

/// Two-space indented, sorted keys, doubles as %.17g, trailing newline.
/// Throws Error(Encode) on non-finite numbers.
std::string canonical_dump(const json& j);

json vec3_to_json(const Vec3& v);
Vec3 vec3_from_json(const json& j, const std::string& path);

json geo_to_json(const GeoCoord& g);
GeoCoord geo_from_json(const json& j, const std::string& path);

json frame_to_json(const LocalFrame& f);
LocalFrame frame_from_json(const json& j, const std::string& path);

json image_to_json(const ImageRecord& im);
ImageRecord image_from_json(const json& j, const std::string& path);

json pose_to_json(const ProjectorPose& p);
ProjectorPose pose_from_json(const json& j, const std::string& path);

json detection_to_json(const Detection& d);
Detection detection_from_json(const json& j, const std::string& path);

json scene_to_json(const SceneState& s);
SceneState scene_from_json(const json& j);

}  // namespace ave::interchange
