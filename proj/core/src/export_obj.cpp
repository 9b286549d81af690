#include <cstdio>
#include <map>

#include "ave/scene.hpp"

namespace ave {

namespace {

std::string num(double v) {
  if (v == 0.0) v = 0.0;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string material_name(ProjectorId id) { return "projector_" + std::to_string(id); }

}  // namespace

ObjExport export_obj(const SceneState& scene, const std::string& mtl_name) {
  std::map<SurfaceId, SurfaceTexture> textures;
  for (SurfaceTexture& t : surface_textures(scene)) textures.emplace(t.surface, std::move(t));
  const bool with_uv = !scene.projectors.empty();

  ObjExport out;
  std::string& o = out.obj;
  o += "# ave scene export, revision " + std::to_string(scene.revision) + "\n";
  o += "# right-handed, z up: x east, y north, z up, metres from the scene anchor\n";
  if (scene.frame) {
    const UtmCoord& a = scene.frame->anchor;
    o += "# anchor UTM zone " + std::to_string(a.zone) + (a.hemisphere == Hemisphere::North ? "N" : "S") + " E " +
         num(a.easting) + " N " + num(a.northing) + " base " + num(scene.frame->base_elevation) + "\n";
  }
  o += "mtllib " + mtl_name + "\n";

  std::size_t v_base = 1, vt_base = 1;
  for (const Surface& s : all_surfaces(scene)) {
    o += "g surface_" + std::to_string(s.id) + "_" + to_string(s.kind) + "\n";
    const auto tex = textures.find(s.id);
    const bool textured = with_uv && tex != textures.end();
    o += "usemtl " + (textured ? material_name(tex->second.projector) : std::string("untextured")) + "\n";
    for (const LocalCoord& v : s.vertices) o += "v " + num(v.x) + " " + num(v.y) + " " + num(v.z) + "\n";
    if (textured) {
      if (tex->second.clamped) o += "# uv clamped: part of this surface lies outside the projector frustum\n";
      // OBJ texture space has v pointing up; image rows run down.
      for (const Vec2& uv : tex->second.uv) o += "vt " + num(uv.x) + " " + num(1.0 - uv.y) + "\n";
    }
    for (const Triangle& t : s.triangles) {
      o += "f";
      for (auto i : t) {
        o += " " + std::to_string(v_base + i);
        if (textured) o += "/" + std::to_string(vt_base + i);
      }
      o += "\n";
    }
    v_base += s.vertices.size();
    if (textured) vt_base += s.vertices.size();
  }

  std::string& m = out.mtl;
  m += "# ave scene materials\n";
  m += "newmtl untextured\nKd 0.8 0.8 0.8\n";
  for (const Projector& p : scene.projectors) {
    const ImageRecord* im = find_image(scene, p.image_id);
    m += "\nnewmtl " + material_name(p.id) + "\nKd 1 1 1\n";
    if (im && !im->source_path.empty()) m += "map_Kd " + im->source_path + "\n";
  }
  return out;
}

}  // namespace ave
