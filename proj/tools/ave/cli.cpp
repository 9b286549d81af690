#include "cli.hpp"

#include <algorithm>
#include <csignal>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>

#include <CLI11.hpp>
#include <boost/asio/io_context.hpp>
#include <boost/asio/signal_set.hpp>

#include "ave/error.hpp"
#include "ave/ingest/exif.hpp"
#include "ave/ingest/overpass.hpp"
#include "ave/ingest/sidecar.hpp"
#include "ave/ingest/terrain.hpp"
#include "ave/meshgen.hpp"
#include "ave/net/overpass_client.hpp"
#include "ave/net/server.hpp"
#include "ave/protocol.hpp"
#include "ave/scene.hpp"
#include "config.hpp"

namespace ave::cli {

namespace fs = std::filesystem;

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, path.string() + ": cannot open");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const fs::path& path, const std::string& bytes) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::Io, tmp.string() + ": cannot write");
    out << bytes;
    if (!out.flush()) throw Error(ErrorCode::Io, tmp.string() + ": write failed");
  }
  fs::rename(tmp, path);
}

SceneState load_existing(const fs::path& path) {
  const std::string bytes = read_file(path);
  try {
    return load_scene(bytes);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

SceneState load_or_create(const fs::path& path, const Config& config) {
  if (!fs::exists(path)) {
    SceneState s;
    s.settings = config.scene_settings();
    return s;
  }
  return load_existing(path);
}

struct Session {
  fs::path scene_path;
  SceneState scene;
  std::ostream& out;
  std::ostream& err;
  bool dirty = false;

  bool commit(const Mutation& m) {
    ApplyResult r = ave::apply(scene, m);
    for (const std::string& w : r.warnings) err << "ave: warning: " << w << "\n";
    scene = std::move(r.state);
    dirty = true;
    return true;
  }

  void save() {
    if (dirty) write_file(scene_path, save_scene(scene));
  }
};

// ingest ---------------------------------------------------------------------

int cmd_ingest(const Config& config, const std::string& scene_path, const std::optional<std::string>& sidecar_dir,
               const std::vector<std::string>& images, std::ostream& out, std::ostream& err) {
  Session s{scene_path, load_or_create(scene_path, config), out, err};
  int failures = 0;
  for (const std::string& path : images) {
    const std::string stem = fs::path(path).stem().string();
    try {
      std::optional<ImageSidecar> sidecar;
      if (sidecar_dir) {
        const fs::path sc = fs::path(*sidecar_dir) / (stem + ".json");
        if (fs::exists(sc)) {
          try {
            sidecar = parse_sidecar(read_file(sc));
          } catch (const ParseError& e) {
            throw Error(ErrorCode::Parse, sc.string() + ": " + e.what());
          }
        }
      }
      const std::string bytes = read_file(path);
      std::optional<ExifData> exif;
      try {
        exif = read_exif({reinterpret_cast<const std::uint8_t*>(bytes.data()), bytes.size()});
      } catch (const ExifError& e) {
        if (e.code() != ErrorCode::NoExif || !sidecar) throw;
      }
      ImageRecord record = merge_image_metadata(exif, sidecar, stem, path);
      s.commit(AddImage{std::move(record), std::nullopt});
      out << "ingested " << path << "\n";
    } catch (const Error& e) {
      ++failures;
      err << "ave: failed: " << path << ": " << e.what() << " [" << to_string(e.code()) << "]\n";
    }
  }
  s.save();
  out << s.scene.images.size() << " images, " << s.scene.projectors.size() << " projectors\n";
  return failures ? kExitPartial : kExitOk;
}

// build ----------------------------------------------------------------------

std::optional<GeoCoord> parse_latlon(const std::string& text) {
  std::istringstream in(text);
  GeoCoord g;
  char comma = 0;
  if (!(in >> g.lat >> comma >> g.lon) || comma != ',' || !(in >> std::ws).eof()) return std::nullopt;
  return g;
}

int cmd_build(const Config& config, const std::string& scene_path, const std::optional<std::string>& osm,
              const std::optional<std::string>& bbox, const std::optional<std::string>& terrain_path,
              const std::string& anchor, const std::optional<double>& default_height, std::ostream& out,
              std::ostream& err) {
  Session s{scene_path, load_or_create(scene_path, config), out, err};

  std::string body;
  if (osm) {
    body = read_file(*osm);
  } else {
    std::array<double, 4> box{};
    std::istringstream in(*bbox);
    char c1 = 0, c2 = 0, c3 = 0;
    if (!(in >> box[0] >> c1 >> box[1] >> c2 >> box[2] >> c3 >> box[3]) || c1 != ',' || c2 != ',' || c3 != ',') {
      throw Error(ErrorCode::Config, "--bbox expects S,W,N,E");
    }
    if (!(box[0] < box[2] && box[1] < box[3])) throw Error(ErrorCode::Config, "--bbox needs S < N and W < E");
    body = net::fetch_overpass(config.overpass_url, overpass_query(box[0], box[1], box[2], box[3]),
                               config.overpass_timeout);
  }
  OverpassResult parsed = parse_overpass(body);
  for (const std::string& w : parsed.warnings) err << "ave: warning: " << w << "\n";

  std::optional<TerrainGrid> grid;
  if (terrain_path) grid = parse_terrain(read_file(*terrain_path));

  LocalFrame frame;
  if (anchor == "auto") {
    if (parsed.footprints.empty()) {
      if (!s.scene.frame) throw DomainError("no footprints to anchor on; pass --anchor lat,lon");
      frame = *s.scene.frame;
    } else {
      const UtmCoord c = footprint_centroid(parsed.footprints);
      frame = make_frame(c);
    }
  } else {
    const auto geo = parse_latlon(anchor);
    if (!geo) throw Error(ErrorCode::Config, "--anchor expects auto or lat,lon");
    frame = make_frame(*geo);
  }
  frame.base_elevation = 0.0;
  if (grid) {
    try {
      frame.base_elevation = sample_elevation(*grid, frame, 0.0, 0.0);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NoElevation) throw;
      err << "ave: warning: terrain does not cover the anchor; base elevation 0\n";
    }
  }

  s.commit(SetFrame{frame});
  s.commit(RebuildGeometry{std::move(parsed.footprints), std::move(grid), default_height});
  s.save();
  out << s.scene.buildings.size() << " buildings, " << all_surfaces(s.scene).size() << " surfaces"
      << (s.scene.terrain ? ", terrain" : "") << "\n";
  return kExitOk;
}

// project / place / export ----------------------------------------------------

std::optional<FanResolution> parse_fan(const std::string& text) {
  FanResolution f;
  char x = 0;
  std::istringstream in(text);
  if (!(in >> f.nx >> x >> f.ny) || (x != 'x' && x != 'X') || !(in >> std::ws).eof()) return std::nullopt;
  return f;
}

int cmd_project(const Config& config, const std::string& scene_path, const std::optional<std::string>& fan_text,
                std::ostream& out, std::ostream& err) {
  Session s{scene_path, load_existing(scene_path), out, err};
  std::optional<FanResolution> fan = config.fan;
  if (fan_text) {
    fan = parse_fan(*fan_text);
    if (!fan) throw Error(ErrorCode::Config, "--fan expects NXxNY, e.g. 32x18");
  }
  s.commit(RecomputeMasks{fan});
  s.save();
  std::size_t textured = 0;
  for (const auto& [surface, set] : s.scene.mask_table.masks) textured += set.empty() ? 0 : 1;
  out << "pool size " << s.scene.mask_table.pool.size() << ", " << textured << " of "
      << s.scene.mask_table.masks.size() << " surfaces textured by " << s.scene.projectors.size() << " projectors\n";
  return kExitOk;
}

int cmd_place(const std::string& scene_path, const std::string& detections_path, std::ostream& out,
              std::ostream& err) {
  Session s{scene_path, load_existing(scene_path), out, err};
  std::map<std::string, ImageSize> sizes;
  for (const ImageRecord& im : s.scene.images) sizes.emplace(im.image_id, ImageSize{im.width, im.height});
  DetectionBatch batch;
  try {
    batch = parse_detections(read_file(detections_path), sizes);
  } catch (const ParseError& e) {
    throw Error(ErrorCode::Parse, detections_path + ": " + e.what());
  }
  for (const std::string& w : batch.warnings) err << "ave: warning: " << detections_path << ": " << w << "\n";
  const std::size_t submitted = batch.detections.size();
  s.commit(AddDetections{std::move(batch.detections)});
  s.save();
  out << s.scene.placements.size() << " placements from " << submitted << " detections, "
      << s.scene.trajectories.size() << " trajectories\n";
  return kExitOk;
}

int cmd_export(const std::string& scene_path, const std::string& obj_path, std::ostream& out) {
  const SceneState scene = load_existing(scene_path);
  const fs::path obj(obj_path);
  const fs::path mtl = fs::path(obj).replace_extension(".mtl");
  const ObjExport e = export_obj(scene, mtl.filename().string());
  write_file(obj, e.obj);
  write_file(mtl, e.mtl);
  out << "wrote " << obj.string() << " and " << mtl.string() << "\n";
  return kExitOk;
}

// serve ------------------------------------------------------------------------

int cmd_serve(const Config& config, const std::string& scene_path, std::ostream& out, std::ostream& err) {
  const fs::path path(scene_path);
  protocol::ServerCore core(load_or_create(path, config));
  core.on_commit = [&](const SceneState& scene, const std::vector<std::string>& warnings) {
    for (const std::string& w : warnings) err << "ave: warning: " << w << "\n";
    try {
      write_file(path, save_scene(scene));
    } catch (const Error& e) {
      err << "ave: error: " << e.what() << "\n";
    }
  };

  boost::asio::io_context io;
  net::Server server(io, core, {config.bind, config.udp_port, config.ws_port, config.static_dir});
  server.start();
  boost::asio::signal_set signals(io, SIGINT, SIGTERM);
  signals.async_wait([&](const boost::system::error_code&, int) {
    server.stop();
    io.stop();
  });
  out << "serving " << scene_path << " (revision " << core.scene().revision << ") on udp " << config.bind << ":"
      << server.udp_port() << ", web-socket " << config.bind << ":" << server.ws_port() << "\n"
      << std::flush;
  io.run();
  out << "stopped at revision " << core.scene().revision << "\n";
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
        const std::map<std::string, std::string>& env) {
  CLI::App app{"Augmented virtual environment engine", "ave"};
  app.require_subcommand(1);
  std::optional<std::string> config_path;
  app.add_option("--config", config_path, "YAML settings file")->check(CLI::ExistingFile);

  std::string scene;
  const auto scene_opt = [&](CLI::App* sub) {
    sub->add_option("--scene", scene, "Scene file")->required();
    sub->fallthrough();
  };

  auto* ingest = app.add_subcommand("ingest", "Add photographs (EXIF geotag or sidecar) to the scene");
  scene_opt(ingest);
  std::optional<std::string> sidecar_dir;
  std::vector<std::string> images;
  ingest->add_option("--sidecar", sidecar_dir, "Directory of <image-stem>.json metadata files")
      ->check(CLI::ExistingDirectory);
  ingest->add_option("images", images, "JPEG files")->required();

  auto* build = app.add_subcommand("build", "Generate building and terrain meshes");
  scene_opt(build);
  std::optional<std::string> osm, bbox, terrain;
  std::string anchor = "auto";
  std::optional<double> default_height;
  auto* osm_opt = build->add_option("--osm", osm, "Overpass JSON file")->check(CLI::ExistingFile);
  auto* bbox_opt = build->add_option("--bbox", bbox, "Fetch buildings for S,W,N,E from Overpass");
  osm_opt->excludes(bbox_opt);
  bbox_opt->excludes(osm_opt);
  build->add_option("--terrain", terrain, "ESRI ASCII grid")->check(CLI::ExistingFile);
  build->add_option("--anchor", anchor, "auto (footprint centroid) or lat,lon")->capture_default_str();
  build->add_option("--default-height", default_height, "Height for untagged buildings, metres");

  auto* project = app.add_subcommand("project", "Recompute projector surface masks");
  scene_opt(project);
  std::optional<std::string> fan;
  project->add_option("--fan", fan, "Ray fan resolution NXxNY");

  auto* place_cmd = app.add_subcommand("place", "Place detections from a detection file");
  scene_opt(place_cmd);
  std::string detections;
  place_cmd->add_option("--detections", detections, "Detection file")->required()->check(CLI::ExistingFile);

  auto* serve = app.add_subcommand("serve", "Serve the scene over UDP and web-socket until interrupted");
  scene_opt(serve);
  std::optional<int> udp_port, ws_port;
  std::optional<std::string> bind, static_dir;
  serve->add_option("--udp-port", udp_port)->check(CLI::Range(0, 65535));
  serve->add_option("--ws-port", ws_port)->check(CLI::Range(0, 65535));
  serve->add_option("--bind", bind);
  serve->add_option("--static-dir", static_dir)->check(CLI::ExistingDirectory);

  auto* export_cmd = app.add_subcommand("export", "Write the scene as Wavefront OBJ + MTL");
  scene_opt(export_cmd);
  std::string obj_out;
  export_cmd->add_option("--out", obj_out, "Output .obj path")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    Config config = default_config();
    if (config_path) config = load_config(*config_path, config);
    config = apply_env(std::move(config), env);
    if (udp_port) config.udp_port = static_cast<std::uint16_t>(*udp_port);
    if (ws_port) config.ws_port = static_cast<std::uint16_t>(*ws_port);
    if (bind) config.bind = *bind;
    if (static_dir) config.static_dir = *static_dir;

    if (ingest->parsed()) return cmd_ingest(config, scene, sidecar_dir, images, out, err);
    if (build->parsed()) {
      if (!osm && !bbox) throw Error(ErrorCode::Config, "build needs --osm FILE or --bbox S,W,N,E");
      return cmd_build(config, scene, osm, bbox, terrain, anchor, default_height, out, err);
    }
    if (project->parsed()) return cmd_project(config, scene, fan, out, err);
    if (place_cmd->parsed()) return cmd_place(scene, detections, out, err);
    if (serve->parsed()) return cmd_serve(config, scene, out, err);
    if (export_cmd->parsed()) return cmd_export(scene, obj_out, out);
  } catch (const Error& e) {
    err << "ave: error: " << e.what() << " [" << to_string(e.code()) << "]\n";
    return kExitError;
  } catch (const std::exception& e) {
    err << "ave: error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}

}  // namespace ave::cli
