#include "jointcalib/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace jointcalib {

namespace {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void write_ply(const std::filesystem::path& path,
               const std::vector<CloudPoint>& cloud) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::IoError, "cannot open " + path.string());
  out << "ply\n"
      << "format ascii 1.0\n"
      << "element vertex " << cloud.size() << "\n"
      << "property float x\n"
      << "property float y\n"
      << "property float z\n"
      << "property float intensity\n"
      << "end_header\n";
  for (const CloudPoint& p : cloud) {
    out << format_double(p.position.x()) << ' ' << format_double(p.position.y())
        << ' ' << format_double(p.position.z()) << ' '
        << format_double(p.intensity) << '\n';
  }
  if (!out) fail(ErrorCode::IoError, "write failed for " + path.string());
}

std::vector<CloudPoint> read_ply(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IoError, "cannot open " + path.string());

  std::string line;
  if (!std::getline(in, line) || line != "ply") {
    fail(ErrorCode::ParseError, path.string() + ": missing ply magic");
  }
  std::size_t vertex_count = 0;
  std::vector<std::string> properties;
  bool ascii = false;
  while (std::getline(in, line)) {
    if (line == "end_header") break;
    std::istringstream fields(line);
    std::string keyword;
    fields >> keyword;
    if (keyword == "format") {
      std::string kind;
      fields >> kind;
      ascii = (kind == "ascii");
    } else if (keyword == "element") {
      std::string name;
      fields >> name >> vertex_count;
      if (name != "vertex") {
        fail(ErrorCode::ParseError, path.string() + ": unsupported element " + name);
      }
    } else if (keyword == "property") {
      std::string type, name;
      fields >> type >> name;
      properties.push_back(name);
    }
  }
  if (!ascii) fail(ErrorCode::ParseError, path.string() + ": not ascii PLY");
  if (properties != std::vector<std::string>{"x", "y", "z", "intensity"}) {
    fail(ErrorCode::ParseError,
         path.string() + ": expected properties x, y, z, intensity");
  }

  std::vector<CloudPoint> cloud;
  cloud.reserve(vertex_count);
  for (std::size_t i = 0; i < vertex_count; ++i) {
    CloudPoint p;
    if (!(in >> p.position.x() >> p.position.y() >> p.position.z() >>
          p.intensity)) {
      fail(ErrorCode::ParseError, path.string() + ": truncated vertex data");
    }
    if (!is_finite(p.position) || !std::isfinite(p.intensity)) {
      fail(ErrorCode::ParseError, path.string() + ": non-finite vertex");
    }
    cloud.push_back(p);
  }
  return cloud;
}

Image make_image(int width, int height) {
  Image img;
  img.width = width;
  img.height = height;
  img.rgb.assign(static_cast<std::size_t>(width) * height * 3, 0);
  return img;
}

void write_ppm(const std::filesystem::path& path, const Image& image) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::IoError, "cannot open " + path.string());
  out << "P6\n" << image.width << ' ' << image.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(image.rgb.data()),
            static_cast<std::streamsize>(image.rgb.size()));
  if (!out) fail(ErrorCode::IoError, "write failed for " + path.string());
}

Image read_ppm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IoError, "cannot open " + path.string());
  std::string magic;
  int width = 0, height = 0, maxval = 0;
  in >> magic >> width >> height >> maxval;
  if (magic != "P6" || maxval != 255 || width <= 0 || height <= 0) {
    fail(ErrorCode::ParseError, path.string() + ": unsupported PPM header");
  }
  in.get();  // single whitespace after maxval
  Image img = make_image(width, height);
  in.read(reinterpret_cast<char*>(img.rgb.data()),
          static_cast<std::streamsize>(img.rgb.size()));
  if (in.gcount() != static_cast<std::streamsize>(img.rgb.size())) {
    fail(ErrorCode::ParseError, path.string() + ": truncated pixel data");
  }
  return img;
}

const Json& require(const Json& j, const std::string& key) {
  const auto it = j.find(key);
  if (it == j.end()) {
    fail(ErrorCode::ParseError, "missing field \"" + key + "\"");
  }
  return *it;
}

namespace {

double require_number(const Json& j, const std::string& key) {
  const Json& v = require(j, key);
  if (!v.is_number()) {
    fail(ErrorCode::ParseError, "field \"" + key + "\" is not a number");
  }
  return v.get<double>();
}

}  // namespace

Json to_json(const Vec2& v) { return Json::array({v.x(), v.y()}); }
Json to_json(const Vec3& v) { return Json::array({v.x(), v.y(), v.z()}); }

Vec2 vec2_from_json(const Json& j) {
  if (!j.is_array() || j.size() != 2) {
    fail(ErrorCode::ParseError, "expected [x, y]");
  }
  return Vec2(j[0].get<double>(), j[1].get<double>());
}

Vec3 vec3_from_json(const Json& j) {
  if (!j.is_array() || j.size() != 3) {
    fail(ErrorCode::ParseError, "expected [x, y, z]");
  }
  return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

Json to_json(const Pose& pose) {
  return Json{{"angle_axis", to_json(pose.angle_axis)},
              {"translation", to_json(pose.translation)}};
}

Pose pose_from_json(const Json& j) {
  Pose pose;
  pose.angle_axis = vec3_from_json(require(j, "angle_axis"));
  pose.translation = vec3_from_json(require(j, "translation"));
  if (!is_finite(pose.angle_axis) || !is_finite(pose.translation)) {
    fail(ErrorCode::ParseError, "non-finite pose");
  }
  return pose;
}

Json to_json(const CameraModel& camera) {
  return Json{{"fx", camera.fx},
              {"fy", camera.fy},
              {"cx", camera.cx},
              {"cy", camera.cy},
              {"skew", camera.skew},
              {"dist", Json::array({camera.dist[0], camera.dist[1],
                                    camera.dist[2], camera.dist[3]})},
              {"validity_radius", camera.validity_radius}};
}

CameraModel camera_from_json(const Json& j) {
  CameraModel camera;
  camera.fx = require_number(j, "fx");
  camera.fy = require_number(j, "fy");
  camera.cx = require_number(j, "cx");
  camera.cy = require_number(j, "cy");
  camera.skew = j.value("skew", 0.0);
  camera.validity_radius = j.value("validity_radius", 1.5);
  const Json& dist = require(j, "dist");
  if (!dist.is_array() || dist.size() != 4) {
    fail(ErrorCode::ParseError, "dist must be [k1, k2, p1, p2]");
  }
  for (int i = 0; i < 4; ++i) camera.dist[i] = dist[i].get<double>();
  if (camera.fx <= 0.0 || camera.fy <= 0.0) {
    fail(ErrorCode::ParseError, "focal lengths must be positive");
  }
  return camera;
}

Json to_json(const BoardSpec& spec) {
  Json holes = Json::array();
  for (const Vec2& c : spec.hole_centers) holes.push_back(to_json(c));
  return Json{{"checker_rows", spec.checker_rows},
              {"checker_cols", spec.checker_cols},
              {"square_size_m", spec.square_size},
              {"hole_centers_m", holes},
              {"hole_radius_m", spec.hole_radius},
              {"board_width_m", spec.board_width},
              {"board_height_m", spec.board_height}};
}

BoardSpec board_spec_from_json(const Json& j) {
  const Json& holes = require(j, "hole_centers_m");
  if (!holes.is_array() || holes.size() != 4) {
    fail(ErrorCode::ParseError, "hole_centers_m must hold 4 points");
  }
  std::array<Vec2, 4> centers;
  for (int i = 0; i < 4; ++i) centers[i] = vec2_from_json(holes[i]);
  return make_board_spec(require(j, "checker_rows").get<int>(),
                         require(j, "checker_cols").get<int>(),
                         require_number(j, "square_size_m"), centers,
                         require_number(j, "hole_radius_m"),
                         require_number(j, "board_width_m"),
                         require_number(j, "board_height_m"));
}

Json to_json(const SceneSpec& scene) {
  Json boards = Json::array();
  for (const PosedBoard& b : scene.boards) {
    boards.push_back(Json{{"spec", to_json(b.spec)},
                          {"pose_board_to_lidar", to_json(b.pose_board_to_lidar)}});
  }
  return Json{{"camera_truth", to_json(scene.camera_truth)},
              {"t_lidar_camera_truth", to_json(scene.t_lidar_camera_truth)},
              {"boards", boards},
              {"lidar",
               Json{{"azimuth_start_deg", scene.lidar.azimuth_start_deg},
                    {"azimuth_end_deg", scene.lidar.azimuth_end_deg},
                    {"azimuth_step_deg", scene.lidar.azimuth_step_deg},
                    {"elevation_channels_deg", scene.lidar.elevation_channels_deg},
                    {"range_noise_m", scene.lidar.range_noise_m},
                    {"ground_plane", scene.lidar.ground_plane},
                    {"ground_z_m", scene.lidar.ground_z_m}}},
              {"corner_noise_px", scene.corner_noise_px},
              {"rng_seed", scene.rng_seed},
              {"image_width", scene.image_width},
              {"image_height", scene.image_height},
              {"frames", scene.frames}};
}

SceneSpec scene_from_json(const Json& j) {
  SceneSpec scene;
  scene.camera_truth = camera_from_json(require(j, "camera_truth"));
  scene.t_lidar_camera_truth = pose_from_json(require(j, "t_lidar_camera_truth"));
  for (const Json& b : require(j, "boards")) {
    PosedBoard board;
    board.spec = board_spec_from_json(require(b, "spec"));
    board.pose_board_to_lidar = pose_from_json(require(b, "pose_board_to_lidar"));
    scene.boards.push_back(board);
  }
  const Json& lidar = require(j, "lidar");
  scene.lidar.azimuth_start_deg = lidar.value("azimuth_start_deg", 0.0);
  scene.lidar.azimuth_end_deg = lidar.value("azimuth_end_deg", 360.0);
  scene.lidar.azimuth_step_deg = require_number(lidar, "azimuth_step_deg");
  for (const Json& e : require(lidar, "elevation_channels_deg")) {
    scene.lidar.elevation_channels_deg.push_back(e.get<double>());
  }
  scene.lidar.range_noise_m = lidar.value("range_noise_m", 0.0);
  scene.lidar.ground_plane = lidar.value("ground_plane", false);
  scene.lidar.ground_z_m = lidar.value("ground_z_m", -1.8);
  scene.corner_noise_px = j.value("corner_noise_px", 0.0);
  scene.rng_seed = require(j, "rng_seed").get<std::uint64_t>();
  scene.image_width = require(j, "image_width").get<int>();
  scene.image_height = require(j, "image_height").get<int>();
  scene.frames = j.value("frames", 1);
  return scene;
}

Json observations_to_json(const SimFrame& frame) {
  Json boards = Json::array();
  for (const BoardCorners& bc : frame.corner_obs) {
    Json corners = Json::array();
    for (const CornerObservation& c : bc.corners) {
      corners.push_back(Json{{"board_xyz", to_json(c.board_point)},
                             {"pixel", to_json(c.pixel)}});
    }
    boards.push_back(Json{{"board_index", bc.board_index},
                          {"dropped", bc.dropped},
                          {"corners", corners}});
  }
  return Json{{"frame_index", frame.frame_index},
              {"image_width", frame.truth.image_width},
              {"image_height", frame.truth.image_height},
              {"boards", boards}};
}

FrameObservations observations_from_json(const Json& j) {
  FrameObservations obs;
  obs.frame_index = require(j, "frame_index").get<int>();
  obs.image_width = require(j, "image_width").get<int>();
  obs.image_height = require(j, "image_height").get<int>();
  for (const Json& b : require(j, "boards")) {
    BoardCorners bc;
    bc.board_index = require(b, "board_index").get<int>();
    bc.dropped = b.value("dropped", 0);
    for (const Json& c : require(b, "corners")) {
      CornerObservation corner;
      corner.board_point = vec3_from_json(require(c, "board_xyz"));
      corner.pixel = vec2_from_json(require(c, "pixel"));
      if (!is_finite(corner.board_point) || !is_finite(corner.pixel)) {
        fail(ErrorCode::ParseError, "non-finite corner observation");
      }
      bc.corners.push_back(corner);
    }
    obs.boards.push_back(std::move(bc));
  }
  return obs;
}

Json truth_to_json(const SceneSpec& scene) {
  Json boards = Json::array();
  for (const PosedBoard& b : scene.boards) {
    boards.push_back(Json{{"spec", to_json(b.spec)},
                          {"pose_board_to_lidar", to_json(b.pose_board_to_lidar)}});
  }
  return Json{{"frame_convention", kFrameConvention},
              {"camera", to_json(scene.camera_truth)},
              {"t_lidar_camera", to_json(scene.t_lidar_camera_truth)},
              {"boards", boards},
              {"image_width", scene.image_width},
              {"image_height", scene.image_height}};
}

Json to_json(const BoardDetectionOutcome& outcome) {
  Json j{{"board_index", outcome.board_index}, {"ok", outcome.ok}};
  if (outcome.ok) {
    const BoardDetection& d = outcome.detection;
    Json centers = Json::array();
    for (const Vec3& c : d.circle_centers_3d) centers.push_back(to_json(c));
    j["plane"] = Json{{"normal", to_json(d.plane.normal)}, {"d", d.plane.d}};
    j["board_pose_in_lidar"] = to_json(d.board_pose_in_lidar);
    j["circle_centers_3d"] = centers;
    j["alignment_cost"] = d.alignment_cost;
    j["inlier_count"] = d.inlier_count;
  } else {
    j["stage"] = outcome.stage;
    j["error"] = outcome.error;
  }
  return j;
}

Json detections_to_json(const std::vector<BoardDetectionOutcome>& outcomes) {
  Json boards = Json::array();
  for (const BoardDetectionOutcome& o : outcomes) boards.push_back(to_json(o));
  return Json{{"boards", boards}};
}

std::vector<BoardDetectionOutcome> detections_from_json(const Json& j) {
  std::vector<BoardDetectionOutcome> outcomes;
  for (const Json& b : require(j, "boards")) {
    BoardDetectionOutcome outcome;
    outcome.board_index = require(b, "board_index").get<int>();
    outcome.ok = require(b, "ok").get<bool>();
    if (outcome.ok) {
      const Json& plane = require(b, "plane");
      outcome.detection.plane.normal = vec3_from_json(require(plane, "normal"));
      outcome.detection.plane.d = require_number(plane, "d");
      outcome.detection.board_pose_in_lidar =
          pose_from_json(require(b, "board_pose_in_lidar"));
      const Json& centers = require(b, "circle_centers_3d");
      if (!centers.is_array() || centers.size() != 4) {
        fail(ErrorCode::ParseError, "circle_centers_3d must hold 4 points");
      }
      for (int k = 0; k < 4; ++k) {
        outcome.detection.circle_centers_3d[k] = vec3_from_json(centers[k]);
      }
      outcome.detection.alignment_cost = require(b, "alignment_cost").get<int>();
      outcome.detection.inlier_count = require(b, "inlier_count").get<int>();
    } else {
      outcome.stage = b.value("stage", "");
      outcome.error = b.value("error", "");
    }
    outcomes.push_back(std::move(outcome));
  }
  return outcomes;
}

Json to_json(const OptimizeReport& report) {
  Json stages = Json::array();
  for (const StageTrace& stage : report.stages) {
    stages.push_back(Json{{"name", stage.name},
                          {"cost_trace", stage.cost_trace},
                          {"iterations", stage.iterations},
                          {"converged", stage.converged},
                          {"reason", stage.reason}});
  }
  return Json{{"corner_rms_px", report.corner_rms_px},
              {"circle_rms_px", report.circle_rms_px},
              {"anchor_rms_px", report.anchor_rms_px},
              {"final_cost", report.final_cost},
              {"converged", report.converged},
              {"reason", report.reason},
              {"stages", stages}};
}

Json pairs_to_json(const PointPairSet& pairs, const Anchors& anchors) {
  Json boards = Json::array();
  for (std::size_t b = 0; b < pairs.boards.size(); ++b) {
    const BoardPairs& bp = pairs.boards[b];
    Json circles = Json::array();
    for (int k = 0; k < 4; ++k) {
      circles.push_back(Json{{"p3d", to_json(bp.circle_p3d[k])},
                             {"p2d", to_json(bp.circle_p2d[k])},
                             {"anchor", to_json(anchors[b][k])}});
    }
    Json corners = Json::array();
    for (std::size_t i = 0; i < bp.corner_board.size(); ++i) {
      corners.push_back(Json{{"board_xyz", to_json(bp.corner_board[i])},
                             {"pixel", to_json(bp.corner_pixel[i])}});
    }
    boards.push_back(Json{{"circle_pairs", circles}, {"corners", corners}});
  }
  return Json{{"boards", boards}};
}

std::pair<PointPairSet, Anchors> pairs_from_json(const Json& j) {
  PointPairSet pairs;
  Anchors anchors;
  for (const Json& b : require(j, "boards")) {
    BoardPairs bp;
    std::array<Vec2, 4> anchor;
    const Json& circles = require(b, "circle_pairs");
    if (!circles.is_array() || circles.size() != 4) {
      fail(ErrorCode::ParseError, "circle_pairs must hold 4 pairs");
    }
    for (int k = 0; k < 4; ++k) {
      bp.circle_p3d[k] = vec3_from_json(require(circles[k], "p3d"));
      bp.circle_p2d[k] = vec2_from_json(require(circles[k], "p2d"));
      anchor[k] = circles[k].contains("anchor")
                      ? vec2_from_json(circles[k]["anchor"])
                      : bp.circle_p2d[k];
    }
    for (const Json& c : require(b, "corners")) {
      bp.corner_board.push_back(vec3_from_json(require(c, "board_xyz")));
      bp.corner_pixel.push_back(vec2_from_json(require(c, "pixel")));
    }
    pairs.boards.push_back(std::move(bp));
    anchors.push_back(anchor);
  }
  return {std::move(pairs), std::move(anchors)};
}

void write_json_file(const std::filesystem::path& path, const Json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::IoError, "cannot open " + path.string());
  out << j.dump(2) << '\n';
  if (!out) fail(ErrorCode::IoError, "write failed for " + path.string());
}

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IoError, "cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    fail(ErrorCode::ParseError, path.string() + ": " + e.what());
  }
}

void write_text_file(const std::filesystem::path& path,
                     const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::IoError, "cannot open " + path.string());
  out << text;
  if (!out) fail(ErrorCode::IoError, "write failed for " + path.string());
}

}  // namespace jointcalib
