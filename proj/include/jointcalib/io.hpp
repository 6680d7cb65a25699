#pragma once

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "jointcalib/board.hpp"
#include "jointcalib/joint_optimize.hpp"
#include "jointcalib/lidar_detect.hpp"
#include "jointcalib/simulate.hpp"

namespace jointcalib {

using Json = nlohmann::json;

// Axis convention tag carried by truth and result files; evaluate refuses
// to compare files with different tags.
inline constexpr const char* kFrameConvention =
    "lidar_to_camera/rpy-intrinsic-xyz";

// ---------------------------------------------------------------------------
// ASCII PLY 1.0, properties x, y, z, intensity (float). Values are written
// with 17 significant digits so a write/read round trip is exact.

void write_ply(const std::filesystem::path& path,
               const std::vector<CloudPoint>& cloud);
std::vector<CloudPoint> read_ply(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Binary PPM (P6).

struct Image {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> rgb;  // 3 bytes per pixel, row-major

  void set(int x, int y, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
    const std::size_t at = 3 * (static_cast<std::size_t>(y) * width + x);
    rgb[at] = r;
    rgb[at + 1] = g;
    rgb[at + 2] = b;
  }
};

Image make_image(int width, int height);
void write_ppm(const std::filesystem::path& path, const Image& image);
Image read_ppm(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// JSON converters. Parse errors surface as ErrorCode::ParseError with the
// offending field named.

Json to_json(const Vec2& v);
Json to_json(const Vec3& v);
Vec2 vec2_from_json(const Json& j);
Vec3 vec3_from_json(const Json& j);

Json to_json(const Pose& pose);
Pose pose_from_json(const Json& j);

Json to_json(const CameraModel& camera);
CameraModel camera_from_json(const Json& j);

Json to_json(const BoardSpec& spec);
BoardSpec board_spec_from_json(const Json& j);

Json to_json(const SceneSpec& scene);
SceneSpec scene_from_json(const Json& j);

Json observations_to_json(const SimFrame& frame);
// (frame index, image size, per-board corner views)
struct FrameObservations {
  int frame_index = 0;
  int image_width = 0;
  int image_height = 0;
  std::vector<BoardCorners> boards;
};
FrameObservations observations_from_json(const Json& j);

Json truth_to_json(const SceneSpec& scene);

Json to_json(const BoardDetectionOutcome& outcome);
Json detections_to_json(const std::vector<BoardDetectionOutcome>& outcomes);
std::vector<BoardDetectionOutcome> detections_from_json(const Json& j);

Json to_json(const OptimizeReport& report);

Json pairs_to_json(const PointPairSet& pairs, const Anchors& anchors);
std::pair<PointPairSet, Anchors> pairs_from_json(const Json& j);

// ---------------------------------------------------------------------------
// Filesystem helpers.

void write_json_file(const std::filesystem::path& path, const Json& j);
Json read_json_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path,
                     const std::string& text);

// Field access that reports the missing/ill-typed key.
const Json& require(const Json& j, const std::string& key);

}  // namespace jointcalib
