#include "jointcalib/simulate.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "jointcalib/rng.hpp"

namespace jointcalib {

namespace {

constexpr std::uint64_t kCornerStream = 0xC0;
constexpr std::uint64_t kLidarStream = 0x11;

Pose board_to_camera(const SceneSpec& scene, const PosedBoard& board) {
  return pose_compose(scene.t_lidar_camera_truth, board.pose_board_to_lidar);
}

bool inside_image(const Vec2& px, int width, int height) {
  return px.x() >= 0.0 && px.x() < width && px.y() >= 0.0 && px.y() < height;
}

}  // namespace

void validate(const SceneSpec& scene) {
  if (scene.image_width <= 0 || scene.image_height <= 0) {
    fail(ErrorCode::InvalidSpec, "image size must be positive");
  }
  if (scene.camera_truth.fx <= 0.0 || scene.camera_truth.fy <= 0.0) {
    fail(ErrorCode::InvalidSpec, "focal lengths must be positive");
  }
  if (scene.camera_truth.cx < 0.0 || scene.camera_truth.cx > scene.image_width ||
      scene.camera_truth.cy < 0.0 || scene.camera_truth.cy > scene.image_height) {
    fail(ErrorCode::InvalidSpec, "principal point outside the image bound");
  }
  if (scene.corner_noise_px < 0.0 || scene.lidar.range_noise_m < 0.0) {
    fail(ErrorCode::InvalidSpec, "noise sigmas must be non-negative");
  }
  if (scene.boards.empty()) {
    fail(ErrorCode::InvalidSpec, "scene has no boards");
  }
  if (scene.frames < 1) {
    fail(ErrorCode::InvalidSpec, "frame count must be >= 1");
  }
  if (scene.lidar.azimuth_step_deg <= 0.0) {
    fail(ErrorCode::InvalidSpec, "azimuth step must be positive");
  }

  for (std::size_t b = 0; b < scene.boards.size(); ++b) {
    const PosedBoard& board = scene.boards[b];
    validate(board.spec);

    const Pose t_bc = board_to_camera(scene, board);
    if (pose_apply(t_bc, Vec3::Zero()).z() <= 0.0) {
      fail(ErrorCode::InvalidSpec,
           "board " + std::to_string(b) + " is behind the camera");
    }

    // The holes must interact with several scan lines: require at least 3
    // elevation channels sweeping through the board's elevation span.
    const Mat3 R = rotation_from_angle_axis(board.pose_board_to_lidar.angle_axis);
    const Vec3 t = board.pose_board_to_lidar.translation;
    const double hw = 0.5 * board.spec.board_width;
    const double hh = 0.5 * board.spec.board_height;
    double min_elev = std::numeric_limits<double>::infinity();
    double max_elev = -std::numeric_limits<double>::infinity();
    for (const Vec2 corner : {Vec2(-hw, -hh), Vec2(hw, -hh), Vec2(-hw, hh), Vec2(hw, hh)}) {
      const Vec3 p = R * Vec3(corner.x(), corner.y(), 0.0) + t;
      const double elev = rad_to_deg(std::atan2(p.z(), std::hypot(p.x(), p.y())));
      min_elev = std::min(min_elev, elev);
      max_elev = std::max(max_elev, elev);
    }
    int swept = 0;
    for (double channel : scene.lidar.elevation_channels_deg) {
      if (channel >= min_elev && channel <= max_elev) ++swept;
    }
    if (swept < 3) {
      fail(ErrorCode::InvalidSpec,
           "board " + std::to_string(b) + " is swept by " +
               std::to_string(swept) + " elevation channels (need >= 3)");
    }
  }
}

std::vector<BoardCorners> simulate_corners(const SceneSpec& scene,
                                           int frame_index) {
  Rng rng = Rng::derive(scene.rng_seed, static_cast<std::uint64_t>(frame_index),
                        kCornerStream);
  std::vector<BoardCorners> out;
  out.reserve(scene.boards.size());

  for (std::size_t b = 0; b < scene.boards.size(); ++b) {
    const PosedBoard& board = scene.boards[b];
    const Pose t_bc = board_to_camera(scene, board);

    BoardCorners obs;
    obs.board_index = static_cast<int>(b);
    for (const Vec3& corner : corner_points(board.spec)) {
      Vec2 exact;
      try {
        exact = project(scene.camera_truth, t_bc, corner);
      } catch (const CalibError&) {
        ++obs.dropped;
        continue;
      }
      if (!inside_image(exact, scene.image_width, scene.image_height)) {
        ++obs.dropped;
        continue;
      }
      const Vec2 noisy = exact + Vec2(rng.normal(scene.corner_noise_px),
                                      rng.normal(scene.corner_noise_px));
      if (!inside_image(noisy, scene.image_width, scene.image_height)) {
        ++obs.dropped;
        continue;
      }
      obs.corners.push_back({corner, noisy});
    }
    if (obs.corners.size() < 4) {
      fail(ErrorCode::BoardNotVisible,
           "board " + std::to_string(b) + " kept " +
               std::to_string(obs.corners.size()) + " corners");
    }
    out.push_back(std::move(obs));
  }
  return out;
}

namespace {

struct BoardGeometry {
  Mat3 rotation;        // board -> LiDAR
  Vec3 translation;
  Vec3 normal;          // board z axis in LiDAR frame
  double plane_offset;  // normal . translation
};

double checker_intensity(const BoardSpec& spec, const Vec2& q) {
  const double hw = 0.5 * (spec.checker_cols + 1) * spec.square_size;
  const double hh = 0.5 * (spec.checker_rows + 1) * spec.square_size;
  if (std::abs(q.x()) > hw || std::abs(q.y()) > hh) return 0.5;
  const int i = static_cast<int>(std::floor((q.x() + hw) / spec.square_size));
  const int j = static_cast<int>(std::floor((q.y() + hh) / spec.square_size));
  return ((i + j) % 2 == 0) ? 1.0 : 0.1;
}

}  // namespace

std::vector<CloudPoint> simulate_lidar(const SceneSpec& scene,
                                       int frame_index) {
  Rng rng = Rng::derive(scene.rng_seed, static_cast<std::uint64_t>(frame_index),
                        kLidarStream);

  std::vector<BoardGeometry> geometry;
  geometry.reserve(scene.boards.size());
  for (const PosedBoard& board : scene.boards) {
    BoardGeometry g;
    g.rotation = rotation_from_angle_axis(board.pose_board_to_lidar.angle_axis);
    g.translation = board.pose_board_to_lidar.translation;
    g.normal = g.rotation.col(2);
    g.plane_offset = g.normal.dot(g.translation);
    geometry.push_back(g);
  }

  constexpr double kMinRange = 1e-3;
  std::vector<CloudPoint> cloud;

  const int azimuth_count = static_cast<int>(std::floor(
      (scene.lidar.azimuth_end_deg - scene.lidar.azimuth_start_deg) /
          scene.lidar.azimuth_step_deg +
      1e-9));

  for (double elevation_deg : scene.lidar.elevation_channels_deg) {
    const double elevation = deg_to_rad(elevation_deg);
    const double ce = std::cos(elevation);
    const double se = std::sin(elevation);
    for (int a = 0; a < azimuth_count; ++a) {
      const double azimuth = deg_to_rad(scene.lidar.azimuth_start_deg +
                                        a * scene.lidar.azimuth_step_deg);
      const Vec3 dir(ce * std::cos(azimuth), ce * std::sin(azimuth), se);

      double best_range = std::numeric_limits<double>::infinity();
      double intensity = 0.0;
      for (std::size_t b = 0; b < geometry.size(); ++b) {
        const BoardGeometry& g = geometry[b];
        const double denom = g.normal.dot(dir);
        if (std::abs(denom) < 1e-12) continue;
        const double range = g.plane_offset / denom;
        if (range <= kMinRange || range >= best_range) continue;

        const Vec3 hit = range * dir;
        const Vec3 local = g.rotation.transpose() * (hit - g.translation);
        const BoardSpec& spec = scene.boards[b].spec;
        if (std::abs(local.x()) > 0.5 * spec.board_width ||
            std::abs(local.y()) > 0.5 * spec.board_height) {
          continue;
        }
        bool through_hole = false;
        for (const Vec2& c : spec.hole_centers) {
          if ((Vec2(local.x(), local.y()) - c).norm() < spec.hole_radius) {
            through_hole = true;
            break;
          }
        }
        if (through_hole) continue;

        best_range = range;
        intensity = checker_intensity(spec, Vec2(local.x(), local.y()));
      }

      if (scene.lidar.ground_plane && dir.z() < -1e-12) {
        const double range = scene.lidar.ground_z_m / dir.z();
        if (range > kMinRange && range < best_range) {
          best_range = range;
          intensity = 0.5;
        }
      }

      if (std::isfinite(best_range)) {
        const double noisy_range =
            best_range + rng.normal(scene.lidar.range_noise_m);
        cloud.push_back({noisy_range * dir, intensity});
      }
    }
  }
  return cloud;
}

SimFrame simulate_frame(const SceneSpec& scene, int frame_index) {
  SimFrame frame;
  frame.frame_index = frame_index;
  frame.corner_obs = simulate_corners(scene, frame_index);
  frame.cloud = simulate_lidar(scene, frame_index);
  frame.truth = scene;
  return frame;
}

std::vector<CloudPoint> board_surface_cloud(const PosedBoard& board,
                                            double pitch) {
  const MaskCloud mask = make_mask(board.spec, pitch);
  const Mat3 R = rotation_from_angle_axis(board.pose_board_to_lidar.angle_axis);
  std::vector<CloudPoint> cloud;
  cloud.reserve(mask.points.size());
  for (const Vec3& p : mask.points) {
    const Vec3 q = R * p + board.pose_board_to_lidar.translation;
    cloud.push_back({q, checker_intensity(board.spec, Vec2(p.x(), p.y()))});
  }
  return cloud;
}

}  // namespace jointcalib
