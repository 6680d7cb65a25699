#pragma once

#include <cstdint>
#include <vector>

#include "jointcalib/board.hpp"
#include "jointcalib/geometry.hpp"

namespace jointcalib {

// Spinning-LiDAR model: fixed elevation channels swept over a uniform
// azimuth grid. LiDAR frame: x forward, y left, z up, origin at the sensor.
struct LidarConfig {
  double azimuth_start_deg = 0.0;
  double azimuth_end_deg = 360.0;
  double azimuth_step_deg = 0.2;
  std::vector<double> elevation_channels_deg;
  double range_noise_m = 0.0;
  bool ground_plane = false;
  double ground_z_m = -1.8;
};

struct PosedBoard {
  BoardSpec spec;
  Pose pose_board_to_lidar;
};

struct SceneSpec {
  CameraModel camera_truth;
  Pose t_lidar_camera_truth;  // p_camera = R * p_lidar + t
  std::vector<PosedBoard> boards;
  LidarConfig lidar;
  double corner_noise_px = 0.0;
  std::uint64_t rng_seed = 0;
  int image_width = 1920;
  int image_height = 1080;
  int frames = 1;
};

struct CloudPoint {
  Vec3 position;     // LiDAR frame
  double intensity;  // [0, 1]; cosmetic only, detection never reads it
};

struct CornerObservation {
  Vec3 board_point;  // board frame, z = 0
  Vec2 pixel;        // noisy detected position
};

struct BoardCorners {
  int board_index = 0;
  std::vector<CornerObservation> corners;
  int dropped = 0;  // corners that projected or wandered outside the image
};

struct SimFrame {
  int frame_index = 0;
  std::vector<CloudPoint> cloud;
  std::vector<BoardCorners> corner_obs;
  SceneSpec truth;
};

// Throws InvalidSpec on non-positive sizes, negative noise, boards behind
// the camera, or boards swept by fewer than 3 elevation channels.
void validate(const SceneSpec& scene);

// Projects each board corner through the ground-truth chain and adds
// Gaussian pixel noise. Corners outside the image are dropped and counted.
// Throws BoardNotVisible when fewer than 4 corners of a board survive.
std::vector<BoardCorners> simulate_corners(const SceneSpec& scene,
                                           int frame_index);

// Casts one ray per (elevation, azimuth) cell, returning the nearest board
// hit that is inside the outline and not through a hole; optional ground
// plane. Range noise is applied along the ray.
std::vector<CloudPoint> simulate_lidar(const SceneSpec& scene,
                                       int frame_index);

SimFrame simulate_frame(const SceneSpec& scene, int frame_index);

// Board plane as the mask samples it, posed in the LiDAR frame. Used by
// tests and scene setups that need sampling-exact target clouds rather
// than ray-cast ones.
std::vector<CloudPoint> board_surface_cloud(const PosedBoard& board,
                                            double pitch);

}  // namespace jointcalib
