#pragma once

#include <Eigen/Core>

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "jointcalib/board.hpp"
#include "jointcalib/geometry.hpp"

namespace jointcalib {

// Per-view correspondence sets: the four circle-center pairs (LiDAR 3D,
// image 2D) plus the detected checkerboard corners.
struct BoardPairs {
  std::array<Vec3, 4> circle_p3d;  // LiDAR frame, canonical hole order
  std::array<Vec2, 4> circle_p2d;  // pixels
  std::vector<Vec3> corner_board;  // board frame
  std::vector<Vec2> corner_pixel;
};

struct PointPairSet {
  std::vector<BoardPairs> boards;
};

// Full unknown set: camera (fx, fy, cx, cy + 4 distortion), the
// LiDAR-to-camera transform, and one board-to-camera pose per view.
struct ParameterBlock {
  CameraModel camera;
  Pose t_lidar_camera;
  std::vector<Pose> board_poses;
};

struct OptimizeOptions {
  double w_lidar = 1.0;
  double w_corner = 1.0;
  double w_anchor = 1.0;
  int max_iters = 150;
  double lm_lambda_init = 1e-4;
  double gradient_tol = 1e-12;   // infinity norm of J^T r
  double param_tol = 1e-14;      // relative step size
  double cost_rel_tol = 1e-14;   // relative cost decrease per accepted step
  double lambda_max = 1e32;
};

struct StageTrace {
  std::string name;
  std::vector<double> cost_trace;  // initial cost, then each accepted step
  int iterations = 0;
  bool converged = false;
  std::string reason;
};

struct OptimizeReport {
  ParameterBlock params;
  double corner_rms_px = 0.0;
  double circle_rms_px = 0.0;  // residual group (a): LiDAR projections
  double anchor_rms_px = 0.0;  // residual group (c): board projections
  double final_cost = 0.0;
  bool converged = false;
  std::string reason;
  std::vector<StageTrace> stages;
};

// Frozen circle-center anchor points, one quadruple per view. Computed once
// from the initialization; they stay fixed during optimization.
using Anchors = std::vector<std::array<Vec2, 4>>;

// Parameter vector layout: [log fx, log fy, cx, cy, k1, k2, p1, p2,
// r_lc(3), t_lc(3), then (r_b(3), t_b(3)) per view].
constexpr int kCameraParams = 8;
constexpr int kExtrinsicOffset = kCameraParams;
constexpr int kBoardPoseOffset = kCameraParams + 6;
inline int parameter_count(int num_boards) {
  return kBoardPoseOffset + 6 * num_boards;
}

Eigen::VectorXd pack_parameters(const ParameterBlock& block);
ParameterBlock unpack_parameters(const Eigen::VectorXd& x, int num_boards,
                                 const CameraModel& camera_template);

// Anchor positions implied by a camera and a board pose: the projected
// hole centers, distortion included.
std::array<Vec2, 4> compute_circle_centers_2d(const CameraModel& camera,
                                              const Pose& board_to_camera,
                                              const BoardSpec& spec);

// Residual vector in pixels, three groups in order:
//  (a) LiDAR alignment  : sqrt(w_lidar)  * (project(T_lc, p3d) - p2d)
//  (b) corner constraint: sqrt(w_corner) * (project(T_bc, corner) - detected)
//  (c) anchor constraint: sqrt(w_anchor) * (project(T_bc, hole) - anchor)
Eigen::VectorXd build_residuals(const ParameterBlock& params,
                                const PointPairSet& pairs,
                                const Anchors& anchors, const BoardSpec& spec,
                                const OptimizeOptions& opts);

using ResidualFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

// Central finite differences, relative step 1e-6 with a 1e-8 floor.
Eigen::MatrixXd numeric_jacobian(const ResidualFn& fn,
                                 const Eigen::VectorXd& x);

// Joint Levenberg-Marquardt refinement of all parameters.
OptimizeReport solve(const ParameterBlock& initial, const PointPairSet& pairs,
                     const Anchors& anchors, const BoardSpec& spec,
                     const OptimizeOptions& opts);

// Ablation baseline: stage 1 fits camera and board poses to the corners
// only, stage 2 fits the LiDAR-camera transform alone against group (a).
OptimizeReport solve_two_stage(const ParameterBlock& initial,
                               const PointPairSet& pairs,
                               const Anchors& anchors, const BoardSpec& spec,
                               const OptimizeOptions& opts);

// Corner-only refinement of camera (intrinsics + distortion) and board
// poses; the LiDAR-camera transform is untouched. Shared by the two-stage
// baseline, the consistency study, and initialization polishing.
OptimizeReport refine_corners_only(const ParameterBlock& initial,
                                   const PointPairSet& pairs,
                                   const BoardSpec& spec,
                                   const OptimizeOptions& opts);

// Unweighted pixel RMS per residual group at the given parameters.
struct RmsBreakdown {
  double corner_px = 0.0;
  double circle_px = 0.0;
  double anchor_px = 0.0;
};
RmsBreakdown compute_rms(const ParameterBlock& params,
                         const PointPairSet& pairs, const Anchors& anchors,
                         const BoardSpec& spec);

}  // namespace jointcalib
