#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "jointcalib/board.hpp"
#include "jointcalib/simulate.hpp"

namespace jointcalib {

struct AabbBox {
  Vec3 min = Vec3::Zero();
  Vec3 max = Vec3::Zero();

  bool contains(const Vec3& p) const {
    return p.x() > min.x() && p.x() < max.x() && p.y() > min.y() &&
           p.y() < max.y() && p.z() > min.z() && p.z() < max.z();
  }
  bool intersects(const AabbBox& other) const {
    return min.x() < other.max.x() && other.min.x() < max.x() &&
           min.y() < other.max.y() && other.min.y() < max.y() &&
           min.z() < other.max.z() && other.min.z() < max.z();
  }
};

struct DetectionParams {
  AabbBox roi;
  int ransac_iters = 500;
  double ransac_inlier_thresh = 0.012;
  Vec3 expected_normal = Vec3(-1.0, 0.0, 0.0);
  double max_normal_angle_deg = 30.0;
  double yaw_range_deg = 10.0;
  double yaw_step_deg = 2.0;
  double xy_range = 0.2;
  double xy_step = 0.02;
  int refine_levels = 3;
  double mask_pitch = 0.02;
  int min_roi_points = 100;
  int min_target_points = 200;
  std::uint64_t seed = 0;
};

// Plane n . p + d = 0 with |n| = 1.
struct PlaneModel {
  Vec3 normal = Vec3::UnitZ();
  double d = 0.0;

  double signed_distance(const Vec3& p) const { return normal.dot(p) + d; }
};

// Orthonormal in-plane frame used by the grid alignment. ey is the LiDAR
// up direction projected into the plane, so an upright board reads out
// with yaw near zero; the origin sits at the target centroid.
struct PlaneFrame {
  Vec3 origin = Vec3::Zero();
  Vec3 ex = Vec3::UnitX();
  Vec3 ey = Vec3::UnitY();
  Vec3 normal = Vec3::UnitZ();

  Vec2 to_plane(const Vec3& p) const {
    const Vec3 r = p - origin;
    return Vec2(ex.dot(r), ey.dot(r));
  }
  Vec3 to_world(const Vec2& q) const { return origin + q.x() * ex + q.y() * ey; }
};

// In-plane board placement: board point b maps to plane coordinates
// R(yaw) * b + (x, y). Cost counts target points inside the mask holes.
struct AlignResult {
  double yaw = 0.0;
  double x = 0.0;
  double y = 0.0;
  int cost = 0;
};

struct BoardDetection {
  PlaneModel plane;
  Pose board_pose_in_lidar;
  std::array<Vec3, 4> circle_centers_3d;  // canonical hole order
  int alignment_cost = 0;
  int inlier_count = 0;
};

struct BoardDetectionOutcome {
  int board_index = 0;
  bool ok = false;
  BoardDetection detection;
  std::string stage;  // "roi", "plane", or "align" when ok == false
  std::string error;
};

// Points strictly inside the ROI box. Throws EmptyROI when fewer than
// params.min_roi_points survive.
std::vector<Vec3> roi_filter(const std::vector<Vec3>& points,
                             const DetectionParams& params);

// Seeded RANSAC with an orientation constraint on the hypothesis normal,
// followed by a total-least-squares refit on the winning inliers. Throws
// NoValidPlane when the best inlier ratio is below 0.5.
std::pair<PlaneModel, std::vector<Vec3>> ransac_plane(
    const std::vector<Vec3>& points, const DetectionParams& params);

PlaneFrame make_plane_frame(const PlaneModel& plane,
                            const std::vector<Vec3>& inliers);

// Exhaustive search over the (yaw, x, y) grid for the placement that drops
// the fewest target points into the mask holes, then refine_levels rounds
// of local refinement with the step halved each time. Ties break toward
// the smallest |(x, y)|, then the smallest |yaw|.
AlignResult grid_search_align(const std::vector<Vec2>& target,
                              const MaskCloud& mask,
                              const DetectionParams& params);

// Board pose and hole centers implied by the aligned in-plane transform.
std::pair<Pose, std::array<Vec3, 4>> extract_circle_centers(
    const PlaneFrame& frame, const AlignResult& alignment,
    const BoardSpec& spec);

BoardDetection detect_board(const std::vector<CloudPoint>& cloud,
                            const BoardSpec& spec,
                            const DetectionParams& params);

// Runs the full chain once per ROI; a failing board is reported in its
// outcome without aborting the others. ROI boxes must be disjoint.
std::vector<BoardDetectionOutcome> detect_boards(
    const std::vector<CloudPoint>& cloud, const BoardSpec& spec,
    const std::vector<DetectionParams>& per_board);

}  // namespace jointcalib
