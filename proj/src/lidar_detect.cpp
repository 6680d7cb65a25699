#include "jointcalib/lidar_detect.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>

#include "jointcalib/rng.hpp"

namespace jointcalib {

std::vector<Vec3> roi_filter(const std::vector<Vec3>& points,
                             const DetectionParams& params) {
  std::vector<Vec3> out;
  for (const Vec3& p : points) {
    if (params.roi.contains(p)) out.push_back(p);
  }
  if (static_cast<int>(out.size()) < params.min_roi_points) {
    fail(ErrorCode::EmptyROI, "ROI kept " + std::to_string(out.size()) +
                                  " points (need >= " +
                                  std::to_string(params.min_roi_points) + ")");
  }
  return out;
}

namespace {

// Fold the normal into the expected hemisphere and test the cone constraint.
bool orientation_ok(Vec3& normal, const DetectionParams& params) {
  const Vec3 expected = params.expected_normal.normalized();
  if (normal.dot(expected) < 0.0) normal = -normal;
  const double cos_angle = std::clamp(normal.dot(expected), -1.0, 1.0);
  return std::acos(cos_angle) <= deg_to_rad(params.max_normal_angle_deg);
}

PlaneModel fit_plane_tls(const std::vector<Vec3>& points) {
  Vec3 centroid = Vec3::Zero();
  for (const Vec3& p : points) centroid += p;
  centroid /= static_cast<double>(points.size());

  Mat3 cov = Mat3::Zero();
  for (const Vec3& p : points) {
    const Vec3 r = p - centroid;
    cov += r * r.transpose();
  }
  Eigen::SelfAdjointEigenSolver<Mat3> eig(cov);
  PlaneModel plane;
  plane.normal = eig.eigenvectors().col(0).normalized();
  plane.d = -plane.normal.dot(centroid);
  return plane;
}

}  // namespace

std::pair<PlaneModel, std::vector<Vec3>> ransac_plane(
    const std::vector<Vec3>& points, const DetectionParams& params) {
  if (points.size() < 3) {
    fail(ErrorCode::NoValidPlane, "fewer than 3 points");
  }

  Rng rng(params.seed);
  const std::size_t n = points.size();

  int best_count = -1;
  PlaneModel best_plane;
  for (int iter = 0; iter < params.ransac_iters; ++iter) {
    const std::size_t i = rng.bounded(n);
    const std::size_t j = rng.bounded(n);
    const std::size_t k = rng.bounded(n);
    if (i == j || j == k || i == k) continue;

    Vec3 normal = (points[j] - points[i]).cross(points[k] - points[i]);
    const double norm = normal.norm();
    if (norm < 1e-12) continue;
    normal /= norm;
    if (!orientation_ok(normal, params)) continue;

    const double d = -normal.dot(points[i]);
    int count = 0;
    for (const Vec3& p : points) {
      if (std::abs(normal.dot(p) + d) <= params.ransac_inlier_thresh) ++count;
    }
    if (count > best_count) {
      best_count = count;
      best_plane.normal = normal;
      best_plane.d = d;
    }
  }

  if (best_count < 0 ||
      static_cast<double>(best_count) < 0.5 * static_cast<double>(n)) {
    fail(ErrorCode::NoValidPlane,
         "best inlier ratio below 0.5 (" + std::to_string(best_count) + "/" +
             std::to_string(n) + ")");
  }

  std::vector<Vec3> inliers;
  inliers.reserve(static_cast<std::size_t>(best_count));
  for (const Vec3& p : points) {
    if (std::abs(best_plane.signed_distance(p)) <= params.ransac_inlier_thresh) {
      inliers.push_back(p);
    }
  }

  PlaneModel refined = fit_plane_tls(inliers);
  if (refined.normal.dot(params.expected_normal.normalized()) < 0.0) {
    refined.normal = -refined.normal;
    refined.d = -refined.d;
  }
  return {refined, std::move(inliers)};
}

PlaneFrame make_plane_frame(const PlaneModel& plane,
                            const std::vector<Vec3>& inliers) {
  PlaneFrame frame;
  frame.normal = plane.normal;

  // Up direction projected into the plane; fall back to x for near-
  // horizontal planes.
  Vec3 up = Vec3::UnitZ() - plane.normal.z() * plane.normal;
  if (up.norm() < 1e-6) {
    up = Vec3::UnitX() - plane.normal.x() * plane.normal;
  }
  frame.ey = up.normalized();
  frame.ex = frame.ey.cross(plane.normal);

  Vec3 centroid = Vec3::Zero();
  for (const Vec3& p : inliers) centroid += p;
  centroid /= static_cast<double>(inliers.size());
  // Pin the origin onto the plane.
  frame.origin = centroid - plane.signed_distance(centroid) * plane.normal;
  return frame;
}

namespace {

struct GridAxis {
  double step;
  int half_count;  // values are i * step for i in [-half_count, half_count]
};

int occupancy_cost(const std::vector<Vec2>& target,
                   const std::array<Vec2, 4>& holes, double radius2,
                   double yaw, double tx, double ty) {
  // Place the hole centers in plane coordinates and count target points
  // falling inside any disc.
  const double c = std::cos(yaw);
  const double s = std::sin(yaw);
  std::array<Vec2, 4> placed;
  for (int k = 0; k < 4; ++k) {
    placed[k] = Vec2(c * holes[k].x() - s * holes[k].y() + tx,
                     s * holes[k].x() + c * holes[k].y() + ty);
  }
  int cost = 0;
  for (const Vec2& q : target) {
    for (const Vec2& h : placed) {
      if ((q - h).squaredNorm() < radius2) {
        ++cost;
        break;
      }
    }
  }
  return cost;
}

struct Candidate {
  double yaw = 0.0, x = 0.0, y = 0.0;
  int cost = std::numeric_limits<int>::max();

  bool better_than(const Candidate& other) const {
    if (cost != other.cost) return cost < other.cost;
    const double n2 = x * x + y * y;
    const double o2 = other.x * other.x + other.y * other.y;
    if (n2 != o2) return n2 < o2;
    return std::abs(yaw) < std::abs(other.yaw);
  }
};

Candidate search_grid(const std::vector<Vec2>& target,
                      const std::array<Vec2, 4>& holes, double radius2,
                      double yaw0, double x0, double y0, GridAxis yaw_axis,
                      GridAxis xy_axis) {
  Candidate best;
  for (int iy = -yaw_axis.half_count; iy <= yaw_axis.half_count; ++iy) {
    const double yaw = yaw0 + iy * yaw_axis.step;
    for (int ix = -xy_axis.half_count; ix <= xy_axis.half_count; ++ix) {
      const double x = x0 + ix * xy_axis.step;
      for (int jy = -xy_axis.half_count; jy <= xy_axis.half_count; ++jy) {
        const double y = y0 + jy * xy_axis.step;
        Candidate cand{yaw, x, y,
                       occupancy_cost(target, holes, radius2, yaw, x, y)};
        if (cand.better_than(best)) best = cand;
      }
    }
  }
  return best;
}

}  // namespace

AlignResult grid_search_align(const std::vector<Vec2>& target,
                              const MaskCloud& mask,
                              const DetectionParams& params) {
  if (static_cast<int>(target.size()) < params.min_target_points) {
    fail(ErrorCode::DegenerateTarget,
         "target has " + std::to_string(target.size()) + " points (need >= " +
             std::to_string(params.min_target_points) + ")");
  }
  const double radius2 = mask.hole_radius * mask.hole_radius;

  GridAxis yaw_axis{deg_to_rad(params.yaw_step_deg),
                    static_cast<int>(std::round(params.yaw_range_deg /
                                                params.yaw_step_deg))};
  GridAxis xy_axis{params.xy_step,
                   static_cast<int>(std::round(params.xy_range / params.xy_step))};

  Candidate best = search_grid(target, mask.hole_centers, radius2, 0.0, 0.0,
                               0.0, yaw_axis, xy_axis);

  for (int level = 0; level < params.refine_levels; ++level) {
    // Halve the steps; cover twice the previous step around the incumbent.
    yaw_axis.step *= 0.5;
    xy_axis.step *= 0.5;
    yaw_axis.half_count = 4;
    xy_axis.half_count = 4;
    const Candidate refined =
        search_grid(target, mask.hole_centers, radius2, best.yaw, best.x,
                    best.y, yaw_axis, xy_axis);
    if (refined.better_than(best)) best = refined;
  }

  return AlignResult{best.yaw, best.x, best.y, best.cost};
}

std::pair<Pose, std::array<Vec3, 4>> extract_circle_centers(
    const PlaneFrame& frame, const AlignResult& alignment,
    const BoardSpec& spec) {
  const double c = std::cos(alignment.yaw);
  const double s = std::sin(alignment.yaw);

  // Board axes in the LiDAR frame; the alignment fixes the in-plane part.
  const Vec3 bx = c * frame.ex + s * frame.ey;
  const Vec3 by = -s * frame.ex + c * frame.ey;
  Mat3 R;
  R.col(0) = bx;
  R.col(1) = by;
  R.col(2) = frame.normal;

  Pose pose;
  pose.angle_axis = angle_axis_from_rotation(R);
  pose.translation = frame.to_world(Vec2(alignment.x, alignment.y));

  std::array<Vec3, 4> centers;
  const auto board_centers = circle_centers(spec);
  for (int k = 0; k < 4; ++k) {
    centers[k] = R * board_centers[k] + pose.translation;
  }
  return {pose, centers};
}

BoardDetection detect_board(const std::vector<CloudPoint>& cloud,
                            const BoardSpec& spec,
                            const DetectionParams& params) {
  std::vector<Vec3> positions;
  positions.reserve(cloud.size());
  for (const CloudPoint& p : cloud) positions.push_back(p.position);

  const std::vector<Vec3> in_roi = roi_filter(positions, params);
  auto [plane, inliers] = ransac_plane(in_roi, params);
  const PlaneFrame frame = make_plane_frame(plane, inliers);

  std::vector<Vec2> target;
  target.reserve(inliers.size());
  for (const Vec3& p : inliers) target.push_back(frame.to_plane(p));

  const MaskCloud mask = make_mask(spec, params.mask_pitch);
  const AlignResult alignment = grid_search_align(target, mask, params);
  auto [pose, centers] = extract_circle_centers(frame, alignment, spec);

  BoardDetection detection;
  detection.plane = plane;
  detection.board_pose_in_lidar = pose;
  detection.circle_centers_3d = centers;
  detection.alignment_cost = alignment.cost;
  detection.inlier_count = static_cast<int>(inliers.size());
  return detection;
}

namespace {

std::string stage_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::EmptyROI: return "roi";
    case ErrorCode::NoValidPlane: return "plane";
    case ErrorCode::DegenerateTarget:
    case ErrorCode::InvalidPitch: return "align";
    default: return "detect";
  }
}

// Per-board RANSAC stream tied to the ROI box rather than the list position,
// so reordering the boards cannot change any per-board result.
std::uint64_t roi_stream(std::uint64_t seed, const AabbBox& roi) {
  std::uint64_t h = seed;
  for (double v : {roi.min.x(), roi.min.y(), roi.min.z(), roi.max.x(),
                   roi.max.y(), roi.max.z()}) {
    std::uint64_t bits;
    static_assert(sizeof(bits) == sizeof(v));
    std::memcpy(&bits, &v, sizeof(bits));
    h ^= bits + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
  }
  return h;
}

}  // namespace

std::vector<BoardDetectionOutcome> detect_boards(
    const std::vector<CloudPoint>& cloud, const BoardSpec& spec,
    const std::vector<DetectionParams>& per_board) {
  for (std::size_t a = 0; a < per_board.size(); ++a) {
    for (std::size_t b = a + 1; b < per_board.size(); ++b) {
      if (per_board[a].roi.intersects(per_board[b].roi)) {
        fail(ErrorCode::ConfigError,
             "ROI boxes " + std::to_string(a) + " and " + std::to_string(b) +
                 " overlap");
      }
    }
  }

  std::vector<BoardDetectionOutcome> outcomes;
  outcomes.reserve(per_board.size());
  for (std::size_t b = 0; b < per_board.size(); ++b) {
    BoardDetectionOutcome outcome;
    outcome.board_index = static_cast<int>(b);
    DetectionParams params = per_board[b];
    params.seed = roi_stream(params.seed, params.roi);
    try {
      outcome.detection = detect_board(cloud, spec, params);
      outcome.ok = true;
    } catch (const CalibError& e) {
      outcome.ok = false;
      outcome.stage = stage_for(e.code());
      outcome.error = e.what();
    }
    outcomes.push_back(std::move(outcome));
  }
  return outcomes;
}

}  // namespace jointcalib
