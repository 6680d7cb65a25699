#pragma once

#include <vector>

#include "jointcalib/geometry.hpp"

namespace jointcalib {

// Detected corners of one board view: board-frame points (z = 0) paired
// with pixel observations.
struct CornerView {
  std::vector<Vec3> board_points;
  std::vector<Vec2> pixels;
};

// Plane-to-image homography, normalized so H(2,2) = 1.
using Homography = Mat3;

// Normalized DLT (Hartley normalization on both point sets, SVD solve).
// Throws DegenerateConfiguration for fewer than 4 correspondences or a
// rank-deficient (collinear) configuration.
Homography estimate_homography(const std::vector<Vec2>& board_xy,
                               const std::vector<Vec2>& pixels);

struct PinholeCore {
  double fx = 0.0;
  double fy = 0.0;
  double cx = 0.0;
  double cy = 0.0;
};

// Closed-form intrinsics from the absolute-conic constraints, skew forced
// to zero. Needs >= 3 views with distinct board orientations. Throws
// DegenerateMotion / NotPositiveDefinite.
PinholeCore intrinsics_from_homographies(const std::vector<Homography>& hs);

// Board-to-camera pose from a homography and known intrinsics; rotation
// re-orthogonalized by nearest-rotation SVD, sign chosen so the board is
// in front of the camera. Throws BehindCamera when no sign works.
Pose pose_from_homography(const Homography& h, const CameraModel& camera);

struct InitResult {
  CameraModel camera;            // distortion zeros
  std::vector<Pose> board_poses; // board -> camera, one per view
  std::vector<double> per_view_rms_px;
};

// Zhang initialization over all views: homographies, closed-form
// intrinsics, per-view pose recovery, per-view corner RMS under the
// recovered parameters. Throws InsufficientViews for fewer than 3 views.
InitResult initialize(const std::vector<CornerView>& views);

}  // namespace jointcalib
