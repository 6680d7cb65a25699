#include "jointcalib/intrinsic_init.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <string>

namespace jointcalib {

namespace {

// Hartley normalization: centroid to the origin, mean distance sqrt(2).
Mat3 normalizing_transform(const std::vector<Vec2>& points) {
  Vec2 centroid = Vec2::Zero();
  for (const Vec2& p : points) centroid += p;
  centroid /= static_cast<double>(points.size());

  double mean_dist = 0.0;
  for (const Vec2& p : points) mean_dist += (p - centroid).norm();
  mean_dist /= static_cast<double>(points.size());
  const double scale = mean_dist > 1e-12 ? std::sqrt(2.0) / mean_dist : 1.0;

  Mat3 t;
  t << scale, 0.0, -scale * centroid.x(),
       0.0, scale, -scale * centroid.y(),
       0.0, 0.0, 1.0;
  return t;
}

Vec2 apply_h(const Mat3& t, const Vec2& p) {
  const Vec3 q = t * Vec3(p.x(), p.y(), 1.0);
  return Vec2(q.x() / q.z(), q.y() / q.z());
}

}  // namespace

Homography estimate_homography(const std::vector<Vec2>& board_xy,
                               const std::vector<Vec2>& pixels) {
  const std::size_t n = board_xy.size();
  if (n != pixels.size()) {
    fail(ErrorCode::DimensionMismatch, "correspondence count mismatch");
  }
  if (n < 4) {
    fail(ErrorCode::DegenerateConfiguration,
         "need >= 4 correspondences, got " + std::to_string(n));
  }

  const Mat3 tb = normalizing_transform(board_xy);
  const Mat3 tp = normalizing_transform(pixels);

  Eigen::MatrixXd a(2 * n, 9);
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 x = apply_h(tb, board_xy[i]);
    const Vec2 u = apply_h(tp, pixels[i]);
    a.row(2 * i) << 0.0, 0.0, 0.0, -x.x(), -x.y(), -1.0, u.y() * x.x(),
        u.y() * x.y(), u.y();
    a.row(2 * i + 1) << x.x(), x.y(), 1.0, 0.0, 0.0, 0.0, -u.x() * x.x(),
        -u.x() * x.y(), -u.x();
  }

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  // Rank must be 8 for a unique (up to scale) solution; collinear board
  // points collapse it.
  if (sv(7) < 1e-10 * sv(0)) {
    fail(ErrorCode::DegenerateConfiguration,
         "rank-deficient correspondence set");
  }

  const Eigen::VectorXd h = svd.matrixV().col(8);
  Mat3 hn;
  hn << h(0), h(1), h(2), h(3), h(4), h(5), h(6), h(7), h(8);

  Mat3 result = tp.inverse() * hn * tb;
  if (std::abs(result(2, 2)) < 1e-14 * result.cwiseAbs().maxCoeff()) {
    fail(ErrorCode::DegenerateConfiguration, "vanishing homography scale");
  }
  result /= result(2, 2);
  if (std::abs(result.determinant()) <= 1e-12) {
    fail(ErrorCode::DegenerateConfiguration, "singular homography");
  }
  return result;
}

namespace {

// Constraint row v_ij for B = K^-T K^-1 with B12 fixed to zero; the
// unknown vector is (B11, B22, B13, B23, B33).
Eigen::Matrix<double, 5, 1> conic_row(const Homography& h, int i, int j) {
  Eigen::Matrix<double, 5, 1> v;
  v << h(0, i) * h(0, j),
       h(1, i) * h(1, j),
       h(2, i) * h(0, j) + h(0, i) * h(2, j),
       h(2, i) * h(1, j) + h(1, i) * h(2, j),
       h(2, i) * h(2, j);
  return v;
}

}  // namespace

PinholeCore intrinsics_from_homographies(const std::vector<Homography>& hs) {
  if (hs.size() < 3) {
    fail(ErrorCode::DegenerateMotion,
         "need >= 3 views, got " + std::to_string(hs.size()));
  }

  Eigen::MatrixXd a(2 * hs.size(), 5);
  for (std::size_t v = 0; v < hs.size(); ++v) {
    a.row(2 * v) = conic_row(hs[v], 0, 1).transpose();
    a.row(2 * v + 1) =
        (conic_row(hs[v], 0, 0) - conic_row(hs[v], 1, 1)).transpose();
  }

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  if (sv(3) < 1e-9 * sv(0)) {
    fail(ErrorCode::DegenerateMotion,
         "board orientations do not constrain the conic (parallel views?)");
  }

  Eigen::VectorXd b = svd.matrixV().col(4);
  if (b(0) < 0.0) b = -b;
  const double b11 = b(0), b22 = b(1), b13 = b(2), b23 = b(3), b33 = b(4);
  if (b11 <= 0.0 || b22 <= 0.0) {
    fail(ErrorCode::NotPositiveDefinite, "conic matrix is not positive definite");
  }

  const double cx = -b13 / b11;
  const double cy = -b23 / b22;
  const double lambda = b33 - (b13 * b13 / b11 + b23 * b23 / b22);
  if (lambda <= 0.0) {
    fail(ErrorCode::NotPositiveDefinite, "negative conic scale");
  }

  PinholeCore core;
  core.fx = std::sqrt(lambda / b11);
  core.fy = std::sqrt(lambda / b22);
  core.cx = cx;
  core.cy = cy;
  return core;
}

Pose pose_from_homography(const Homography& h, const CameraModel& camera) {
  Mat3 k;
  k << camera.fx, camera.skew, camera.cx,
       0.0, camera.fy, camera.cy,
       0.0, 0.0, 1.0;

  Mat3 m = k.inverse() * h;
  const double scale = 1.0 / m.col(0).norm();
  m *= scale;

  if (m(2, 2) < 0.0) m = -m;  // board in front: t_z > 0
  if (m(2, 2) == 0.0) {
    fail(ErrorCode::BehindCamera, "no sign choice puts the board in front");
  }

  Mat3 r;
  r.col(0) = m.col(0);
  r.col(1) = m.col(1);
  r.col(2) = m.col(0).cross(m.col(1));

  // Nearest rotation.
  Eigen::JacobiSVD<Mat3> svd(r, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 nearest = svd.matrixU() * svd.matrixV().transpose();
  if (nearest.determinant() < 0.0) {
    Mat3 flip = Mat3::Identity();
    flip(2, 2) = -1.0;
    nearest = svd.matrixU() * flip * svd.matrixV().transpose();
  }

  Pose pose;
  pose.angle_axis = angle_axis_from_rotation(nearest);
  pose.translation = m.col(2);
  return pose;
}

InitResult initialize(const std::vector<CornerView>& views) {
  if (views.size() < 3) {
    fail(ErrorCode::InsufficientViews,
         "need >= 3 views, got " + std::to_string(views.size()));
  }

  std::vector<Homography> hs;
  hs.reserve(views.size());
  for (std::size_t v = 0; v < views.size(); ++v) {
    std::vector<Vec2> board_xy;
    board_xy.reserve(views[v].board_points.size());
    for (const Vec3& p : views[v].board_points) {
      board_xy.emplace_back(p.x(), p.y());
    }
    try {
      hs.push_back(estimate_homography(board_xy, views[v].pixels));
    } catch (const CalibError& e) {
      throw CalibError(e.code(), "view " + std::to_string(v) + ": " + e.what());
    }
  }

  const PinholeCore core = intrinsics_from_homographies(hs);

  InitResult result;
  result.camera.fx = core.fx;
  result.camera.fy = core.fy;
  result.camera.cx = core.cx;
  result.camera.cy = core.cy;
  result.camera.skew = 0.0;
  result.camera.dist = {0.0, 0.0, 0.0, 0.0};

  for (std::size_t v = 0; v < views.size(); ++v) {
    Pose pose;
    try {
      pose = pose_from_homography(hs[v], result.camera);
    } catch (const CalibError& e) {
      throw CalibError(e.code(), "view " + std::to_string(v) + ": " + e.what());
    }
    double sq_sum = 0.0;
    for (std::size_t i = 0; i < views[v].board_points.size(); ++i) {
      const Vec2 proj = project(result.camera, pose, views[v].board_points[i]);
      sq_sum += (proj - views[v].pixels[i]).squaredNorm();
    }
    result.board_poses.push_back(pose);
    result.per_view_rms_px.push_back(
        std::sqrt(sq_sum / static_cast<double>(views[v].board_points.size())));
  }
  return result;
}

}  // namespace jointcalib
