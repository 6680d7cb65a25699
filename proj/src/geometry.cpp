#include "jointcalib/geometry.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace jointcalib {

namespace {

Mat3 skew(const Vec3& v) {
  Mat3 m;
  m << 0.0, -v.z(), v.y(),
       v.z(), 0.0, -v.x(),
       -v.y(), v.x(), 0.0;
  return m;
}

}  // namespace

Mat3 rotation_from_angle_axis(const Vec3& r) {
  const double theta = r.norm();
  const Mat3 K = skew(r);
  if (theta < 1e-8) {
    // Second-order Taylor expansion; exact at theta = 0.
    return Mat3::Identity() + K + 0.5 * K * K;
  }
  const double s = std::sin(theta) / theta;
  const double c = (1.0 - std::cos(theta)) / (theta * theta);
  return Mat3::Identity() + s * K + c * K * K;
}

Vec3 angle_axis_from_rotation(const Mat3& R) {
  const Mat3 err = R.transpose() * R - Mat3::Identity();
  if (err.cwiseAbs().maxCoeff() > 1e-6 || std::abs(R.determinant() - 1.0) > 1e-6) {
    fail(ErrorCode::NonRotationMatrix,
         "matrix is not orthogonal with determinant 1");
  }

  const double c = std::clamp((R.trace() - 1.0) * 0.5, -1.0, 1.0);
  const double theta = std::acos(c);
  const Vec3 s(R(2, 1) - R(1, 2), R(0, 2) - R(2, 0), R(1, 0) - R(0, 1));

  if (theta < 1e-7) {
    return 0.5 * s;
  }

  if (theta > std::numbers::pi - 1e-6) {
    // Near pi the skew part vanishes; recover the axis from R + I, whose
    // columns are all proportional to the axis. Pick the strongest column.
    const Mat3 B = R + Mat3::Identity();
    int best = 0;
    B.colwise().norm().maxCoeff(&best);
    Vec3 axis = B.col(best).normalized();
    if (s.norm() > 1e-12) {
      if (axis.dot(s) < 0.0) axis = -axis;
    } else {
      // Angle is exactly pi: r and -r are equivalent. Canonical sign:
      // largest-magnitude component positive.
      int k = 0;
      axis.cwiseAbs().maxCoeff(&k);
      if (axis[k] < 0.0) axis = -axis;
    }
    return theta * axis;
  }

  return (theta / (2.0 * std::sin(theta))) * s;
}

Vec3 pose_apply(const Pose& pose, const Vec3& point) {
  return rotation_from_angle_axis(pose.angle_axis) * point + pose.translation;
}

Pose pose_compose(const Pose& a, const Pose& b) {
  const Mat3 Ra = rotation_from_angle_axis(a.angle_axis);
  const Mat3 Rb = rotation_from_angle_axis(b.angle_axis);
  Pose out;
  out.angle_axis = angle_axis_from_rotation(Ra * Rb);
  out.translation = Ra * b.translation + a.translation;
  return out;
}

Pose pose_inverse(const Pose& pose) {
  const Mat3 R = rotation_from_angle_axis(pose.angle_axis);
  Pose out;
  out.angle_axis = angle_axis_from_rotation(R.transpose());
  out.translation = -(R.transpose() * pose.translation);
  return out;
}

namespace {

// Distortion polynomial without the validity-radius check; shared by the
// public entry point and the Newton inversion.
Vec2 distort_unchecked(const CameraModel& model, const Vec2& n) {
  const double k1 = model.dist[0];
  const double k2 = model.dist[1];
  const double p1 = model.dist[2];
  const double p2 = model.dist[3];
  const double x = n.x();
  const double y = n.y();
  const double r2 = x * x + y * y;
  const double radial = 1.0 + k1 * r2 + k2 * r2 * r2;
  return Vec2(x * radial + 2.0 * p1 * x * y + p2 * (r2 + 2.0 * x * x),
              y * radial + p1 * (r2 + 2.0 * y * y) + 2.0 * p2 * x * y);
}

Eigen::Matrix2d distort_jacobian(const CameraModel& model, const Vec2& n) {
  const double k1 = model.dist[0];
  const double k2 = model.dist[1];
  const double p1 = model.dist[2];
  const double p2 = model.dist[3];
  const double x = n.x();
  const double y = n.y();
  const double r2 = x * x + y * y;
  const double radial = 1.0 + k1 * r2 + k2 * r2 * r2;
  const double dr = k1 + 2.0 * k2 * r2;  // d(radial)/d(r2)
  Eigen::Matrix2d J;
  J(0, 0) = radial + 2.0 * x * x * dr + 2.0 * p1 * y + 6.0 * p2 * x;
  J(0, 1) = 2.0 * x * y * dr + 2.0 * p1 * x + 2.0 * p2 * y;
  J(1, 0) = J(0, 1);
  J(1, 1) = radial + 2.0 * y * y * dr + 6.0 * p1 * y + 2.0 * p2 * x;
  return J;
}

}  // namespace

Vec2 distort(const CameraModel& model, const Vec2& normalized) {
  if (normalized.norm() > model.validity_radius) {
    fail(ErrorCode::OutsideValidityRadius,
         "normalized radius " + std::to_string(normalized.norm()) +
             " exceeds validity radius " +
             std::to_string(model.validity_radius));
  }
  return distort_unchecked(model, normalized);
}

Vec2 undistort(const CameraModel& model, const Vec2& distorted) {
  if (distorted.norm() > model.validity_radius) {
    fail(ErrorCode::OutsideValidityRadius,
         "distorted point outside validity radius");
  }
  Vec2 x = distorted;
  for (int iter = 0; iter < 50; ++iter) {
    const Vec2 f = distort_unchecked(model, x) - distorted;
    if (f.norm() < 1e-10) return x;
    x -= distort_jacobian(model, x).partialPivLu().solve(f);
  }
  if ((distort_unchecked(model, x) - distorted).norm() < 1e-10) return x;
  fail(ErrorCode::NoConvergence, "undistort did not converge in 50 iterations");
}

Vec2 project(const CameraModel& model, const Pose& pose, const Vec3& point,
             double z_min) {
  const Vec3 pc = pose_apply(pose, point);
  if (pc.z() <= z_min) {
    fail(ErrorCode::BehindCamera,
         "transformed depth " + std::to_string(pc.z()) + " <= z_min");
  }
  const Vec2 d = distort(model, Vec2(pc.x() / pc.z(), pc.y() / pc.z()));
  return Vec2(model.fx * d.x() + model.skew * d.y() + model.cx,
              model.fy * d.y() + model.cy);
}

Mat3 rotation_from_rpy(const Vec3& rpy) {
  const double ca = std::cos(rpy.x()), sa = std::sin(rpy.x());
  const double cb = std::cos(rpy.y()), sb = std::sin(rpy.y());
  const double cc = std::cos(rpy.z()), sc = std::sin(rpy.z());
  Mat3 R;
  R << cb * cc, -cb * sc, sb,
       ca * sc + sa * sb * cc, ca * cc - sa * sb * sc, -sa * cb,
       sa * sc - ca * sb * cc, sa * cc + ca * sb * sc, ca * cb;
  return R;
}

Vec3 rpy_from_rotation(const Mat3& R) {
  const double sb = std::clamp(R(0, 2), -1.0, 1.0);
  const double pitch = std::asin(sb);
  if (std::abs(std::cos(pitch)) < 1e-9) {
    // Gimbal lock: yaw is unobservable, fold it into roll.
    return Vec3(std::atan2(R(1, 0), R(1, 1)), pitch, 0.0);
  }
  return Vec3(std::atan2(-R(1, 2), R(2, 2)), pitch,
              std::atan2(-R(0, 1), R(0, 0)));
}

}  // namespace jointcalib
