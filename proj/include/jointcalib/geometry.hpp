#pragma once

#include <Eigen/Core>

#include <array>

#include "jointcalib/error.hpp"

namespace jointcalib {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

inline bool is_finite(const Vec2& v) { return v.allFinite(); }
inline bool is_finite(const Vec3& v) { return v.allFinite(); }

// Rigid transform parameterized as angle-axis rotation plus translation.
// Composition keeps the rotation vector canonical (angle in [0, pi]).
struct Pose {
  Vec3 angle_axis = Vec3::Zero();
  Vec3 translation = Vec3::Zero();

  static Pose identity() { return Pose{}; }
};

// Pinhole intrinsics with Brown-Conrady distortion (k1, k2, p1, p2).
// Distortion acts on normalized image coordinates; the validity radius
// bounds the normalized radius the polynomial is trusted for.
struct CameraModel {
  double fx = 0.0;
  double fy = 0.0;
  double cx = 0.0;
  double cy = 0.0;
  double skew = 0.0;
  std::array<double, 4> dist{0.0, 0.0, 0.0, 0.0};
  double validity_radius = 1.5;
};

// Rodrigues formula; second-order Taylor expansion near zero angle.
Mat3 rotation_from_angle_axis(const Vec3& r);

// Inverse of rotation_from_angle_axis with canonical angle in [0, pi].
// Throws NonRotationMatrix if R is not orthogonal with determinant 1
// (checked to 1e-6).
Vec3 angle_axis_from_rotation(const Mat3& R);

Vec3 pose_apply(const Pose& pose, const Vec3& point);
Pose pose_compose(const Pose& a, const Pose& b);
Pose pose_inverse(const Pose& pose);

// Brown-Conrady distortion in normalized coordinates. Throws
// OutsideValidityRadius beyond the model's validity radius.
Vec2 distort(const CameraModel& model, const Vec2& normalized);

// Newton inversion of distort; throws NoConvergence after 50 iterations.
Vec2 undistort(const CameraModel& model, const Vec2& distorted);

// Full projection chain: rigid transform, perspective divide, distortion,
// pixel mapping. Throws BehindCamera when the transformed depth is <= z_min.
Vec2 project(const CameraModel& model, const Pose& pose, const Vec3& point,
             double z_min = 1e-6);

// Euler convention used for reporting: intrinsic x-y'-z'' (roll-pitch-yaw),
// i.e. R = Rx(roll) * Ry(pitch) * Rz(yaw). Angles in radians.
Mat3 rotation_from_rpy(const Vec3& rpy);
Vec3 rpy_from_rotation(const Mat3& R);

inline double deg_to_rad(double deg) { return deg * 0.017453292519943295; }
inline double rad_to_deg(double rad) { return rad * 57.29577951308232; }

}  // namespace jointcalib
