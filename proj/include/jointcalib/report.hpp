#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "jointcalib/intrinsic_init.hpp"
#include "jointcalib/io.hpp"
#include "jointcalib/joint_optimize.hpp"

namespace jointcalib {

// ---------------------------------------------------------------------------
// Extrinsic evaluation (truth vs. estimate).

struct ExtrinsicEval {
  Vec3 dt_abs_m;         // |t_est - t_truth| per axis
  Vec3 drpy_abs_deg;     // per-Euler-angle absolute deltas
  double geodesic_deg;   // total rotation angle of R_est^T R_truth
  Vec3 t_truth, t_estimate;
  Vec3 rpy_truth_deg, rpy_estimate_deg;
};

ExtrinsicEval evaluate_extrinsic(const Pose& estimate, const Pose& truth);
Json to_json(const ExtrinsicEval& eval);

// ---------------------------------------------------------------------------
// One-stage vs. two-stage ablation. The perturbed initialization feeds both
// routes, and both share the anchors computed from it.

struct AblationResult {
  double one_stage_corner_rms = 0.0;
  double one_stage_circle_rms = 0.0;
  double two_stage_corner_rms = 0.0;
  double two_stage_circle_rms = 0.0;
  bool circle_ordering_holds = false;  // one-stage < two-stage
  bool corner_ordering_holds = false;  // two-stage <= one-stage
  OptimizeReport one_stage;
  OptimizeReport two_stage;
};

AblationResult run_ablation(const ParameterBlock& init,
                            const PointPairSet& pairs, const BoardSpec& spec,
                            double fx_perturb_fraction,
                            const OptimizeOptions& opts);
Json to_json(const AblationResult& result);

// ---------------------------------------------------------------------------
// Intrinsic calibration consistency study: repeated calibration on random
// view subsets, reporting per-parameter mean and standard deviation.

struct ConsistencyGroupStats {
  int group_index = 0;
  int trials = 0;
  int subset_size = 0;
  // Order: fx, fy, cx, cy, k1, k2, p1, p2.
  std::array<double, 8> mean{};
  std::array<double, 8> stddev{};
};

struct ConsistencyOptions {
  int trials = 100;
  int subset_size = 25;
  std::uint64_t seed = 0;
  bool refine_with_lm = true;   // corner-only LM after Zhang (adds distortion)
  OptimizeOptions lm;
};

std::vector<ConsistencyGroupStats> run_consistency(
    const std::vector<std::vector<CornerView>>& groups,
    const ConsistencyOptions& options);
Json to_json(const std::vector<ConsistencyGroupStats>& stats);

// ---------------------------------------------------------------------------
// Overlay rendering: cloud points projected through the calibration, drawn
// as intensity-colored discs; circle-center pairs drawn as ring (projected
// LiDAR center) and cross (anchor).

struct RenderOptions {
  int point_radius_px = 2;
  std::optional<Image> background;
};

struct CirclePairMark {
  Vec3 p3d;      // LiDAR frame
  Vec2 anchor;   // pixels
};

struct RenderStats {
  int drawn = 0;
  int skipped = 0;  // behind the camera or outside the canvas
};

Image render_overlay(const std::vector<CloudPoint>& cloud,
                     const CameraModel& camera, const Pose& t_lidar_camera,
                     int width, int height,
                     const std::vector<CirclePairMark>& marks,
                     const RenderOptions& options, RenderStats* stats = nullptr);

}  // namespace jointcalib
