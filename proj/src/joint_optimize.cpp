#include "jointcalib/joint_optimize.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <utility>

namespace jointcalib {

Eigen::VectorXd pack_parameters(const ParameterBlock& block) {
  Eigen::VectorXd x(parameter_count(static_cast<int>(block.board_poses.size())));
  x(0) = std::log(block.camera.fx);
  x(1) = std::log(block.camera.fy);
  x(2) = block.camera.cx;
  x(3) = block.camera.cy;
  for (int i = 0; i < 4; ++i) x(4 + i) = block.camera.dist[i];
  x.segment<3>(kExtrinsicOffset) = block.t_lidar_camera.angle_axis;
  x.segment<3>(kExtrinsicOffset + 3) = block.t_lidar_camera.translation;
  for (std::size_t b = 0; b < block.board_poses.size(); ++b) {
    const int at = kBoardPoseOffset + 6 * static_cast<int>(b);
    x.segment<3>(at) = block.board_poses[b].angle_axis;
    x.segment<3>(at + 3) = block.board_poses[b].translation;
  }
  return x;
}

ParameterBlock unpack_parameters(const Eigen::VectorXd& x, int num_boards,
                                 const CameraModel& camera_template) {
  if (x.size() != parameter_count(num_boards)) {
    fail(ErrorCode::DimensionMismatch, "parameter vector size mismatch");
  }
  ParameterBlock block;
  block.camera = camera_template;
  block.camera.fx = std::exp(x(0));
  block.camera.fy = std::exp(x(1));
  block.camera.cx = x(2);
  block.camera.cy = x(3);
  for (int i = 0; i < 4; ++i) block.camera.dist[i] = x(4 + i);
  block.t_lidar_camera.angle_axis = x.segment<3>(kExtrinsicOffset);
  block.t_lidar_camera.translation = x.segment<3>(kExtrinsicOffset + 3);
  block.board_poses.resize(num_boards);
  for (int b = 0; b < num_boards; ++b) {
    const int at = kBoardPoseOffset + 6 * b;
    block.board_poses[b].angle_axis = x.segment<3>(at);
    block.board_poses[b].translation = x.segment<3>(at + 3);
  }
  return block;
}

std::array<Vec2, 4> compute_circle_centers_2d(const CameraModel& camera,
                                              const Pose& board_to_camera,
                                              const BoardSpec& spec) {
  const auto centers = circle_centers(spec);
  std::array<Vec2, 4> out;
  for (int k = 0; k < 4; ++k) {
    out[k] = project(camera, board_to_camera, centers[k]);
  }
  return out;
}

namespace {

void check_dimensions(const PointPairSet& pairs, const Anchors& anchors,
                      const ParameterBlock& params) {
  if (pairs.boards.size() != anchors.size()) {
    fail(ErrorCode::DimensionMismatch,
         "pair set and anchor set sizes differ");
  }
  if (pairs.boards.size() != params.board_poses.size()) {
    fail(ErrorCode::DimensionMismatch,
         "pair set and board pose counts differ");
  }
  for (const BoardPairs& b : pairs.boards) {
    if (b.corner_board.size() != b.corner_pixel.size()) {
      fail(ErrorCode::DimensionMismatch, "corner pair counts differ");
    }
  }
}

int residual_size(const PointPairSet& pairs) {
  int corners = 0;
  for (const BoardPairs& b : pairs.boards) {
    corners += static_cast<int>(b.corner_board.size());
  }
  const int n_boards = static_cast<int>(pairs.boards.size());
  return 2 * (4 * n_boards + corners + 4 * n_boards);
}

}  // namespace

Eigen::VectorXd build_residuals(const ParameterBlock& params,
                                const PointPairSet& pairs,
                                const Anchors& anchors, const BoardSpec& spec,
                                const OptimizeOptions& opts) {
  check_dimensions(pairs, anchors, params);

  Eigen::VectorXd r(residual_size(pairs));
  const double sw_lidar = std::sqrt(opts.w_lidar);
  const double sw_corner = std::sqrt(opts.w_corner);
  const double sw_anchor = std::sqrt(opts.w_anchor);
  const auto hole_points = circle_centers(spec);

  int at = 0;
  // (a) LiDAR alignment: projected LiDAR circle centers vs. the 2D pairs.
  for (std::size_t b = 0; b < pairs.boards.size(); ++b) {
    for (int k = 0; k < 4; ++k) {
      const Vec2 proj = project(params.camera, params.t_lidar_camera,
                                pairs.boards[b].circle_p3d[k]);
      r.segment<2>(at) = sw_lidar * (proj - pairs.boards[b].circle_p2d[k]);
      at += 2;
    }
  }
  // (b) corner constraint: projected board corners vs. detections.
  for (std::size_t b = 0; b < pairs.boards.size(); ++b) {
    const BoardPairs& bp = pairs.boards[b];
    for (std::size_t i = 0; i < bp.corner_board.size(); ++i) {
      const Vec2 proj =
          project(params.camera, params.board_poses[b], bp.corner_board[i]);
      r.segment<2>(at) = sw_corner * (proj - bp.corner_pixel[i]);
      at += 2;
    }
  }
  // (c) anchor constraint: projected hole centers vs. frozen anchors.
  for (std::size_t b = 0; b < pairs.boards.size(); ++b) {
    for (int k = 0; k < 4; ++k) {
      const Vec2 proj =
          project(params.camera, params.board_poses[b], hole_points[k]);
      r.segment<2>(at) = sw_anchor * (proj - anchors[b][k]);
      at += 2;
    }
  }
  return r;
}

Eigen::MatrixXd numeric_jacobian(const ResidualFn& fn,
                                 const Eigen::VectorXd& x) {
  const Eigen::VectorXd r0 = fn(x);
  Eigen::MatrixXd jac(r0.size(), x.size());
  Eigen::VectorXd probe = x;
  for (int c = 0; c < x.size(); ++c) {
    const double h = std::max(1e-6 * std::abs(x(c)), 1e-8);
    probe(c) = x(c) + h;
    std::optional<Eigen::VectorXd> plus;
    try {
      plus = fn(probe);
    } catch (const CalibError&) {
    }
    probe(c) = x(c) - h;
    std::optional<Eigen::VectorXd> minus;
    try {
      minus = fn(probe);
    } catch (const CalibError&) {
    }
    probe(c) = x(c);

    if (plus && minus) {
      jac.col(c) = (*plus - *minus) / (2.0 * h);
    } else if (plus) {
      jac.col(c) = (*plus - r0) / h;
    } else if (minus) {
      jac.col(c) = (r0 - *minus) / h;
    } else {
      throw CalibError(ErrorCode::BehindCamera,
                       "residuals not evaluable near parameter " +
                           std::to_string(c));
    }
  }
  return jac;
}

namespace {

struct LmOutcome {
  Eigen::VectorXd x;
  StageTrace trace;
  double final_cost = 0.0;
};

std::optional<Eigen::VectorXd> try_residuals(const ResidualFn& fn,
                                             const Eigen::VectorXd& x) {
  try {
    return fn(x);
  } catch (const CalibError&) {
    return std::nullopt;
  }
}

// Damped Gauss-Newton with Marquardt diagonal scaling. Steps are accepted
// only when the cost decreases; lambda halves on accept and quadruples on
// reject.
LmOutcome lm_minimize(const std::string& name, const ResidualFn& fn,
                      const Eigen::VectorXd& x0, const OptimizeOptions& opts) {
  LmOutcome out;
  out.trace.name = name;

  Eigen::VectorXd x = x0;
  Eigen::VectorXd r = fn(x);  // initial point must be evaluable
  double cost = r.squaredNorm();
  out.trace.cost_trace.push_back(cost);

  double lambda = opts.lm_lambda_init;
  auto finish = [&](bool converged, const std::string& reason) {
    out.x = x;
    out.final_cost = cost;
    out.trace.converged = converged;
    out.trace.reason = reason;
    return out;
  };

  if (cost == 0.0) return finish(true, "zero_cost");

  for (int iter = 0; iter < opts.max_iters; ++iter) {
    out.trace.iterations = iter + 1;

    const Eigen::MatrixXd jac = numeric_jacobian(fn, x);
    const Eigen::VectorXd gradient = jac.transpose() * r;
    if (gradient.lpNorm<Eigen::Infinity>() < opts.gradient_tol) {
      return finish(true, "gradient");
    }

    const Eigen::MatrixXd jtj = jac.transpose() * jac;
    Eigen::VectorXd diag = jtj.diagonal().cwiseMax(1e-12);

    bool accepted = false;
    while (!accepted) {
      Eigen::MatrixXd damped = jtj;
      damped.diagonal() += lambda * diag;
      const Eigen::VectorXd step = damped.ldlt().solve(-gradient);

      if (step.norm() <= opts.param_tol * (x.norm() + opts.param_tol)) {
        return finish(true, "step_size");
      }

      const Eigen::VectorXd x_new = x + step;
      const std::optional<Eigen::VectorXd> r_new = try_residuals(fn, x_new);
      const double cost_new =
          r_new ? r_new->squaredNorm() : std::numeric_limits<double>::infinity();
      if (cost_new < cost) {
        const double decrease = cost - cost_new;
        x = x_new;
        r = *r_new;
        cost = cost_new;
        out.trace.cost_trace.push_back(cost);
        lambda *= 0.5;
        accepted = true;
        if (cost == 0.0) return finish(true, "zero_cost");
        if (decrease < opts.cost_rel_tol * cost) {
          return finish(true, "cost_change");
        }
      } else {
        lambda *= 4.0;
        if (lambda > opts.lambda_max) {
          return finish(false, "diverged");
        }
      }
    }
  }
  return finish(false, "max_iters");
}

// Maps a reduced parameter vector (selected indices) onto the full vector.
ResidualFn masked_fn(const ResidualFn& full_fn, const Eigen::VectorXd& x_full,
                     const std::vector<int>& active) {
  return [full_fn, x_full, active](const Eigen::VectorXd& x_reduced) {
    Eigen::VectorXd x = x_full;
    for (std::size_t i = 0; i < active.size(); ++i) {
      x(active[i]) = x_reduced(static_cast<int>(i));
    }
    return full_fn(x);
  };
}

Eigen::VectorXd gather(const Eigen::VectorXd& x, const std::vector<int>& idx) {
  Eigen::VectorXd out(static_cast<int>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i) out(static_cast<int>(i)) = x(idx[i]);
  return out;
}

void scatter(Eigen::VectorXd& x, const std::vector<int>& idx,
             const Eigen::VectorXd& values) {
  for (std::size_t i = 0; i < idx.size(); ++i) x(idx[i]) = values(static_cast<int>(i));
}

}  // namespace

RmsBreakdown compute_rms(const ParameterBlock& params,
                         const PointPairSet& pairs, const Anchors& anchors,
                         const BoardSpec& spec) {
  OptimizeOptions unit;
  unit.w_lidar = unit.w_corner = unit.w_anchor = 1.0;
  const Eigen::VectorXd r = build_residuals(params, pairs, anchors, spec, unit);

  const int n_boards = static_cast<int>(pairs.boards.size());
  int n_corners = 0;
  for (const BoardPairs& b : pairs.boards) {
    n_corners += static_cast<int>(b.corner_board.size());
  }

  const int circle_len = 8 * n_boards;
  const int corner_len = 2 * n_corners;
  RmsBreakdown rms;
  rms.circle_px = std::sqrt(r.head(circle_len).squaredNorm() / (4.0 * n_boards));
  rms.corner_px =
      std::sqrt(r.segment(circle_len, corner_len).squaredNorm() / n_corners);
  rms.anchor_px = std::sqrt(r.tail(circle_len).squaredNorm() / (4.0 * n_boards));
  return rms;
}

namespace {

OptimizeReport make_report(const ParameterBlock& params,
                           const PointPairSet& pairs, const Anchors& anchors,
                           const BoardSpec& spec, double final_cost,
                           std::vector<StageTrace> stages) {
  OptimizeReport report;
  report.params = params;
  const RmsBreakdown rms = compute_rms(params, pairs, anchors, spec);
  report.corner_rms_px = rms.corner_px;
  report.circle_rms_px = rms.circle_px;
  report.anchor_rms_px = rms.anchor_px;
  report.final_cost = final_cost;
  report.converged = !stages.empty();
  for (const StageTrace& stage : stages) {
    report.converged = report.converged && stage.converged;
  }
  report.reason = stages.empty() ? "" : stages.back().reason;
  report.stages = std::move(stages);
  return report;
}

}  // namespace

OptimizeReport solve(const ParameterBlock& initial, const PointPairSet& pairs,
                     const Anchors& anchors, const BoardSpec& spec,
                     const OptimizeOptions& opts) {
  check_dimensions(pairs, anchors, initial);
  const int n_boards = static_cast<int>(pairs.boards.size());
  const CameraModel camera_template = initial.camera;

  const ResidualFn fn = [&pairs, &anchors, &spec, &opts, n_boards,
                         camera_template](const Eigen::VectorXd& x) {
    return build_residuals(unpack_parameters(x, n_boards, camera_template),
                           pairs, anchors, spec, opts);
  };

  LmOutcome outcome = lm_minimize("joint", fn, pack_parameters(initial), opts);
  std::vector<StageTrace> stages{outcome.trace};
  return make_report(unpack_parameters(outcome.x, n_boards, camera_template),
                     pairs, anchors, spec, outcome.final_cost,
                     std::move(stages));
}

namespace {

std::vector<int> camera_and_board_indices(int n_boards) {
  std::vector<int> idx;
  for (int i = 0; i < kCameraParams; ++i) idx.push_back(i);
  for (int i = kBoardPoseOffset; i < parameter_count(n_boards); ++i) {
    idx.push_back(i);
  }
  return idx;
}

}  // namespace

OptimizeReport refine_corners_only(const ParameterBlock& initial,
                                   const PointPairSet& pairs,
                                   const BoardSpec& spec,
                                   const OptimizeOptions& opts) {
  (void)spec;
  const int n_boards = static_cast<int>(pairs.boards.size());
  const CameraModel camera_template = initial.camera;

  const double w_corner = opts.w_corner;
  const ResidualFn corner_fn = [&pairs, w_corner, n_boards,
                                camera_template](const Eigen::VectorXd& x) {
    const ParameterBlock params =
        unpack_parameters(x, n_boards, camera_template);
    int n_corners = 0;
    for (const BoardPairs& b : pairs.boards) {
      n_corners += static_cast<int>(b.corner_board.size());
    }
    Eigen::VectorXd r(2 * n_corners);
    const double sw = std::sqrt(w_corner);
    int at = 0;
    for (std::size_t b = 0; b < pairs.boards.size(); ++b) {
      const BoardPairs& bp = pairs.boards[b];
      for (std::size_t i = 0; i < bp.corner_board.size(); ++i) {
        const Vec2 proj =
            project(params.camera, params.board_poses[b], bp.corner_board[i]);
        r.segment<2>(at) = sw * (proj - bp.corner_pixel[i]);
        at += 2;
      }
    }
    return r;
  };

  const Eigen::VectorXd x_full = pack_parameters(initial);
  const std::vector<int> active = camera_and_board_indices(n_boards);
  LmOutcome outcome = lm_minimize("corners_only",
                                  masked_fn(corner_fn, x_full, active),
                                  gather(x_full, active), opts);

  Eigen::VectorXd x_final = x_full;
  scatter(x_final, active, outcome.x);

  // Only the corner RMS is meaningful here; the extrinsic was untouched and
  // may not even be usable for projection yet.
  OptimizeReport report;
  report.params = unpack_parameters(x_final, n_boards, camera_template);
  int n_corners = 0;
  for (const BoardPairs& b : pairs.boards) {
    n_corners += static_cast<int>(b.corner_board.size());
  }
  report.corner_rms_px = std::sqrt(corner_fn(x_final).squaredNorm() /
                                   std::max(n_corners, 1) / w_corner);
  report.final_cost = outcome.final_cost;
  report.converged = outcome.trace.converged;
  report.reason = outcome.trace.reason;
  report.stages = {outcome.trace};
  return report;
}

OptimizeReport solve_two_stage(const ParameterBlock& initial,
                               const PointPairSet& pairs,
                               const Anchors& anchors, const BoardSpec& spec,
                               const OptimizeOptions& opts) {
  check_dimensions(pairs, anchors, initial);
  const int n_boards = static_cast<int>(pairs.boards.size());
  const CameraModel camera_template = initial.camera;

  // Stage 1: classical intrinsic calibration; corners only.
  OptimizeReport stage1 = refine_corners_only(initial, pairs, spec, opts);

  // Stage 2: extrinsic only, against the circle pairs (group a), with the
  // stage-1 camera and board poses frozen.
  const ParameterBlock frozen = stage1.params;
  const ResidualFn circle_fn = [&pairs, &opts, n_boards, camera_template,
                                frozen](const Eigen::VectorXd& x) {
    ParameterBlock params = frozen;
    params.t_lidar_camera.angle_axis = x.segment<3>(0);
    params.t_lidar_camera.translation = x.segment<3>(3);
    Eigen::VectorXd r(8 * n_boards);
    const double sw = std::sqrt(opts.w_lidar);
    int at = 0;
    for (const BoardPairs& bp : pairs.boards) {
      for (int k = 0; k < 4; ++k) {
        const Vec2 proj =
            project(params.camera, params.t_lidar_camera, bp.circle_p3d[k]);
        r.segment<2>(at) = sw * (proj - bp.circle_p2d[k]);
        at += 2;
      }
    }
    return r;
  };

  Eigen::VectorXd x0(6);
  x0.segment<3>(0) = initial.t_lidar_camera.angle_axis;
  x0.segment<3>(3) = initial.t_lidar_camera.translation;
  LmOutcome stage2 = lm_minimize("extrinsic_only", circle_fn, x0, opts);

  ParameterBlock final_params = frozen;
  final_params.t_lidar_camera.angle_axis = stage2.x.segment<3>(0);
  final_params.t_lidar_camera.translation = stage2.x.segment<3>(3);

  std::vector<StageTrace> stages;
  stages.insert(stages.end(), stage1.stages.begin(), stage1.stages.end());
  stages.push_back(stage2.trace);
  return make_report(final_params, pairs, anchors, spec, stage2.final_cost,
                     std::move(stages));
}

}  // namespace jointcalib
