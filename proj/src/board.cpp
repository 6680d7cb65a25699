#include "jointcalib/board.hpp"

#include <algorithm>
#include <cmath>

namespace jointcalib {

void validate(const BoardSpec& spec) {
  if (spec.checker_rows < 2 || spec.checker_cols < 2) {
    fail(ErrorCode::InvalidSpec, "need at least 2x2 interior corners");
  }
  if (spec.square_size <= 0.0 || spec.board_width <= 0.0 ||
      spec.board_height <= 0.0 || spec.hole_radius <= 0.0) {
    fail(ErrorCode::InvalidSpec, "dimensions must be positive");
  }

  // The checkerboard occupies (cols+1) x (rows+1) squares centered on the
  // board origin.
  const double checker_hw = 0.5 * (spec.checker_cols + 1) * spec.square_size;
  const double checker_hh = 0.5 * (spec.checker_rows + 1) * spec.square_size;
  if (checker_hw > 0.5 * spec.board_width || checker_hh > 0.5 * spec.board_height) {
    fail(ErrorCode::InvalidSpec, "checkerboard exceeds board outline");
  }

  for (const Vec2& c : spec.hole_centers) {
    if (std::abs(c.x()) + spec.hole_radius > 0.5 * spec.board_width + 1e-12 ||
        std::abs(c.y()) + spec.hole_radius > 0.5 * spec.board_height + 1e-12) {
      fail(ErrorCode::InvalidSpec, "hole extends past the board outline");
    }
    const double dx = std::max(std::abs(c.x()) - checker_hw, 0.0);
    const double dy = std::max(std::abs(c.y()) - checker_hh, 0.0);
    if (std::hypot(dx, dy) < spec.hole_radius - 1e-12) {
      fail(ErrorCode::InvalidSpec, "hole overlaps the checkerboard region");
    }
  }
}

std::array<Vec2, 4> canonical_hole_order(const std::array<Vec2, 4>& centers) {
  std::array<Vec2, 4> sorted = centers;
  // Top row first (larger y), left before right within each row.
  std::sort(sorted.begin(), sorted.end(), [](const Vec2& a, const Vec2& b) {
    return a.y() > b.y();
  });
  if (sorted[0].x() > sorted[1].x()) std::swap(sorted[0], sorted[1]);
  if (sorted[2].x() > sorted[3].x()) std::swap(sorted[2], sorted[3]);
  return sorted;
}

BoardSpec make_board_spec(int checker_rows, int checker_cols,
                          double square_size,
                          const std::array<Vec2, 4>& hole_centers,
                          double hole_radius, double board_width,
                          double board_height) {
  BoardSpec spec;
  spec.checker_rows = checker_rows;
  spec.checker_cols = checker_cols;
  spec.square_size = square_size;
  spec.hole_centers = canonical_hole_order(hole_centers);
  spec.hole_radius = hole_radius;
  spec.board_width = board_width;
  spec.board_height = board_height;
  validate(spec);
  return spec;
}

std::vector<Vec3> corner_points(const BoardSpec& spec) {
  std::vector<Vec3> corners;
  corners.reserve(static_cast<std::size_t>(spec.checker_rows) *
                  static_cast<std::size_t>(spec.checker_cols));
  const double x0 = -0.5 * (spec.checker_cols - 1) * spec.square_size;
  const double y0 = -0.5 * (spec.checker_rows - 1) * spec.square_size;
  for (int row = 0; row < spec.checker_rows; ++row) {
    for (int col = 0; col < spec.checker_cols; ++col) {
      corners.emplace_back(x0 + col * spec.square_size,
                           y0 + row * spec.square_size, 0.0);
    }
  }
  return corners;
}

std::array<Vec3, 4> circle_centers(const BoardSpec& spec) {
  const auto ordered = canonical_hole_order(spec.hole_centers);
  std::array<Vec3, 4> out;
  for (int i = 0; i < 4; ++i) out[i] = Vec3(ordered[i].x(), ordered[i].y(), 0.0);
  return out;
}

std::vector<Vec2> board_grid_points(double width, double height, double pitch) {
  const int nx = static_cast<int>(std::ceil(width / pitch));
  const int ny = static_cast<int>(std::ceil(height / pitch));
  // Center the grid so the pattern is symmetric about the origin.
  const double x0 = -0.5 * (nx - 1) * pitch;
  const double y0 = -0.5 * (ny - 1) * pitch;
  std::vector<Vec2> points;
  points.reserve(static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny));
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      points.emplace_back(x0 + i * pitch, y0 + j * pitch);
    }
  }
  return points;
}

MaskCloud make_mask(const BoardSpec& spec, double sample_pitch) {
  if (!(sample_pitch > 0.0) || !(sample_pitch < spec.hole_radius)) {
    fail(ErrorCode::InvalidPitch,
         "sample pitch must satisfy 0 < pitch < hole_radius");
  }
  MaskCloud mask;
  mask.sample_pitch = sample_pitch;
  mask.hole_centers = canonical_hole_order(spec.hole_centers);
  mask.hole_radius = spec.hole_radius;
  for (const Vec2& p :
       board_grid_points(spec.board_width, spec.board_height, sample_pitch)) {
    bool in_hole = false;
    for (const Vec2& c : mask.hole_centers) {
      if ((p - c).norm() <= spec.hole_radius) {
        in_hole = true;
        break;
      }
    }
    if (!in_hole) mask.points.emplace_back(p.x(), p.y(), 0.0);
  }
  return mask;
}

}  // namespace jointcalib
