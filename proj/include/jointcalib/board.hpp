#pragma once

#include <array>
#include <vector>

#include "jointcalib/geometry.hpp"

namespace jointcalib {

// Parametric calibration target: interior checkerboard surrounded by four
// circular holes. Board frame: origin at the board center, x right, y up,
// z out of the front face; units are meters.
struct BoardSpec {
  int checker_rows = 6;   // interior corner rows
  int checker_cols = 8;   // interior corner columns
  double square_size = 0.075;
  std::array<Vec2, 4> hole_centers{Vec2(-0.45, 0.30), Vec2(0.45, 0.30),
                                   Vec2(-0.45, -0.30), Vec2(0.45, -0.30)};
  double hole_radius = 0.11;
  double board_width = 1.2;
  double board_height = 0.9;
};

// Throws InvalidSpec when holes leave the outline, intersect the
// checkerboard region, or any dimension is non-positive.
void validate(const BoardSpec& spec);

// Canonical hole order: top-left, top-right, bottom-left, bottom-right.
std::array<Vec2, 4> canonical_hole_order(const std::array<Vec2, 4>& centers);

BoardSpec make_board_spec(int checker_rows, int checker_cols,
                          double square_size,
                          const std::array<Vec2, 4>& hole_centers,
                          double hole_radius, double board_width,
                          double board_height);

// Interior corners, row-major from the bottom-left, z = 0, centered on the
// board origin.
std::vector<Vec3> corner_points(const BoardSpec& spec);

// Hole centers lifted to 3D (z = 0), canonical order.
std::array<Vec3, 4> circle_centers(const BoardSpec& spec);

// Planar point set with the board's hole pattern cut out; used as the
// matching template for LiDAR target alignment.
struct MaskCloud {
  std::vector<Vec3> points;  // z = 0, board frame
  double sample_pitch = 0.0;
  std::array<Vec2, 4> hole_centers{};
  double hole_radius = 0.0;
};

// Centered rectangular grid of pitch-spaced points covering width x height;
// ceil(w/pitch) * ceil(h/pitch) points.
std::vector<Vec2> board_grid_points(double width, double height, double pitch);

// Throws InvalidPitch unless 0 < sample_pitch < hole_radius.
MaskCloud make_mask(const BoardSpec& spec, double sample_pitch);

}  // namespace jointcalib
