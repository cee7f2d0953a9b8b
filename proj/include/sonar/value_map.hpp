#pragma once

#include <array>
#include <iosfwd>

#include "sonar/grid.hpp"
#include "sonar/sim_world.hpp"

namespace sonar {

enum class ScoreWeighting { Cosine, Uniform };

struct ValueMapConfig {
  double d_max_m = 5.0;
  double fov_deg = 79.0;
  double angular_step_deg = 1.0;
  double radial_step_cells = 0.5;
  double gaussian_sigma = 0.85;
  ScoreWeighting weighting = ScoreWeighting::Cosine;
};

/// Raw semantic value layer V (non-negative). Smoothing happens on read.
struct ValueMap {
  RealLayer grid;
  ValueMapConfig cfg;

  ValueMap() = default;
  ValueMap(int width, int height, double resolution, ValueMapConfig cfg = {})
      : grid(width, height, 0.0, resolution), cfg(cfg) {}
};

/// Ray sample -> cell, with the y axis pointing down the rows. Returns false when the cell leaves the grid.
struct PolarCell {
  CellCoord cell;
  bool in_grid;
};
PolarCell polar_to_cartesian(const AgentPose& pose, double alpha, double d_m, double resolution, int width,
                             int height);
/// Unbounded variant (no grid check).
CellCoord polar_to_cartesian(const AgentPose& pose, double alpha, double d_m, double resolution);

/// Contraharmonic update (v^2 + s^2) / (v + s), with update(0, 0) = 0.
double update_value_cell(double v, double s);

/// Score weight for a ray at angle alpha; 1 on the optical axis, cos(pi/4) at the FOV edge.
double weighted_score(double alpha, double heading, double score, double fov_rad, ScoreWeighting w);

/// Fans rays across the FOV and applies update_value_cell once per touched cell (using the largest weighted
/// score among the rays reaching it). Rays end at the first obstacle cell (exclusive) or at the grid edge.
void sector_fill(ValueMap& vmap, const AgentPose& pose, double score, const BitLayer& obstacles);

/// Normalised 3x3 Gaussian weights, row-major.
std::array<double, 9> gaussian_kernel3x3(double sigma);

/// 3x3 Gaussian (replicated border) followed by min-max normalisation; a constant map yields all zeros.
RealLayer smooth_and_normalize(const ValueMap& vmap);

/// Binary PGM (P5) export with an 8-bit linear ramp from `lo` to `hi`.
void write_pgm(std::ostream& out, const RealLayer& layer, double lo, double hi);

}  // namespace sonar
