#include "sonar/value_map.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>

#include "sonar/kernels.hpp"

namespace sonar {

CellCoord polar_to_cartesian(const AgentPose& pose, double alpha, double d_m, double resolution) {
  const double x = (pose.x + d_m * std::cos(alpha)) / resolution;
  const double y = (pose.y - d_m * std::sin(alpha)) / resolution;
  return {static_cast<int>(std::lround(x)), static_cast<int>(std::lround(y))};
}

PolarCell polar_to_cartesian(const AgentPose& pose, double alpha, double d_m, double resolution, int width,
                             int height) {
  const CellCoord c = polar_to_cartesian(pose, alpha, d_m, resolution);
  return {c, c.x >= 0 && c.y >= 0 && c.x < width && c.y < height};
}

double update_value_cell(double v, double s) {
  if (v < 0.0 || s < 0.0 || std::isnan(v) || std::isnan(s)) throw ValidationError("value update needs v, s >= 0");
  const double denom = v + s;
  if (denom == 0.0) return 0.0;
  return (v * v + s * s) / denom;
}

double weighted_score(double alpha, double heading, double score, double fov_rad, ScoreWeighting w) {
  if (w == ScoreWeighting::Uniform) return score;
  const double off = wrap_to_pi(alpha - heading);
  return score * std::cos(off / (fov_rad / 2.0) * std::numbers::pi / 4.0);
}

void sector_fill(ValueMap& vmap, const AgentPose& pose, double score, const BitLayer& obstacles) {
  if (!(score >= 0.0 && score <= 1.0)) throw ValidationError("semantic score must lie in [0,1]");
  RealLayer& v = vmap.grid;
  if (!obstacles.same_shape(v)) throw ValidationError("obstacle map shape mismatch");
  const ValueMapConfig& cfg = vmap.cfg;
  const double res = v.resolution();
  const double deg = std::numbers::pi / 180.0;
  const double fov = cfg.fov_deg * deg;
  const int rays = std::max(1, static_cast<int>(std::lround(cfg.fov_deg / cfg.angular_step_deg)));
  const double first = pose.heading - fov / 2.0 + cfg.angular_step_deg * deg / 2.0;
  const double step_m = cfg.radial_step_cells * res;

  // Per-cell best weighted score this fill; negative = untouched.
  std::vector<double> touched(v.size(), -1.0);
  for (int r = 0; r < rays; ++r) {
    const double alpha = first + r * cfg.angular_step_deg * deg;
    const double sw = weighted_score(alpha, pose.heading, score, fov, cfg.weighting);
    for (int k = 0;; ++k) {
      const double d = k * step_m;
      if (d > cfg.d_max_m + 1e-9) break;
      const PolarCell pc = polar_to_cartesian(pose, alpha, d, res, v.width(), v.height());
      if (!pc.in_grid || obstacles[pc.cell]) break;
      double& t = touched[v.index(pc.cell)];
      t = std::max(t, sw);
    }
  }
  for (std::size_t i = 0; i < touched.size(); ++i)
    if (touched[i] >= 0.0) v.data()[i] = update_value_cell(v.data()[i], touched[i]);
}

std::array<double, 9> gaussian_kernel3x3(double sigma) {
  std::array<double, 9> k{};
  double sum = 0.0;
  for (int dy = -1; dy <= 1; ++dy)
    for (int dx = -1; dx <= 1; ++dx) sum += k[(dy + 1) * 3 + dx + 1] = std::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma));
  for (double& w : k) w /= sum;
  return k;
}

RealLayer smooth_and_normalize(const ValueMap& vmap) {
  const RealLayer& in = vmap.grid;
  RealLayer out(in.width(), in.height(), 0.0, in.resolution());
  const auto k = gaussian_kernel3x3(vmap.cfg.gaussian_sigma);
  const auto& kern = kernels::active();
  kern.convolve3x3(in.data().data(), out.data().data(), in.width(), in.height(), k.data());
  const auto mm = kern.minmax(out.data().data(), out.size());
  if (!(mm.hi > mm.lo)) {
    out.fill(0.0);
    return out;
  }
  kern.rescale(out.data().data(), out.size(), mm.lo, mm.hi);
  return out;
}

void write_pgm(std::ostream& out, const RealLayer& layer, double lo, double hi) {
  out << "P5\n" << layer.width() << ' ' << layer.height() << "\n255\n";
  const double span = hi > lo ? hi - lo : 1.0;
  for (double v : layer.data()) {
    const double t = std::clamp((v - lo) / span, 0.0, 1.0);
    out.put(static_cast<char>(static_cast<unsigned char>(std::lround(t * 255.0))));
  }
}

}  // namespace sonar
