#include <algorithm>
#include <cmath>

#include "sonar/kernels.hpp"

namespace sonar::kernels {
namespace {

void frontier_scalar(const std::uint8_t* explored, const std::uint8_t* obstacle, std::uint8_t* out, int width,
                     int height) {
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * width + x;
      if (!explored[i] || obstacle[i]) {
        out[i] = 0;
        continue;
      }
      std::uint8_t open = 0;
      for (int dy = -1; dy <= 1 && !open; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          if (dx == 0 && dy == 0) continue;
          const int nx = x + dx;
          const int ny = y + dy;
          if (nx < 0 || ny < 0 || nx >= width || ny >= height ||
              !explored[static_cast<std::size_t>(ny) * width + nx]) {
            open = 1;
            break;
          }
        }
      }
      out[i] = open;
    }
  }
}

void convolve3x3_scalar(const double* in, double* out, int width, int height, const double* k) {
  for (int y = 0; y < height; ++y) {
    const double* rows[3] = {in + static_cast<std::size_t>(std::max(y - 1, 0)) * width,
                             in + static_cast<std::size_t>(y) * width,
                             in + static_cast<std::size_t>(std::min(y + 1, height - 1)) * width};
    for (int x = 0; x < width; ++x) {
      const int xl = std::max(x - 1, 0);
      const int xr = std::min(x + 1, width - 1);
      double acc = 0.0;
      for (int r = 0; r < 3; ++r) {
        acc += k[3 * r + 0] * rows[r][xl];
        acc += k[3 * r + 1] * rows[r][x];
        acc += k[3 * r + 2] * rows[r][xr];
      }
      out[static_cast<std::size_t>(y) * width + x] = acc;
    }
  }
}

MinMax minmax_scalar(const double* v, std::size_t n) {
  MinMax mm{v[0], v[0]};
  for (std::size_t i = 1; i < n; ++i) {
    mm.lo = std::min(mm.lo, v[i]);
    mm.hi = std::max(mm.hi, v[i]);
  }
  return mm;
}

void rescale_scalar(double* v, std::size_t n, double lo, double hi) {
  const double span = hi - lo;
  for (std::size_t i = 0; i < n; ++i) v[i] = (v[i] - lo) / span;
}

void distance_map_scalar(const double* px, const double* py, std::size_t np, double* out, int width, int height) {
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      double best = INFINITY;
      for (std::size_t t = 0; t < np; ++t) {
        const double dx = static_cast<double>(x) - px[t];
        const double dy = static_cast<double>(y) - py[t];
        best = std::min(best, std::sqrt(dx * dx + dy * dy));
      }
      out[static_cast<std::size_t>(y) * width + x] = best;
    }
  }
}

void dar_scores_scalar(const double* dist, const double* value, double* out, std::size_t n, double w_pred,
                       double w_vlm, double diag, double eps) {
  for (std::size_t i = 0; i < n; ++i) out[i] = w_pred / (dist[i] / diag + eps) + w_vlm * value[i];
}

}  // namespace

const KernelTable& scalar_table() {
  static const KernelTable table{Isa::Scalar,         "scalar",         frontier_scalar,   convolve3x3_scalar,
                                 minmax_scalar,       rescale_scalar,   distance_map_scalar, dar_scores_scalar};
  return table;
}

}  // namespace sonar::kernels
