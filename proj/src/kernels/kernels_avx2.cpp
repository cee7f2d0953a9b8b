// Compiled with -mavx2. Only reached after a CPUID check in dispatch.cpp.

#include <immintrin.h>

#include <algorithm>
#include <cmath>

#include "sonar/kernels.hpp"

namespace sonar::kernels {
namespace {

// Scalar fallback for a single cell; used on the one-cell border ring and row tails.
inline std::uint8_t frontier_cell(const std::uint8_t* e, const std::uint8_t* o, int x, int y, int w, int h) {
  const std::size_t i = static_cast<std::size_t>(y) * w + x;
  if (!e[i] || o[i]) return 0;
  for (int dy = -1; dy <= 1; ++dy) {
    for (int dx = -1; dx <= 1; ++dx) {
      if (dx == 0 && dy == 0) continue;
      const int nx = x + dx;
      const int ny = y + dy;
      if (nx < 0 || ny < 0 || nx >= w || ny >= h || !e[static_cast<std::size_t>(ny) * w + nx]) return 1;
    }
  }
  return 0;
}

void frontier_avx2(const std::uint8_t* e, const std::uint8_t* o, std::uint8_t* out, int w, int h) {
  const __m256i zero = _mm256_setzero_si256();
  const __m256i one = _mm256_set1_epi8(1);
  for (int y = 0; y < h; ++y) {
    const bool interior_row = y > 0 && y < h - 1;
    int x = 0;
    if (interior_row) {
      out[static_cast<std::size_t>(y) * w] = frontier_cell(e, o, 0, y, w, h);
      x = 1;
      const std::uint8_t* up = e + static_cast<std::size_t>(y - 1) * w;
      const std::uint8_t* mid = e + static_cast<std::size_t>(y) * w;
      const std::uint8_t* down = e + static_cast<std::size_t>(y + 1) * w;
      const std::uint8_t* obs = o + static_cast<std::size_t>(y) * w;
      std::uint8_t* dst = out + static_cast<std::size_t>(y) * w;
      for (; x + 32 <= w - 1; x += 32) {
        auto ld = [](const std::uint8_t* p) { return _mm256_loadu_si256(reinterpret_cast<const __m256i*>(p)); };
        __m256i nb = _mm256_min_epu8(ld(up + x - 1), ld(up + x));
        nb = _mm256_min_epu8(nb, ld(up + x + 1));
        nb = _mm256_min_epu8(nb, ld(mid + x - 1));
        nb = _mm256_min_epu8(nb, ld(mid + x + 1));
        nb = _mm256_min_epu8(nb, ld(down + x - 1));
        nb = _mm256_min_epu8(nb, ld(down + x));
        nb = _mm256_min_epu8(nb, ld(down + x + 1));
        const __m256i some_unexplored = _mm256_cmpeq_epi8(nb, zero);
        const __m256i explored = _mm256_andnot_si256(_mm256_cmpeq_epi8(ld(mid + x), zero), _mm256_set1_epi8(-1));
        const __m256i free = _mm256_cmpeq_epi8(ld(obs + x), zero);
        const __m256i mask = _mm256_and_si256(_mm256_and_si256(explored, free), some_unexplored);
        _mm256_storeu_si256(reinterpret_cast<__m256i*>(dst + x), _mm256_and_si256(mask, one));
      }
    }
    for (; x < w; ++x) out[static_cast<std::size_t>(y) * w + x] = frontier_cell(e, o, x, y, w, h);
  }
}

void convolve3x3_avx2(const double* in, double* out, int w, int h, const double* k) {
  __m256d kv[9];
  for (int i = 0; i < 9; ++i) kv[i] = _mm256_set1_pd(k[i]);
  for (int y = 0; y < h; ++y) {
    const double* rows[3] = {in + static_cast<std::size_t>(std::max(y - 1, 0)) * w,
                             in + static_cast<std::size_t>(y) * w,
                             in + static_cast<std::size_t>(std::min(y + 1, h - 1)) * w};
    double* dst = out + static_cast<std::size_t>(y) * w;
    auto cell = [&](int x) {
      const int xl = std::max(x - 1, 0);
      const int xr = std::min(x + 1, w - 1);
      double acc = 0.0;
      for (int r = 0; r < 3; ++r) {
        acc += k[3 * r + 0] * rows[r][xl];
        acc += k[3 * r + 1] * rows[r][x];
        acc += k[3 * r + 2] * rows[r][xr];
      }
      dst[x] = acc;
    };
    cell(0);
    int x = 1;
    for (; x + 4 <= w - 1; x += 4) {
      __m256d acc = _mm256_setzero_pd();
      for (int r = 0; r < 3; ++r) {
        acc = _mm256_add_pd(acc, _mm256_mul_pd(kv[3 * r + 0], _mm256_loadu_pd(rows[r] + x - 1)));
        acc = _mm256_add_pd(acc, _mm256_mul_pd(kv[3 * r + 1], _mm256_loadu_pd(rows[r] + x)));
        acc = _mm256_add_pd(acc, _mm256_mul_pd(kv[3 * r + 2], _mm256_loadu_pd(rows[r] + x + 1)));
      }
      _mm256_storeu_pd(dst + x, acc);
    }
    for (; x < w; ++x) cell(x);
  }
}

MinMax minmax_avx2(const double* v, std::size_t n) {
  std::size_t i = 0;
  MinMax mm{v[0], v[0]};
  if (n >= 4) {
    __m256d lo = _mm256_loadu_pd(v);
    __m256d hi = lo;
    for (i = 4; i + 4 <= n; i += 4) {
      const __m256d x = _mm256_loadu_pd(v + i);
      lo = _mm256_min_pd(lo, x);
      hi = _mm256_max_pd(hi, x);
    }
    alignas(32) double l[4];
    alignas(32) double u[4];
    _mm256_store_pd(l, lo);
    _mm256_store_pd(u, hi);
    mm = {std::min(std::min(l[0], l[1]), std::min(l[2], l[3])), std::max(std::max(u[0], u[1]), std::max(u[2], u[3]))};
  }
  for (; i < n; ++i) {
    mm.lo = std::min(mm.lo, v[i]);
    mm.hi = std::max(mm.hi, v[i]);
  }
  return mm;
}

void rescale_avx2(double* v, std::size_t n, double lo, double hi) {
  const double span = hi - lo;
  const __m256d lov = _mm256_set1_pd(lo);
  const __m256d spv = _mm256_set1_pd(span);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(v + i, _mm256_div_pd(_mm256_sub_pd(_mm256_loadu_pd(v + i), lov), spv));
  for (; i < n; ++i) v[i] = (v[i] - lo) / span;
}

void distance_map_avx2(const double* px, const double* py, std::size_t np, double* out, int w, int h) {
  for (int y = 0; y < h; ++y) {
    double* dst = out + static_cast<std::size_t>(y) * w;
    const double yd = static_cast<double>(y);
    int x = 0;
    for (; x + 4 <= w; x += 4) {
      const __m256d xs = _mm256_set_pd(x + 3.0, x + 2.0, x + 1.0, x + 0.0);
      __m256d best = _mm256_set1_pd(INFINITY);
      for (std::size_t t = 0; t < np; ++t) {
        const __m256d dx = _mm256_sub_pd(xs, _mm256_set1_pd(px[t]));
        const double dys = yd - py[t];
        const __m256d dy = _mm256_set1_pd(dys);
        const __m256d d = _mm256_sqrt_pd(_mm256_add_pd(_mm256_mul_pd(dx, dx), _mm256_mul_pd(dy, dy)));
        best = _mm256_min_pd(d, best);
      }
      _mm256_storeu_pd(dst + x, best);
    }
    for (; x < w; ++x) {
      double best = INFINITY;
      for (std::size_t t = 0; t < np; ++t) {
        const double dx = static_cast<double>(x) - px[t];
        const double dy = yd - py[t];
        best = std::min(best, std::sqrt(dx * dx + dy * dy));
      }
      dst[x] = best;
    }
  }
}

void dar_scores_avx2(const double* dist, const double* value, double* out, std::size_t n, double w_pred,
                     double w_vlm, double diag, double eps) {
  const __m256d wp = _mm256_set1_pd(w_pred);
  const __m256d wv = _mm256_set1_pd(w_vlm);
  const __m256d dg = _mm256_set1_pd(diag);
  const __m256d ep = _mm256_set1_pd(eps);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d near = _mm256_div_pd(wp, _mm256_add_pd(_mm256_div_pd(_mm256_loadu_pd(dist + i), dg), ep));
    _mm256_storeu_pd(out + i, _mm256_add_pd(near, _mm256_mul_pd(wv, _mm256_loadu_pd(value + i))));
  }
  for (; i < n; ++i) out[i] = w_pred / (dist[i] / diag + eps) + w_vlm * value[i];
}

}  // namespace

const KernelTable& avx2_kernels() {
  static const KernelTable table{Isa::Avx2,  "avx2",       frontier_avx2,     convolve3x3_avx2,
                                 minmax_avx2, rescale_avx2, distance_map_avx2, dar_scores_avx2};
  return table;
}

}  // namespace sonar::kernels
