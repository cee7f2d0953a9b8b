#pragma once

// Data-parallel inner loops of the map stack. Each kernel has a scalar
// reference implementation and, on x86-64, an AVX2 variant. The variant is
// picked once at startup from CPUID (override with SONAR_ISA=scalar|avx2).
// All variants evaluate the same floating-point expressions in the same order,
// so their outputs are bit-identical.

#include <cstddef>
#include <cstdint>

namespace sonar::kernels {

enum class Isa { Scalar, Avx2 };

struct MinMax {
  double lo;
  double hi;
};

struct KernelTable {
  Isa isa;
  const char* name;

  /// F = E & !O & (any 8-neighbour has E == 0); out-of-grid neighbours count as unexplored.
  void (*frontier)(const std::uint8_t* explored, const std::uint8_t* obstacle, std::uint8_t* out, int width,
                   int height);

  /// 3x3 convolution with replicated border. `kernel` is row-major, 9 weights.
  void (*convolve3x3)(const double* in, double* out, int width, int height, const double* kernel);

  MinMax (*minmax)(const double* values, std::size_t n);

  /// In-place (v - lo) / (hi - lo). Caller guarantees hi > lo.
  void (*rescale)(double* values, std::size_t n, double lo, double hi);

  /// out(x,y) = min_i sqrt((x - px_i)^2 + (y - py_i)^2).
  void (*distance_map)(const double* px, const double* py, std::size_t npoints, double* out, int width, int height);

  /// out_i = w_pred / (dist_i / diag + eps) + w_vlm * value_i.
  void (*dar_scores)(const double* dist, const double* value, double* out, std::size_t n, double w_pred,
                     double w_vlm, double diag, double eps);
};

const KernelTable& scalar_table();

/// nullptr when the AVX2 variant was not compiled in or the CPU lacks AVX2.
const KernelTable* avx2_table();

/// Table used by the library. Selected on first use.
const KernelTable& active();

/// Test hook: pin the dispatch to a specific variant. Returns false if unavailable.
bool force(Isa isa);

}  // namespace sonar::kernels
