#pragma once

#include <cstdint>
#include <random>

namespace sonar {

/// SplitMix64 finaliser; used to derive independent per-step / per-purpose seeds.
constexpr std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

using Rng = std::mt19937_64;

inline double uniform01(Rng& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

/// Normal(mean, sd) truncated to [0,1] by rejection; clamps after 64 rejected draws.
inline double truncated_normal01(Rng& rng, double mean, double sd) {
  if (sd <= 0.0) return mean < 0.0 ? 0.0 : (mean > 1.0 ? 1.0 : mean);
  std::normal_distribution<double> dist(mean, sd);
  for (int i = 0; i < 64; ++i) {
    const double v = dist(rng);
    if (v >= 0.0 && v <= 1.0) return v;
  }
  return mean < 0.0 ? 0.0 : (mean > 1.0 ? 1.0 : mean);
}

}  // namespace sonar
