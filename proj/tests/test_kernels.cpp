// Scalar vs AVX2 equivalence. Outputs must match bit for bit, including ragged tails.

#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <random>
#include <vector>

#include "sonar/kernels.hpp"

using namespace sonar::kernels;

namespace {

const KernelTable* simd() {
  const KernelTable* t = avx2_table();
  if (!t) return nullptr;
  return t;
}

template <typename T>
bool bit_equal(const std::vector<T>& a, const std::vector<T>& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(T)) == 0;
}

std::vector<double> uniform(std::mt19937_64& rng, std::size_t n, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

}  // namespace

TEST(Dispatch, ScalarAlwaysAvailable) {
  EXPECT_EQ(scalar_table().isa, Isa::Scalar);
  EXPECT_TRUE(force(Isa::Scalar));
  EXPECT_EQ(active().isa, Isa::Scalar);
  if (simd()) {
    EXPECT_TRUE(force(Isa::Avx2));
    EXPECT_EQ(active().isa, Isa::Avx2);
  } else {
    EXPECT_FALSE(force(Isa::Avx2));
  }
}

TEST(KernelEquivalence, Frontier) {
  if (!simd()) GTEST_SKIP() << "AVX2 variant unavailable";
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const int w = 1 + static_cast<int>(rng() % 70), h = 1 + static_cast<int>(rng() % 40);
    std::vector<std::uint8_t> e(w * h), o(w * h), a(w * h), b(w * h);
    for (auto& v : e) v = rng() % 3 != 0;
    for (auto& v : o) v = rng() % 5 == 0;
    scalar_table().frontier(e.data(), o.data(), a.data(), w, h);
    simd()->frontier(e.data(), o.data(), b.data(), w, h);
    ASSERT_EQ(a, b) << w << "x" << h;
  }
}

TEST(KernelEquivalence, Convolve) {
  if (!simd()) GTEST_SKIP() << "AVX2 variant unavailable";
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 100; ++trial) {
    const int w = 1 + static_cast<int>(rng() % 50), h = 1 + static_cast<int>(rng() % 30);
    const auto in = uniform(rng, static_cast<std::size_t>(w) * h, 0.0, 3.0);
    const auto k = uniform(rng, 9, 0.0, 1.0);
    std::vector<double> a(in.size()), b(in.size());
    scalar_table().convolve3x3(in.data(), a.data(), w, h, k.data());
    simd()->convolve3x3(in.data(), b.data(), w, h, k.data());
    ASSERT_TRUE(bit_equal(a, b)) << w << "x" << h;
  }
}

TEST(KernelEquivalence, MinMaxAndRescale) {
  if (!simd()) GTEST_SKIP() << "AVX2 variant unavailable";
  std::mt19937_64 rng(13);
  for (std::size_t n = 1; n < 80; ++n) {
    auto v = uniform(rng, n, -5.0, 5.0);
    const MinMax ms = scalar_table().minmax(v.data(), n), mv = simd()->minmax(v.data(), n);
    ASSERT_EQ(ms.lo, mv.lo);
    ASSERT_EQ(ms.hi, mv.hi);
    if (ms.hi > ms.lo) {
      auto a = v, b = v;
      scalar_table().rescale(a.data(), n, ms.lo, ms.hi);
      simd()->rescale(b.data(), n, ms.lo, ms.hi);
      ASSERT_TRUE(bit_equal(a, b)) << n;
    }
  }
}

TEST(KernelEquivalence, DistanceMap) {
  if (!simd()) GTEST_SKIP() << "AVX2 variant unavailable";
  std::mt19937_64 rng(14);
  for (int trial = 0; trial < 100; ++trial) {
    const int w = 1 + static_cast<int>(rng() % 40), h = 1 + static_cast<int>(rng() % 40);
    const std::size_t np = 1 + rng() % 4;
    std::vector<double> px(np), py(np);
    for (std::size_t i = 0; i < np; ++i) {
      px[i] = static_cast<double>(rng() % w);
      py[i] = static_cast<double>(rng() % h);
    }
    std::vector<double> a(static_cast<std::size_t>(w) * h), b(a.size());
    scalar_table().distance_map(px.data(), py.data(), np, a.data(), w, h);
    simd()->distance_map(px.data(), py.data(), np, b.data(), w, h);
    ASSERT_TRUE(bit_equal(a, b));
  }
}

TEST(KernelEquivalence, DarScores) {
  if (!simd()) GTEST_SKIP() << "AVX2 variant unavailable";
  std::mt19937_64 rng(15);
  for (std::size_t n = 1; n < 100; ++n) {
    const auto d = uniform(rng, n, 0.0, 60.0);
    const auto v = uniform(rng, n, 0.0, 1.0);
    const double wp = uniform(rng, 1, 0.0, 1.0)[0];
    std::vector<double> a(n), b(n);
    scalar_table().dar_scores(d.data(), v.data(), a.data(), n, wp, 1.0 - wp, 56.5685, 1e-6);
    simd()->dar_scores(d.data(), v.data(), b.data(), n, wp, 1.0 - wp, 56.5685, 1e-6);
    ASSERT_TRUE(bit_equal(a, b)) << n;
  }
}

TEST(ScalarKernels, MatchDefinitions) {
  // 3x3 with replicated border: an identity kernel copies the input.
  const std::vector<double> in{1, 2, 3, 4, 5, 6};
  const double ident[9] = {0, 0, 0, 0, 1, 0, 0, 0, 0};
  std::vector<double> out(6);
  scalar_table().convolve3x3(in.data(), out.data(), 3, 2, ident);
  EXPECT_EQ(out, in);
  // A left-shift kernel reads the replicated column at the border.
  const double left[9] = {0, 0, 0, 1, 0, 0, 0, 0, 0};
  scalar_table().convolve3x3(in.data(), out.data(), 3, 2, left);
  EXPECT_EQ(out, (std::vector<double>{1, 1, 2, 4, 4, 5}));

  const double px[1] = {0}, py[1] = {0};
  std::vector<double> d(5 * 5);
  scalar_table().distance_map(px, py, 1, d.data(), 5, 5);
  EXPECT_EQ(d[4 * 5 + 3], 5.0);
}
