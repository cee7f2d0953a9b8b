#include <gtest/gtest.h>

#include <random>
#include <sstream>
#include <vector>

#include "sonar/layered_map.hpp"
#include "test_util.hpp"

using namespace sonar;

TEST(TargetConfidence, WorkedValues) {
  EXPECT_DOUBLE_EQ(update_target_confidence(0.5, 0.9), 0.9);
  EXPECT_DOUBLE_EQ(update_target_confidence(0.5, 0.3), 0.4);
  EXPECT_EQ(update_target_confidence(0.0, 0.0), 0.0);
  EXPECT_THROW(update_target_confidence(0.5, 1.2), ValidationError);
  EXPECT_THROW(update_target_confidence(-0.1, 0.5), ValidationError);
}

TEST(TargetConfidence, ExhaustiveTable) {
  for (int i = 0; i <= 20; ++i)
    for (int j = 0; j <= 20; ++j) {
      const double old = i / 20.0, c = j / 20.0;
      const double got = update_target_confidence(old, c);
      const double want = j >= i ? c : (old + c) / 2.0;
      ASSERT_EQ(got, want) << old << ' ' << c;
      ASSERT_GE(got, std::min(old, c));
      ASSERT_LE(got, std::max(old, c));
    }
}

TEST(MultiMaps, WorkedValues) {
  EXPECT_EQ(update_multi_maps(2, 0.5, 1, 0.8, 3), (LabelledConfidence{1, 0.8}));
  const auto avg = update_multi_maps(1, 0.8, 1, 0.4, 3);
  EXPECT_EQ(avg.label, 1);
  EXPECT_NEAR(avg.confidence, 0.6, 1e-15);
  EXPECT_EQ(update_multi_maps(2, 0.8, 1, 0.4, 3), (LabelledConfidence{2, 0.8}));
  // Equal confidence counts as "lower or equal".
  EXPECT_EQ(update_multi_maps(2, 0.5, 1, 0.5, 3), (LabelledConfidence{2, 0.5}));
  EXPECT_THROW(update_multi_maps(0, 0.0, 0, 0.5, 3), ValidationError);
  EXPECT_THROW(update_multi_maps(0, 0.0, 4, 0.5, 3), ValidationError);
}

TEST(MultiMaps, ExhaustiveTable) {
  constexpr ClassId n = 3;
  for (ClassId smap = 0; smap <= n; ++smap)
    for (ClassId l = 1; l <= n; ++l)
      for (int i = 0; i <= 10; ++i)
        for (int j = 0; j <= 10; ++j) {
          const double cmap = smap == 0 ? 0.0 : i / 10.0, c = j / 10.0;
          const auto got = update_multi_maps(smap, cmap, l, c, n);
          LabelledConfidence want{smap, cmap};
          if (j > (smap == 0 ? 0 : i)) want = {l, c};
          else if (smap == l) want = {smap, (cmap + c) / 2.0};
          ASSERT_EQ(got, want) << smap << ' ' << cmap << ' ' << l << ' ' << c;
          // Labels only move on a strictly higher confidence.
          if (got.label != smap) {
            ASSERT_GT(c, cmap);
          }
        }
}

TEST(MapUpdates, ObstaclesAndExplored) {
  auto m = LayeredMap::create(4, 4, 2);
  const auto before = m;
  mark_obstacles(m, {});
  mark_explored(m, {});
  EXPECT_EQ(m, before);

  const std::vector<CellCoord> one{{1, 1}};
  mark_obstacles(m, one);
  int count = 0;
  for (auto v : m.obstacle.data()) count += v;
  EXPECT_EQ(count, 1);
  EXPECT_EQ(m.obstacle(1, 1), 1);
  const auto once = m;
  mark_obstacles(m, one);
  EXPECT_EQ(m, once);

  const std::vector<CellCoord> corner{{0, 0}};
  mark_explored(m, corner);
  count = 0;
  for (auto v : m.explored.data()) count += v;
  EXPECT_EQ(count, 1);

  const std::vector<CellCoord> outside{{4, 0}};
  EXPECT_THROW(mark_explored(m, outside), ValidationError);
}

TEST(Frontier, SmallCases) {
  auto m = LayeredMap::create(3, 3, 1);
  refresh_frontiers(m);
  for (auto v : m.frontier.data()) EXPECT_EQ(v, 0);

  m.explored(1, 1) = 1;
  const auto f = extract_frontiers(m);
  EXPECT_EQ(f(1, 1), 1);
  int count = 0;
  for (auto v : f.data()) count += v;
  EXPECT_EQ(count, 1);

  // A fully explored grid still has frontiers along its border, since off-grid cells count as unexplored.
  m.explored.fill(1);
  const auto g = extract_frontiers(m);
  EXPECT_EQ(g(1, 1), 0);
  EXPECT_EQ(g(0, 0), 1);
}

TEST(Frontier, MatchesBruteForce) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 300; ++trial) {
    auto m = LayeredMap::create(16, 16, 1);
    m.explored = test::random_bits(rng, 16, 16, 0.6);
    m.obstacle = test::random_bits(rng, 16, 16, 0.2);
    ASSERT_EQ(extract_frontiers(m), test::brute_frontier(m));
  }
}

TEST(Detections, SingleTargetDetection) {
  auto m = LayeredMap::create(4, 4, 3);
  const auto before = m;
  apply_detections(m, {}, 2);
  EXPECT_EQ(m, before);

  const std::vector<Detection> d{{2, {1, 2}, 0.9}};
  apply_detections(m, d, 2);
  EXPECT_EQ(m.smap_target(1, 2), 1);
  EXPECT_EQ(m.cmap_target(1, 2), 0.9);
  EXPECT_EQ(m.smap_multi(1, 2), 2);
  EXPECT_EQ(m.cmap_multi(1, 2), 0.9);
}

TEST(Detections, SameCellAppliedInOrder) {
  auto m = LayeredMap::create(2, 2, 3);
  const std::vector<Detection> d{{1, {0, 0}, 0.5}, {3, {0, 0}, 0.7}, {1, {0, 0}, 0.6}};
  apply_detections(m, d, 2);
  // 0.5 labels the cell 1, 0.7 relabels it 3, 0.6 (class 1, lower) is ignored.
  EXPECT_EQ(m.smap_multi(0, 0), 3);
  EXPECT_EQ(m.cmap_multi(0, 0), 0.7);
  EXPECT_EQ(m.smap_target(0, 0), 0);
}

TEST(Detections, ZeroConfidenceLeavesNoLabel) {
  auto m = LayeredMap::create(2, 2, 2);
  const std::vector<Detection> d{{1, {0, 0}, 0.0}};
  apply_detections(m, d, 1);
  EXPECT_EQ(m.smap_target(0, 0), 0);
  EXPECT_EQ(m.smap_multi(0, 0), kNoClass);
}

TEST(Detections, InvariantsOverRandomSequences) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> conf(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    auto m = LayeredMap::create(8, 8, 4);
    BitLayer prev_explored = m.explored;
    for (int step = 0; step < 30; ++step) {
      std::vector<CellCoord> vis;
      for (int k = 0; k < 6; ++k) vis.push_back({static_cast<int>(rng() % 8), static_cast<int>(rng() % 8)});
      mark_explored(m, vis);
      for (std::size_t i = 0; i < m.explored.size(); ++i) ASSERT_GE(m.explored.data()[i], prev_explored.data()[i]);
      prev_explored = m.explored;

      std::vector<Detection> dets;
      for (int k = 0; k < 4; ++k)
        dets.push_back({static_cast<ClassId>(1 + rng() % 4), vis[k], k == 3 ? 0.0 : conf(rng)});
      for (const Detection& d : dets) {
        const auto before = m;
        apply_detections(m, std::span(&d, 1), 2);
        for (std::size_t i = 0; i < m.smap_multi.size(); ++i) {
          if (m.smap_multi.data()[i] != kNoClass) {
            ASSERT_GT(m.cmap_multi.data()[i], 0.0);
          }
          if (m.smap_target.data()[i]) {
            ASSERT_GT(m.cmap_target.data()[i], 0.0);
          }
          if (m.smap_multi.data()[i] != before.smap_multi.data()[i]) {
            ASSERT_GT(m.cmap_multi.data()[i], before.cmap_multi.data()[i]);
          }
        }
      }
    }
  }
}

TEST(Snapshot, RoundTrip) {
  std::mt19937_64 rng(9);
  auto m = LayeredMap::create(7, 5, 4, 0.1);
  for (std::size_t i = 0; i < m.obstacle.size(); ++i) {
    m.obstacle.data()[i] = rng() % 2;
    m.explored.data()[i] = rng() % 2;
    m.smap_multi.data()[i] = static_cast<ClassId>(rng() % 5);
    m.cmap_multi.data()[i] = std::uniform_real_distribution<double>(0, 1)(rng);
  }
  refresh_frontiers(m);
  RealLayer value(7, 5, 0.0, 0.1), dist(7, 5, 0.0, 0.1);
  for (auto& v : value.data()) v = std::uniform_real_distribution<double>(0, 1)(rng);
  for (auto& v : dist.data()) v = std::uniform_real_distribution<double>(0, 9)(rng);

  std::stringstream ss;
  write_snapshot(ss, m, &value, &dist);
  const auto snap = read_snapshot(ss);
  EXPECT_EQ(snap.map, m);
  ASSERT_TRUE(snap.value && snap.distance);
  EXPECT_EQ(*snap.value, value);
  EXPECT_EQ(*snap.distance, dist);

  std::stringstream bare;
  write_snapshot(bare, m);
  const auto s2 = read_snapshot(bare);
  EXPECT_FALSE(s2.value.has_value());
  EXPECT_EQ(s2.map, m);
}

TEST(Snapshot, RejectsMalformed) {
  std::istringstream bad_magic("NOTAMAP 1\n");
  EXPECT_THROW(read_snapshot(bad_magic), ProtocolError);
  std::istringstream bad_version("SONARMAP 2\n");
  EXPECT_THROW(read_snapshot(bad_version), ProtocolError);
  std::istringstream truncated("SONARMAP 1\nsize 2 2 0.25\nclasses 1\nlayer obstacle u8\n0 1\n");
  EXPECT_THROW(read_snapshot(truncated), ProtocolError);
  std::istringstream no_end("SONARMAP 1\nsize 1 1 0.25\nclasses 1\n");
  EXPECT_THROW(read_snapshot(no_end), ProtocolError);
}
