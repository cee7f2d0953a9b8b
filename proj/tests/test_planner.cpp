#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "sonar/planner.hpp"
#include "test_util.hpp"

using namespace sonar;

namespace {

void expect_valid(const BitLayer& grid, const Path& p, CellCoord start, CellCoord end) {
  ASSERT_FALSE(p.cells.empty());
  EXPECT_EQ(p.cells.front(), start);
  EXPECT_EQ(p.cells.back(), end);
  double cost = 0.0;
  for (std::size_t i = 0; i < p.cells.size(); ++i) {
    EXPECT_FALSE(grid[p.cells[i]]);
    if (i == 0) continue;
    const int dx = p.cells[i].x - p.cells[i - 1].x, dy = p.cells[i].y - p.cells[i - 1].y;
    ASSERT_TRUE(std::abs(dx) <= 1 && std::abs(dy) <= 1 && (dx || dy));
    if (dx && dy) {
      EXPECT_FALSE(grid(p.cells[i - 1].x + dx, p.cells[i - 1].y));
      EXPECT_FALSE(grid(p.cells[i - 1].x, p.cells[i - 1].y + dy));
    }
    cost += dx && dy ? std::numbers::sqrt2 : 1.0;
  }
  EXPECT_NEAR(p.length_m, cost * grid.resolution(), 1e-9);
}

}  // namespace

TEST(Astar, TrivialCases) {
  BitLayer open(10, 10, 0);
  const auto same = astar(open, {3, 3}, {3, 3});
  EXPECT_TRUE(same.reached);
  EXPECT_EQ(same.path.cells.size(), 1u);
  EXPECT_EQ(same.path.length_m, 0.0);

  const auto diag = astar(open, {0, 0}, {9, 9});
  EXPECT_TRUE(diag.reached);
  EXPECT_NEAR(diag.path.length_m, 9 * std::numbers::sqrt2 * 0.25, 1e-12);
  expect_valid(open, diag.path, {0, 0}, {9, 9});

  BitLayer walled = open;
  walled(2, 2) = 1;
  EXPECT_THROW(astar(walled, {2, 2}, {0, 0}), ValidationError);
  EXPECT_THROW(astar(open, {0, 0}, {10, 0}), ValidationError);
}

TEST(Astar, NoCornerCutting) {
  BitLayer g(3, 3, 0);
  g(1, 0) = 1;
  g(0, 1) = 1;
  // (0,0) is sealed off: its only way out is the diagonal between two walls.
  const auto r = astar(g, {0, 0}, {2, 2});
  EXPECT_FALSE(r.reached);
  EXPECT_EQ(r.substitute, (CellCoord{0, 0}));
}

TEST(Astar, UnreachableGoalYieldsNearestReachableSubstitute) {
  BitLayer g(9, 5, 0);
  for (int y = 0; y < 5; ++y) g(5, y) = 1;
  const auto r = astar(g, {0, 2}, {8, 2});
  EXPECT_FALSE(r.reached);
  EXPECT_EQ(r.substitute, (CellCoord{4, 2}));
  expect_valid(g, r.path, {0, 2}, {4, 2});

  const auto blocked_goal = astar(g, {0, 2}, {5, 2});
  EXPECT_FALSE(blocked_goal.reached);
  EXPECT_EQ(blocked_goal.substitute, (CellCoord{4, 2}));
}

TEST(Astar, MatchesDijkstraOnRandomGrids) {
  std::mt19937_64 rng(21);
  int solved = 0;
  while (solved < 150) {
    BitLayer g = test::random_bits(rng, 20, 20, 0.25);
    const CellCoord s{static_cast<int>(rng() % 20), static_cast<int>(rng() % 20)};
    const CellCoord t{static_cast<int>(rng() % 20), static_cast<int>(rng() % 20)};
    if (g[s] || g[t]) continue;
    const auto oracle = test::dijkstra_costs(g, s);
    const auto r = astar(g, s, t);
    if (!std::isfinite(oracle[g.index(t)])) {
      EXPECT_FALSE(r.reached);
      continue;
    }
    ++solved;
    ASSERT_TRUE(r.reached);
    ASSERT_NEAR(r.path.length_m, oracle[g.index(t)] * 0.25, 1e-9);
    expect_valid(g, r.path, s, t);
    // Octile distance never overestimates.
    for (std::size_t i = 0; i < g.size(); ++i)
      if (std::isfinite(oracle[i])) {
        ASSERT_LE(octile(s, g.coord(i)), oracle[i] + 1e-9);
      }
  }
}

TEST(GeodesicField, MatchesDijkstra) {
  std::mt19937_64 rng(22);
  for (int trial = 0; trial < 40; ++trial) {
    BitLayer g = test::random_bits(rng, 15, 12, 0.25);
    const CellCoord s{static_cast<int>(rng() % 15), static_cast<int>(rng() % 12)};
    if (g[s]) continue;
    const std::vector<CellCoord> src{s};
    const auto field = geodesic_field(g, src);
    const auto oracle = test::dijkstra_costs(g, s);
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (g.data()[i] || !std::isfinite(oracle[i])) {
        ASSERT_TRUE(std::isinf(field.data()[i]));
      } else {
        ASSERT_NEAR(field.data()[i], oracle[i] * 0.25, 1e-9);
      }
    }
  }
}

TEST(Waypoint, Lookahead) {
  Path straight;
  for (int x = 0; x < 8; ++x) straight.cells.push_back({x, 0});
  EXPECT_EQ(extract_waypoint(straight, pose_at_cell({0, 0}, 0.25), 0.25), (CellCoord{4, 0}));
  EXPECT_EQ(extract_waypoint(straight, pose_at_cell({2, 0}, 0.25), 0.25), (CellCoord{6, 0}));
  EXPECT_EQ(extract_waypoint(straight, pose_at_cell({7, 0}, 0.25), 0.25), (CellCoord{7, 0}));

  Path shortp{{{0, 0}, {1, 0}, {2, 0}}, 0.5};
  EXPECT_EQ(extract_waypoint(shortp, pose_at_cell({0, 0}, 0.25), 0.25), (CellCoord{2, 0}));
  EXPECT_THROW(extract_waypoint(Path{}, AgentPose{}, 0.25), ValidationError);
}

TEST(LocalStep, ConeAndTurns) {
  const double res = 0.25;
  const AgentPose p = pose_at_cell({5, 5}, res, 0.0);
  EXPECT_EQ(local_step(p, {9, 5}, res, false), Action::MoveForward);
  EXPECT_EQ(local_step(p, {5, 1}, res, false), Action::TurnLeft);   // +90 degrees (up)
  EXPECT_EQ(local_step(p, {5, 9}, res, false), Action::TurnRight);  // -90 degrees
  EXPECT_EQ(local_step(p, {5, 5}, res, true), Action::Stop);

  // Waypoint exactly 15 degrees off the heading, either side.
  for (double sign : {1.0, -1.0}) {
    const double off = sign * std::numbers::pi / 12.0;
    AgentPose q = p;
    q.heading = normalize_angle(-off);
    EXPECT_EQ(local_step(q, {9, 5}, res, false), Action::MoveForward) << sign;
    q.heading = normalize_angle(-off * 1.01);
    EXPECT_NE(local_step(q, {9, 5}, res, false), Action::MoveForward) << sign;
  }
}

TEST(LocalStep, ForwardMovesNeverIncreaseDistance) {
  BitLayer open(30, 30, 0);
  Scene s;
  s.walls = open;
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    AgentPose p = pose_at_cell({15, 15}, 0.25, (rng() % 12) * kTurnRad);
    const CellCoord wp{static_cast<int>(3 + rng() % 24), static_cast<int>(3 + rng() % 24)};
    for (int i = 0; i < 80 && p.cell(0.25) != wp; ++i) {
      const Action a = local_step(p, wp, 0.25, true);
      const AgentPose n = step(s, p, a);
      if (a == Action::MoveForward) {
        const double before = std::hypot(wp.x * 0.25 - p.x, wp.y * 0.25 - p.y);
        const double after = std::hypot(wp.x * 0.25 - n.x, wp.y * 0.25 - n.y);
        ASSERT_LE(after, before + 1e-12);
      }
      p = n;
    }
  }
}
