#include "sonar/planner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <queue>

namespace sonar {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kDx[8] = {1, -1, 0, 0, 1, 1, -1, -1};
constexpr int kDy[8] = {0, 0, 1, -1, 1, -1, 1, -1};

struct QueueEntry {
  double f;
  double g;
  std::size_t index;
  // min-heap on f, then on index for deterministic expansion order
  bool operator>(const QueueEntry& o) const { return f != o.f ? f > o.f : index > o.index; }
};

using MinQueue = std::priority_queue<QueueEntry, std::vector<QueueEntry>, std::greater<>>;

// Calls fn(neighbour, step_cost) for every legal move out of c.
template <typename Fn>
void for_each_move(const BitLayer& blocked, CellCoord c, Fn&& fn) {
  for (int k = 0; k < 8; ++k) {
    const CellCoord n{c.x + kDx[k], c.y + kDy[k]};
    if (!blocked.in_bounds(n) || blocked[n]) continue;
    if (k >= 4 && (blocked(c.x + kDx[k], c.y) || blocked(c.x, c.y + kDy[k]))) continue;
    fn(n, k >= 4 ? std::numbers::sqrt2 : 1.0);
  }
}

Path trace(const BitLayer& grid, const std::vector<std::size_t>& parent, std::size_t goal, double cost_cells) {
  Path p;
  for (std::size_t i = goal;; i = parent[i]) {
    p.cells.push_back(grid.coord(i));
    if (parent[i] == i) break;
  }
  std::reverse(p.cells.begin(), p.cells.end());
  p.length_m = cost_cells * grid.resolution();
  return p;
}

}  // namespace

double octile(CellCoord a, CellCoord b) {
  const double dx = std::abs(a.x - b.x);
  const double dy = std::abs(a.y - b.y);
  return std::max(dx, dy) + (std::numbers::sqrt2 - 1.0) * std::min(dx, dy);
}

PlanResult astar(const BitLayer& obstacle, CellCoord start, CellCoord goal) {
  if (!obstacle.in_bounds(start) || obstacle[start]) throw ValidationError("planner start cell is not free");
  if (!obstacle.in_bounds(goal)) throw ValidationError("planner goal out of bounds");

  const std::size_t n = obstacle.size();
  std::vector<double> g(n, kInf);
  std::vector<std::size_t> parent(n);
  std::vector<std::uint8_t> closed(n, 0);
  const bool goal_free = !obstacle[goal];
  const std::size_t s = obstacle.index(start);
  const std::size_t t = obstacle.index(goal);

  MinQueue open;
  g[s] = 0.0;
  parent[s] = s;
  // With a blocked goal the heuristic is useless; fall back to Dijkstra to map the reachable set.
  open.push({goal_free ? octile(start, goal) : 0.0, 0.0, s});
  while (!open.empty()) {
    const QueueEntry e = open.top();
    open.pop();
    if (closed[e.index]) continue;
    closed[e.index] = 1;
    if (e.index == t && goal_free) return {true, trace(obstacle, parent, t, g[t]), goal};
    const CellCoord c = obstacle.coord(e.index);
    for_each_move(obstacle, c, [&](CellCoord nb, double cost) {
      const std::size_t j = obstacle.index(nb);
      const double ng = g[e.index] + cost;
      if (ng < g[j]) {
        g[j] = ng;
        parent[j] = e.index;
        open.push({ng + (goal_free ? octile(nb, goal) : 0.0), ng, j});
      }
    });
  }

  // Unreachable: every closed cell is reachable. Pick the one nearest the goal (Euclidean), then cheapest.
  std::size_t best = s;
  double best_d = kInf;
  for (std::size_t i = 0; i < n; ++i) {
    if (!closed[i]) continue;
    const CellCoord c = obstacle.coord(i);
    const double d = std::hypot(c.x - goal.x, c.y - goal.y);
    if (d < best_d || (d == best_d && g[i] < g[best])) {
      best = i;
      best_d = d;
    }
  }
  return {false, trace(obstacle, parent, best, g[best]), obstacle.coord(best)};
}

RealLayer geodesic_field(const BitLayer& blocked, std::span<const CellCoord> sources) {
  RealLayer field(blocked.width(), blocked.height(), kInf, blocked.resolution());
  MinQueue open;
  for (CellCoord c : sources) {
    if (!blocked.in_bounds(c) || blocked[c]) continue;
    field[c] = 0.0;
    open.push({0.0, 0.0, field.index(c)});
  }
  while (!open.empty()) {
    const QueueEntry e = open.top();
    open.pop();
    if (e.g > field.data()[e.index]) continue;
    for_each_move(blocked, field.coord(e.index), [&](CellCoord nb, double cost) {
      const double ng = e.g + cost;
      if (ng < field[nb]) {
        field[nb] = ng;
        open.push({ng, ng, field.index(nb)});
      }
    });
  }
  for (double& v : field.data()) v *= blocked.resolution();
  return field;
}

CellCoord extract_waypoint(const Path& path, const AgentPose& pose, double resolution, double lookahead_m) {
  if (path.cells.empty()) throw ValidationError("empty path");
  std::size_t nearest = 0;
  double best = kInf;
  for (std::size_t i = 0; i < path.cells.size(); ++i) {
    const double d = std::hypot(path.cells[i].x * resolution - pose.x, path.cells[i].y * resolution - pose.y);
    if (d < best) {
      best = d;
      nearest = i;
    }
  }
  double arc = 0.0;
  for (std::size_t i = nearest + 1; i < path.cells.size(); ++i) {
    const CellCoord a = path.cells[i - 1];
    const CellCoord b = path.cells[i];
    arc += (a.x != b.x && a.y != b.y ? std::numbers::sqrt2 : 1.0) * resolution;
    if (arc >= lookahead_m - 1e-9) return b;
  }
  return path.cells.back();
}

Action local_step(const AgentPose& pose, CellCoord waypoint, double resolution, bool waypoint_is_goal) {
  if (pose.cell(resolution) == waypoint) return waypoint_is_goal ? Action::Stop : Action::TurnLeft;
  const double dx = waypoint.x * resolution - pose.x;
  const double dy = waypoint.y * resolution - pose.y;
  const double bearing = std::atan2(-dy, dx);
  const double err = wrap_to_pi(bearing - pose.heading);
  constexpr double kCone = std::numbers::pi / 12.0;  // 15 degrees
  if (std::abs(err) <= kCone + 1e-9) return Action::MoveForward;
  return err > 0.0 ? Action::TurnLeft : Action::TurnRight;
}

}  // namespace sonar
