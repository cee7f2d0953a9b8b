#pragma once

#include <span>
#include <vector>

#include "sonar/grid.hpp"
#include "sonar/sim_world.hpp"

namespace sonar {

struct Path {
  std::vector<CellCoord> cells;  // start .. goal, 8-adjacent
  double length_m = 0.0;
};

struct PlanResult {
  bool reached = false;  // false: goal blocked or unreachable, `path` leads to `substitute`
  Path path;
  CellCoord substitute;  // nearest reachable free cell to the goal (== goal when reached)
};

/// 8-connected A* with unit / sqrt(2) step costs and the octile heuristic. Diagonal moves require both
/// orthogonal neighbours to be free. Throws ValidationError if `start` is occupied or out of bounds.
PlanResult astar(const BitLayer& obstacle, CellCoord start, CellCoord goal);

/// Octile distance in cells.
double octile(CellCoord a, CellCoord b);

/// Multi-source shortest path field (meters) over free cells, same move model as astar.
/// Unreachable cells hold +inf.
RealLayer geodesic_field(const BitLayer& blocked, std::span<const CellCoord> sources);

/// First path cell at least `lookahead_m` of arc length past the path cell nearest the agent,
/// or the goal if the remaining path is shorter.
CellCoord extract_waypoint(const Path& path, const AgentPose& pose, double resolution, double lookahead_m = 1.0);

/// Local follower. Drives forward while the bearing error is within +-15 degrees (inclusive),
/// otherwise turns toward the waypoint. Emits STOP on arrival at the final goal.
Action local_step(const AgentPose& pose, CellCoord waypoint, double resolution, bool waypoint_is_goal);

}  // namespace sonar
