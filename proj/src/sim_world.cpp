#include "sonar/sim_world.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "sonar/planner.hpp"
#include "sonar/rng.hpp"

namespace sonar {

const char* to_string(Action a) {
  switch (a) {
    case Action::MoveForward: return "MOVE_FORWARD";
    case Action::TurnLeft: return "TURN_LEFT";
    case Action::TurnRight: return "TURN_RIGHT";
    case Action::Stop: return "STOP";
  }
  return "?";
}

double normalize_angle(double a) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  a = std::fmod(a, two_pi);
  if (a < 0.0) a += two_pi;
  if (a >= two_pi) a -= two_pi;
  return a;
}

double wrap_to_pi(double a) {
  a = normalize_angle(a);
  return a > std::numbers::pi ? a - 2.0 * std::numbers::pi : a;
}

CellCoord AgentPose::cell(double resolution) const {
  return {static_cast<int>(std::lround(x / resolution)), static_cast<int>(std::lround(y / resolution))};
}

AgentPose pose_at_cell(CellCoord c, double resolution, double heading) {
  return {c.x * resolution, c.y * resolution, normalize_angle(heading)};
}

ClassId Scene::class_id(const std::string& n) const {
  for (std::size_t i = 1; i < class_names.size(); ++i)
    if (class_names[i] == n) return static_cast<ClassId>(i);
  throw ValidationError("unknown class name '" + n + "'");
}

void finalize_scene(Scene& scene, double declared_optimal) {
  const double res = scene.resolution();
  std::sort(scene.objects.begin(), scene.objects.end(), [](const ObjectPlacement& a, const ObjectPlacement& b) {
    return a.cell != b.cell ? a.cell < b.cell : a.cls < b.cls;
  });
  scene.object_layer = LabelLayer(scene.width(), scene.height(), kNoClass, res);
  std::vector<CellCoord> targets;
  for (const auto& o : scene.objects) {
    if (!scene.walls.in_bounds(o.cell)) throw ValidationError("object outside the grid");
    if (scene.walls[o.cell]) throw ValidationError("object placed on a wall cell");
    if (o.cls == kNoClass || o.cls > scene.num_classes()) throw ValidationError("object with unknown class");
    scene.object_layer[o.cell] = o.cls;
    if (o.cls == scene.target_class) targets.push_back(o.cell);
  }
  if (scene.target_class == kNoClass || scene.target_class > scene.num_classes())
    throw ValidationError("scene has no valid target class");
  if (targets.empty()) throw ValidationError("scene contains no object of the target class");
  const CellCoord start = scene.start.cell(res);
  if (!scene.walls.in_bounds(start) || scene.walls[start]) throw ValidationError("start cell is not free");
  scene.start.heading = normalize_angle(scene.start.heading);

  scene.target_distance = geodesic_field(scene.walls, targets);
  const double l = scene.target_distance[start];
  if (!std::isfinite(l)) throw ValidationError("target class is unreachable from the start cell");
  if (declared_optimal >= 0.0 && std::abs(declared_optimal - l) > 1e-6)
    throw ValidationError("declared optimal length " + std::to_string(declared_optimal) +
                          " does not match computed " + std::to_string(l));
  scene.optimal_path_length = l;
}

// ---------------------------------------------------------------------------
// Scene text format

Scene parse_scene(std::istream& in, std::string name) {
  Scene scene;
  scene.name = std::move(name);
  std::string line;
  auto next_line = [&](std::string& out) {
    while (std::getline(in, out)) {
      if (!out.empty() && out.back() == '\r') out.pop_back();
      if (out.empty() || out[0] == ';') continue;
      return true;
    }
    return false;
  };
  if (!next_line(line)) throw ValidationError("empty scene file");
  int w = 0, h = 0;
  double res = 0.0;
  {
    std::istringstream hs(line);
    if (!(hs >> w >> h >> res) || w <= 0 || h <= 0 || res <= 0.0) throw ValidationError("bad scene header: " + line);
  }
  std::vector<std::string> rows;
  for (int y = 0; y < h; ++y) {
    if (!std::getline(in, line)) throw ValidationError("scene grid truncated");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (static_cast<int>(line.size()) != w)
      throw ValidationError("scene row " + std::to_string(y) + " has width " + std::to_string(line.size()));
    rows.push_back(line);
  }
  std::map<char, std::string> legend;
  std::vector<char> legend_order;
  std::string target_name;
  double declared_optimal = -1.0;
  double heading_deg = 0.0;
  while (next_line(line)) {
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key == "class") {
      std::string sym, cname;
      if (!(ls >> sym >> cname) || sym.size() != 1) throw ValidationError("bad legend line: " + line);
      const char c = sym[0];
      if (c == '#' || c == '.' || c == 'A' || !std::isalnum(static_cast<unsigned char>(c)))
        throw ValidationError("reserved legend symbol: " + sym);
      if (!legend.contains(c)) legend_order.push_back(c);
      legend[c] = cname;
    } else if (key == "target") {
      ls >> target_name;
    } else if (key == "optimal") {
      ls >> declared_optimal;
    } else if (key == "heading") {
      ls >> heading_deg;
    } else {
      throw ValidationError("unknown scene directive '" + key + "'");
    }
  }
  // Class ids follow first appearance of each distinct name in the legend.
  scene.class_names = {""};
  std::map<char, ClassId> sym_to_class;
  for (char c : legend_order) {
    const auto& cname = legend[c];
    auto it = std::find(scene.class_names.begin(), scene.class_names.end(), cname);
    if (it == scene.class_names.end()) {
      scene.class_names.push_back(cname);
      it = scene.class_names.end() - 1;
    }
    sym_to_class[c] = static_cast<ClassId>(it - scene.class_names.begin());
  }
  scene.walls = BitLayer(w, h, 0, res);
  bool have_start = false;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const char c = rows[y][x];
      if (c == '#') {
        scene.walls(x, y) = 1;
      } else if (c == '.') {
      } else if (c == 'A') {
        if (have_start) throw ValidationError("scene has more than one start cell");
        have_start = true;
        scene.start = pose_at_cell({x, y}, res, heading_deg * std::numbers::pi / 180.0);
      } else if (auto it = sym_to_class.find(c); it != sym_to_class.end()) {
        scene.objects.push_back({it->second, {x, y}});
      } else {
        throw ValidationError(std::string("undefined grid symbol '") + c + "'");
      }
    }
  }
  if (!have_start) throw ValidationError("scene has no start cell 'A'");
  if (target_name.empty()) throw ValidationError("scene has no target line");
  scene.target_class = scene.class_id(target_name);
  finalize_scene(scene, declared_optimal);
  return scene;
}

Scene load_scene(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ValidationError("cannot open scene file " + path);
  auto slash = path.find_last_of('/');
  return parse_scene(f, slash == std::string::npos ? path : path.substr(slash + 1));
}

void write_scene(std::ostream& out, const Scene& scene) {
  static const std::string symbols = "0123456789abcdefghijklmnopqrstuvwxyzBCDEFGHIJKLMNOPQRSTUVWXYZ";
  if (scene.num_classes() > symbols.size()) throw ValidationError("too many classes for the text format");
  out << scene.width() << ' ' << scene.height() << ' ' << scene.resolution() << '\n';
  const CellCoord start = scene.start.cell(scene.resolution());
  for (int y = 0; y < scene.height(); ++y) {
    for (int x = 0; x < scene.width(); ++x) {
      char c = scene.walls(x, y) ? '#' : '.';
      if (const ClassId k = scene.object_layer(x, y); k != kNoClass) c = symbols[k - 1];
      if (CellCoord{x, y} == start) c = 'A';
      out << c;
    }
    out << '\n';
  }
  for (ClassId k = 1; k <= scene.num_classes(); ++k)
    out << "class " << symbols[k - 1] << ' ' << scene.class_names[k] << '\n';
  out << "target " << scene.class_names[scene.target_class] << '\n';
  std::ostringstream h;
  h.precision(17);
  h << scene.start.heading * 180.0 / std::numbers::pi;
  out << "heading " << h.str() << '\n';
  std::ostringstream o;
  o.precision(17);
  o << scene.optimal_path_length;
  out << "optimal " << o.str() << '\n';
}

// ---------------------------------------------------------------------------
// Kinematics and sensing

AgentPose step(const Scene& scene, const AgentPose& pose, Action action) {
  AgentPose next = pose;
  switch (action) {
    case Action::TurnLeft: next.heading = normalize_angle(pose.heading + kTurnRad); break;
    case Action::TurnRight: next.heading = normalize_angle(pose.heading - kTurnRad); break;
    case Action::Stop: break;
    case Action::MoveForward: {
      next.x = pose.x + kForwardStepM * std::cos(pose.heading);
      next.y = pose.y - kForwardStepM * std::sin(pose.heading);
      const CellCoord c = next.cell(scene.resolution());
      if (!scene.walls.in_bounds(c) || scene.walls[c]) return pose;
      break;
    }
  }
  return next;
}

std::vector<CellCoord> visible_cells(const BitLayer& walls, const AgentPose& pose, const SensorConfig& cfg) {
  const double res = walls.resolution();
  const double deg = std::numbers::pi / 180.0;
  const int rays = std::max(1, static_cast<int>(std::lround(cfg.fov_deg / cfg.angular_step_deg)));
  const double first = pose.heading - cfg.fov_deg * deg / 2.0 + cfg.angular_step_deg * deg / 2.0;
  const double range_cells = cfg.max_range_m / res;
  const double px = pose.x / res;
  const double py = pose.y / res;

  std::vector<std::uint8_t> seen(walls.size(), 0);
  std::vector<CellCoord> out;
  const CellCoord own = pose.cell(res);
  if (walls.in_bounds(own)) {
    seen[walls.index(own)] = 1;
    out.push_back(own);
  }
  for (int r = 0; r < rays; ++r) {
    const double a = first + r * cfg.angular_step_deg * deg;
    const double ca = std::cos(a);
    const double sa = std::sin(a);
    for (int k = 0;; ++k) {
      const double d = k * cfg.radial_step_cells;
      if (d > range_cells + 1e-9) break;
      const CellCoord c{static_cast<int>(std::lround(px + d * ca)), static_cast<int>(std::lround(py - d * sa))};
      if (!walls.in_bounds(c)) break;
      const std::size_t i = walls.index(c);
      if (!seen[i]) {
        seen[i] = 1;
        out.push_back(c);
      }
      if (walls.data()[i]) break;
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

Observation observe(const Scene& scene, const AgentPose& pose, std::uint64_t seed, const SensorConfig& cfg) {
  Observation obs;
  obs.fov_deg = cfg.fov_deg;
  obs.max_range_m = cfg.max_range_m;
  obs.visible_cells = visible_cells(scene.walls, pose, cfg);
  Rng rng(mix_seed(seed, 0x0b5e));
  for (CellCoord c : obs.visible_cells) {
    if (scene.walls[c]) {
      obs.wall_hits.push_back(c);
      continue;
    }
    const ClassId k = scene.object_layer[c];
    if (k != kNoClass) {
      if (!cfg.noise) {
        obs.detections.push_back({k, c, 1.0});
        continue;
      }
      if (uniform01(rng) < cfg.false_negative) continue;
      obs.detections.push_back({k, c, truncated_normal01(rng, cfg.detect_accuracy, cfg.detect_sd)});
    } else if (cfg.noise && cfg.false_positive_rate > 0.0 && uniform01(rng) < cfg.false_positive_rate) {
      const auto cls = static_cast<ClassId>(1 + rng() % scene.num_classes());
      obs.detections.push_back({cls, c, truncated_normal01(rng, cfg.false_positive_conf, cfg.false_positive_sd)});
    }
  }
  // visible_cells is row-major and each cell yields at most one detection, so the list is already ordered.
  return obs;
}

double semantic_score(const Scene& scene, std::span<const CellCoord> visible, ClassId target_class,
                      std::uint64_t seed, const SensorConfig& cfg) {
  const RealLayer* field = &scene.target_distance;
  RealLayer other;
  if (target_class != scene.target_class) {
    std::vector<CellCoord> cells;
    for (const auto& o : scene.objects)
      if (o.cls == target_class) cells.push_back(o.cell);
    other = geodesic_field(scene.walls, cells);
    field = &other;
  }
  double d = std::numeric_limits<double>::infinity();
  for (CellCoord c : visible) d = std::min(d, (*field)[c]);
  double s = std::isfinite(d) ? cfg.score_max * std::exp(-d / cfg.score_lambda_m) : 0.0;
  if (cfg.noise && cfg.score_noise_sd > 0.0) {
    Rng rng(mix_seed(seed, 0x5c02e));
    s += std::normal_distribution<double>(0.0, cfg.score_noise_sd)(rng);
  }
  return std::clamp(s, 0.0, 1.0);
}

double semantic_score(const Scene& scene, const AgentPose& pose, ClassId target_class, std::uint64_t seed,
                      const SensorConfig& cfg) {
  const auto vis = visible_cells(scene.walls, pose, cfg);
  return semantic_score(scene, vis, target_class, seed, cfg);
}

double OracleScorer::score(const Scene& scene, const AgentPose&, std::span<const CellCoord> visible,
                           ClassId target_class, std::uint64_t seed) {
  return semantic_score(scene, visible, target_class, seed, cfg_);
}

}  // namespace sonar
