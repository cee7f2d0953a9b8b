#include "sonar/episode_runner.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <memory>
#include <sstream>
#include <thread>

#include "sonar/layered_map.hpp"
#include "sonar/planner.hpp"
#include "sonar/rng.hpp"
#include "sonar/target_prediction.hpp"
#include "sonar/wire.hpp"

namespace sonar {

const char* to_string(Termination t) {
  switch (t) {
    case Termination::Stop: return "stop";
    case Termination::StepLimit: return "step_limit";
    case Termination::NoFrontier: return "no_frontier";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Config

void EpisodeConfig::validate() const {
  if (max_steps <= 0) throw ConfigError("max_steps must be positive");
  if (!(success_radius_m > 0.0)) throw ConfigError("success_radius must be positive");
  if (!ablation.tpm && !ablation.vm) throw ConfigError("at least one of tpm/vm must stay enabled");
  if (!ablation.stl && !ablation.mol) throw ConfigError("at least one of stl/mol must stay enabled");
  if (scorer != "oracle" && scorer != "remote") throw ConfigError("scorer must be oracle or remote");
  if (predictor != "heuristic" && predictor != "remote") throw ConfigError("predictor must be heuristic or remote");
  if (max_targets < 1) throw ConfigError("max_targets must be >= 1");
  if (!(fusion.epsilon > 0.0)) throw ConfigError("epsilon must be positive");
  if (fusion.lock_neighborhood < 1 || fusion.lock_neighborhood % 2 == 0)
    throw ConfigError("lock_neighborhood must be a positive odd number");
  if (!(value.d_max_m > 0.0) || !(sensor.max_range_m > 0.0)) throw ConfigError("ranges must be positive");
  if (!(sensor.angular_step_deg > 0.0) || !(sensor.radial_step_cells > 0.0) || !(sensor.fov_deg > 0.0))
    throw ConfigError("fov and ray steps must be positive");
  for (double p : {sensor.detect_accuracy, sensor.false_negative, sensor.false_positive_rate,
                   sensor.false_positive_conf, sensor.score_max, fusion.lock_threshold, fusion.sci_label_confidence})
    if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("probabilities, confidences and thresholds must lie in [0,1]");
}

namespace {

double parse_double(const std::string& key, const std::string& v) {
  double d = 0.0;
  auto r = std::from_chars(v.data(), v.data() + v.size(), d);
  if (r.ec != std::errc{} || r.ptr != v.data() + v.size()) throw ConfigError("config '" + key + "': not a number");
  return d;
}

long parse_long(const std::string& key, const std::string& v) {
  long d = 0;
  auto r = std::from_chars(v.data(), v.data() + v.size(), d);
  if (r.ec != std::errc{} || r.ptr != v.data() + v.size()) throw ConfigError("config '" + key + "': not an integer");
  return d;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "on" || v == "1") return true;
  if (v == "false" || v == "off" || v == "0") return false;
  throw ConfigError("config '" + key + "': expected true/false");
}

using Setter = std::function<void(EpisodeConfig&, const std::string& key, const std::string& value)>;

template <typename T>
Setter real(T EpisodeConfig::*group, double T::*field) {
  return [=](EpisodeConfig& c, const std::string& k, const std::string& v) { (c.*group).*field = parse_double(k, v); };
}

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"max_steps", [](EpisodeConfig& c, auto& k, auto& v) { c.max_steps = static_cast<int>(parse_long(k, v)); }},
      {"success_radius", [](EpisodeConfig& c, auto& k, auto& v) { c.success_radius_m = parse_double(k, v); }},
      {"seed", [](EpisodeConfig& c, auto& k, auto& v) { c.seed = static_cast<std::uint64_t>(parse_long(k, v)); }},
      {"ablation", [](EpisodeConfig& c, auto&, auto& v) { c.ablation = parse_ablation(v); }},
      {"policy",
       [](EpisodeConfig& c, auto&, auto& v) {
         if (v == "sonar") c.policy = ExplorationPolicy::Sonar;
         else if (v == "random_frontier") c.policy = ExplorationPolicy::RandomFrontier;
         else throw ConfigError("policy must be sonar or random_frontier");
       }},
      {"scorer", [](EpisodeConfig& c, auto&, auto& v) { c.scorer = v; }},
      {"predictor", [](EpisodeConfig& c, auto&, auto& v) { c.predictor = v; }},
      {"endpoint", [](EpisodeConfig& c, auto&, auto& v) { c.endpoint = v; }},
      {"remote_timeout_ms",
       [](EpisodeConfig& c, auto& k, auto& v) { c.remote_timeout_ms = static_cast<int>(parse_long(k, v)); }},
      {"prior_file", [](EpisodeConfig& c, auto&, auto& v) { c.prior_file = v; }},
      {"max_targets", [](EpisodeConfig& c, auto& k, auto& v) { c.max_targets = static_cast<int>(parse_long(k, v)); }},
      {"lookahead", [](EpisodeConfig& c, auto& k, auto& v) { c.lookahead_m = parse_double(k, v); }},
      {"render_dir", [](EpisodeConfig& c, auto&, auto& v) { c.render_dir = v; }},
      // sensing / oracle
      {"fov_deg", real(&EpisodeConfig::sensor, &SensorConfig::fov_deg)},
      {"max_range", real(&EpisodeConfig::sensor, &SensorConfig::max_range_m)},
      {"angular_step_deg", real(&EpisodeConfig::sensor, &SensorConfig::angular_step_deg)},
      {"radial_step_cells", real(&EpisodeConfig::sensor, &SensorConfig::radial_step_cells)},
      {"noise", [](EpisodeConfig& c, auto& k, auto& v) { c.sensor.noise = parse_bool(k, v); }},
      {"detect_accuracy", real(&EpisodeConfig::sensor, &SensorConfig::detect_accuracy)},
      {"detect_sd", real(&EpisodeConfig::sensor, &SensorConfig::detect_sd)},
      {"false_negative", real(&EpisodeConfig::sensor, &SensorConfig::false_negative)},
      {"false_positive_rate", real(&EpisodeConfig::sensor, &SensorConfig::false_positive_rate)},
      {"false_positive_conf", real(&EpisodeConfig::sensor, &SensorConfig::false_positive_conf)},
      {"false_positive_sd", real(&EpisodeConfig::sensor, &SensorConfig::false_positive_sd)},
      {"score_max", real(&EpisodeConfig::sensor, &SensorConfig::score_max)},
      {"score_lambda", real(&EpisodeConfig::sensor, &SensorConfig::score_lambda_m)},
      {"score_noise_sd", real(&EpisodeConfig::sensor, &SensorConfig::score_noise_sd)},
      // value map
      {"d_max", real(&EpisodeConfig::value, &ValueMapConfig::d_max_m)},
      {"gaussian_sigma", real(&EpisodeConfig::value, &ValueMapConfig::gaussian_sigma)},
      {"score_weighting",
       [](EpisodeConfig& c, auto&, auto& v) {
         if (v == "cosine") c.value.weighting = ScoreWeighting::Cosine;
         else if (v == "uniform") c.value.weighting = ScoreWeighting::Uniform;
         else throw ConfigError("score_weighting must be cosine or uniform");
       }},
      // fusion
      {"sci_label_confidence", real(&EpisodeConfig::fusion, &FusionConfig::sci_label_confidence)},
      {"sci_dense", real(&EpisodeConfig::fusion, &FusionConfig::dense_above)},
      {"sci_sparse", real(&EpisodeConfig::fusion, &FusionConfig::sparse_below)},
      {"lock_threshold", real(&EpisodeConfig::fusion, &FusionConfig::lock_threshold)},
      {"epsilon", real(&EpisodeConfig::fusion, &FusionConfig::epsilon)},
      {"lock_neighborhood",
       [](EpisodeConfig& c, auto& k, auto& v) { c.fusion.lock_neighborhood = static_cast<int>(parse_long(k, v)); }},
  };
  return table;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

EpisodeConfig parse_config(std::istream& in, EpisodeConfig cfg) {
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    auto it = setters().find(key);
    if (it == setters().end()) throw ConfigError("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    it->second(cfg, key, value);
  }
  cfg.value.fov_deg = cfg.sensor.fov_deg;
  cfg.value.angular_step_deg = cfg.sensor.angular_step_deg;
  cfg.value.radial_step_cells = cfg.sensor.radial_step_cells;
  cfg.validate();
  return cfg;
}

EpisodeConfig load_config(const std::string& path, EpisodeConfig base) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config file " + path);
  return parse_config(f, std::move(base));
}

void write_config(std::ostream& out, const EpisodeConfig& c) {
  auto num = [](double v) {
    char buf[32];
    auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
  };
  out << "max_steps = " << c.max_steps << '\n'
      << "success_radius = " << num(c.success_radius_m) << '\n'
      << "seed = " << c.seed << '\n'
      << "ablation = " << to_string(c.ablation) << '\n'
      << "policy = " << (c.policy == ExplorationPolicy::Sonar ? "sonar" : "random_frontier") << '\n'
      << "scorer = " << c.scorer << '\n'
      << "predictor = " << c.predictor << '\n'
      << "endpoint = " << c.endpoint << '\n'
      << "remote_timeout_ms = " << c.remote_timeout_ms << '\n';
  if (!c.prior_file.empty()) out << "prior_file = " << c.prior_file << '\n';
  out << "max_targets = " << c.max_targets << '\n'
      << "lookahead = " << num(c.lookahead_m) << '\n'
      << "fov_deg = " << num(c.sensor.fov_deg) << '\n'
      << "max_range = " << num(c.sensor.max_range_m) << '\n'
      << "angular_step_deg = " << num(c.sensor.angular_step_deg) << '\n'
      << "radial_step_cells = " << num(c.sensor.radial_step_cells) << '\n'
      << "noise = " << (c.sensor.noise ? "true" : "false") << '\n'
      << "detect_accuracy = " << num(c.sensor.detect_accuracy) << '\n'
      << "detect_sd = " << num(c.sensor.detect_sd) << '\n'
      << "false_negative = " << num(c.sensor.false_negative) << '\n'
      << "false_positive_rate = " << num(c.sensor.false_positive_rate) << '\n'
      << "false_positive_conf = " << num(c.sensor.false_positive_conf) << '\n'
      << "false_positive_sd = " << num(c.sensor.false_positive_sd) << '\n'
      << "score_max = " << num(c.sensor.score_max) << '\n'
      << "score_lambda = " << num(c.sensor.score_lambda_m) << '\n'
      << "score_noise_sd = " << num(c.sensor.score_noise_sd) << '\n'
      << "d_max = " << num(c.value.d_max_m) << '\n'
      << "gaussian_sigma = " << num(c.value.gaussian_sigma) << '\n'
      << "score_weighting = " << (c.value.weighting == ScoreWeighting::Cosine ? "cosine" : "uniform") << '\n'
      << "sci_label_confidence = " << num(c.fusion.sci_label_confidence) << '\n'
      << "sci_dense = " << num(c.fusion.dense_above) << '\n'
      << "sci_sparse = " << num(c.fusion.sparse_below) << '\n'
      << "lock_threshold = " << num(c.fusion.lock_threshold) << '\n'
      << "epsilon = " << num(c.fusion.epsilon) << '\n'
      << "lock_neighborhood = " << c.fusion.lock_neighborhood << '\n';
  if (!c.render_dir.empty()) out << "render_dir = " << c.render_dir << '\n';
}

// ---------------------------------------------------------------------------
// Episode

namespace {

std::string fmt(double v) {
  char buf[32];
  auto r = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, 6);
  return std::string(buf, r.ptr);
}

void write_panel(const std::string& dir, int step, const char* name, const RealLayer& layer, double lo, double hi) {
  std::ostringstream file;
  file << dir << "/step_" << std::setw(4) << std::setfill('0') << step << '_' << name << ".pgm";
  std::ofstream out(file.str(), std::ios::binary);
  write_pgm(out, layer, lo, hi);
}

void render_step(const std::string& dir, int step, const LayeredMap& map, const ValueMap& vmap, const RealLayer* dmap,
                 CellCoord agent) {
  const int w = map.width(), h = map.height();
  RealLayer occ(w, h, 0.25, map.resolution());
  for (std::size_t i = 0; i < occ.size(); ++i) {
    if (map.obstacle.data()[i]) occ.data()[i] = 0.0;
    else if (map.frontier.data()[i]) occ.data()[i] = 1.0;
    else if (map.explored.data()[i]) occ.data()[i] = 0.75;
  }
  occ[agent] = 0.5;
  write_panel(dir, step, "occupancy", occ, 0.0, 1.0);
  RealLayer sem(w, h, 0.0, map.resolution());
  for (std::size_t i = 0; i < sem.size(); ++i) sem.data()[i] = map.smap_multi.data()[i];
  write_panel(dir, step, "semantic", sem, 0.0, std::max<double>(1, map.num_classes));
  const double vmax = *std::max_element(vmap.grid.data().begin(), vmap.grid.data().end());
  write_panel(dir, step, "value", vmap.grid, 0.0, vmax);
  if (dmap) {
    const double dmax = *std::max_element(dmap->data().begin(), dmap->data().end());
    write_panel(dir, step, "distance", *dmap, 0.0, dmax);
  }
}

struct Services {
  std::unique_ptr<TargetPredictor> predictor;
  OracleScorer oracle;
  std::unique_ptr<wire::RemoteScorer> remote_scorer;
  HeuristicPredictor* heuristic = nullptr;
  RemotePredictor* remote_predictor = nullptr;

  Services(const Scene& scene, const EpisodeConfig& cfg) : oracle(cfg.sensor) {
    CooccurrencePrior prior = cfg.prior_file.empty() ? CooccurrencePrior::builtin(scene.class_names)
                                                     : CooccurrencePrior::load(cfg.prior_file, scene.class_names);
    if (cfg.predictor == "remote") {
      auto p = std::make_unique<RemotePredictor>(cfg.endpoint, prior, cfg.remote_timeout_ms, cfg.max_targets);
      remote_predictor = p.get();
      predictor = std::move(p);
    } else {
      auto p = std::make_unique<HeuristicPredictor>(prior, cfg.max_targets);
      heuristic = p.get();
      predictor = std::move(p);
    }
    if (cfg.scorer == "remote")
      remote_scorer = std::make_unique<wire::RemoteScorer>(cfg.endpoint, oracle, cfg.remote_timeout_ms);
  }

  SemanticScorer& scorer() { return remote_scorer ? static_cast<SemanticScorer&>(*remote_scorer) : oracle; }
};

bool path_blocked(const Path& path, const BitLayer& obstacle) {
  for (CellCoord c : path.cells)
    if (obstacle[c]) return true;
  return false;
}

bool on_path(const Path& path, CellCoord c) {
  return std::find(path.cells.begin(), path.cells.end(), c) != path.cells.end();
}

AgentPose ahead(const AgentPose& p) {
  return {p.x + kForwardStepM * std::cos(p.heading), p.y - kForwardStepM * std::sin(p.heading), p.heading};
}

bool known_free(const BitLayer& obstacle, CellCoord c) { return obstacle.in_bounds(c) && !obstacle[c]; }

// True when the straight segment between the two points crosses no known obstacle cell.
bool line_of_sight(const BitLayer& obstacle, double x0, double y0, double x1, double y1) {
  const double res = obstacle.resolution();
  const double len = std::hypot(x1 - x0, y1 - y0) / res;
  const int samples = static_cast<int>(std::ceil(len / 0.25));
  for (int i = 1; i <= samples; ++i) {
    const double f = static_cast<double>(i) / samples;
    const CellCoord c{static_cast<int>(std::lround((x0 + f * (x1 - x0)) / res)),
                      static_cast<int>(std::lround((y0 + f * (y1 - y0)) / res))};
    if (!obstacle.in_bounds(c) || obstacle[c]) return false;
  }
  return true;
}

// Pulls the pursuit waypoint back along the path until the agent can see it, so the follower does not
// cut wall corners. Never goes behind the path cell after the one nearest the agent.
CellCoord visible_waypoint(const Path& path, const AgentPose& pose, CellCoord waypoint, const BitLayer& obstacle) {
  const double res = obstacle.resolution();
  std::size_t nearest = 0;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < path.cells.size(); ++i) {
    const double d = std::hypot(path.cells[i].x * res - pose.x, path.cells[i].y * res - pose.y);
    if (d < best) {
      best = d;
      nearest = i;
    }
  }
  std::size_t k = nearest;
  while (k + 1 < path.cells.size() && path.cells[k] != waypoint) ++k;
  const std::size_t floor = std::min(nearest + 1, path.cells.size() - 1);
  while (k > floor && !line_of_sight(obstacle, pose.x, pose.y, path.cells[k].x * res, path.cells[k].y * res)) --k;
  return path.cells[k];
}

// Recovery when the aligned forward move is blocked: among the 12 reachable headings, the one whose forward
// step lands on a known-free cell closest to `target` (fewest turns on ties). Returns the first action
// toward it, or nullopt when every heading is blocked.
std::optional<Action> recovery_action(const AgentPose& pose, CellCoord target, const BitLayer& obstacle) {
  const double res = obstacle.resolution();
  std::optional<int> best_k;
  double best_d = 0.0;
  for (int k : {0, 1, -1, 2, -2, 3, -3, 4, -4, 5, -5, 6}) {
    AgentPose p = pose;
    p.heading = normalize_angle(pose.heading + k * kTurnRad);
    const AgentPose next = ahead(p);
    if (!known_free(obstacle, next.cell(res))) continue;
    const double d = std::hypot(target.x * res - next.x, target.y * res - next.y);
    if (!best_k || d < best_d - 1e-12) {
      best_k = k;
      best_d = d;
    }
  }
  if (!best_k) return std::nullopt;
  if (*best_k == 0) return Action::MoveForward;
  return *best_k > 0 ? Action::TurnLeft : Action::TurnRight;
}

}  // namespace

EpisodeResult run_episode(const Scene& scene, const EpisodeConfig& cfg) {
  cfg.validate();
  EpisodeConfig config = cfg;
  config.value.fov_deg = cfg.sensor.fov_deg;
  config.value.angular_step_deg = cfg.sensor.angular_step_deg;
  config.value.radial_step_cells = cfg.sensor.radial_step_cells;
  const Ablation& ab = config.ablation;
  const double res = scene.resolution();
  const int w = scene.width(), h = scene.height();

  Services services(scene, config);
  LayeredMap map = LayeredMap::create(w, h, scene.num_classes(), res);
  ValueMap vmap(w, h, res, config.value);
  BitLayer exclude(w, h, 0, res);
  std::vector<CellCoord> target_cells;
  for (const auto& o : scene.objects)
    if (o.cls == scene.target_class) target_cells.push_back(o.cell);

  EpisodeResult result;
  result.scene = scene.name;
  result.seed = config.seed;
  result.optimal_length_m = scene.optimal_path_length;
  std::ostringstream trace;
  Rng policy_rng(mix_seed(config.seed, 0x7a11d));

  AgentPose pose = scene.start;
  Path path;
  CellCoord path_goal{-1, -1};
  struct HeldGoal {
    CellCoord cell;
    std::optional<double> dar;
    int deadline;  // step after which an unreached goal is given up
  };
  std::optional<HeldGoal> held_goal;
  bool recovering = false;  // set by a blocked forward move, cleared by the next successful one
  double sci_sum = 0.0, wpred_sum = 0.0;
  int sci_steps = 0;

  auto success_now = [&] {
    double best = std::numeric_limits<double>::infinity();
    for (CellCoord c : target_cells) best = std::min(best, std::hypot(c.x * res - pose.x, c.y * res - pose.y));
    return best <= config.success_radius_m + 1e-9;
  };

  for (int t = 0; t < config.max_steps; ++t) {
    const std::uint64_t step_seed = mix_seed(config.seed, static_cast<std::uint64_t>(t));
    const Observation obs = observe(scene, pose, step_seed, config.sensor);
    mark_obstacles(map, obs.wall_hits);
    mark_explored(map, obs.visible_cells);
    if (ab.mol && ab.stl) {
      apply_detections(map, obs.detections, scene.target_class);
      ++result.counters.mol_updates;
      ++result.counters.stl_updates;
    } else if (ab.mol) {
      apply_detections(map, obs.detections, kNoClass);
      ++result.counters.mol_updates;
    } else {
      // Single-target layers only.
      for (const Detection& d : obs.detections) {
        if (d.cls != scene.target_class) continue;
        map.cmap_target[d.cell] = update_target_confidence(map.cmap_target[d.cell], d.confidence);
        if (map.cmap_target[d.cell] > 0.0) map.smap_target[d.cell] = 1;
      }
      ++result.counters.stl_updates;
    }
    refresh_frontiers(map);

    std::optional<RealLayer> vsmooth;
    if (ab.vm) {
      const double s = services.scorer().score(scene, pose, obs.visible_cells, scene.target_class, step_seed);
      sector_fill(vmap, pose, s, map.obstacle);
      vsmooth = smooth_and_normalize(vmap);
      ++result.counters.value_fills;
    }
    std::optional<DistanceMap> dmap;
    if (ab.tpm) {
      dmap = distance_map(services.predictor->predict(map, scene.target_class), w, h, res);
      ++result.counters.predictor_calls;
    }

    const CellCoord agent = pose.cell(res);
    GoalDecision decision;
    bool ready = false;
    // A reached or unreachable exploration goal is excluded and selection repeats within the step.
    for (int attempt = 0; attempt < 8 && !ready; ++attempt) {
      DecisionInputs in{map, vsmooth ? &*vsmooth : nullptr, dmap ? &*dmap : nullptr, agent, scene.target_class,
                        obs.visible_cells, &exclude};
      decision = decide(in, ab, config.fusion);
      if (decision.kind == GoalKind::Explore) {
        if (ab.mol) ++result.counters.sci_evaluations;
        // Exploration goals are long-term: kept until reached, no longer a frontier, or excluded.
        if (held_goal && t > held_goal->deadline) exclude[held_goal->cell] = 1;
        const bool held_valid = held_goal && map.frontier[held_goal->cell] && !exclude[held_goal->cell];
        if (held_valid) {
          decision.cell = held_goal->cell;
          decision.dar_score = held_goal->dar;
        } else if (config.policy == ExplorationPolicy::RandomFrontier) {
          std::vector<CellCoord> candidates;
          for (std::size_t i = 0; i < map.frontier.size(); ++i)
            if (map.frontier.data()[i] && !exclude.data()[i]) candidates.push_back(map.frontier.coord(i));
          decision.cell = candidates[policy_rng() % candidates.size()];
          decision.dar_score.reset();
        }
        if (!held_valid) {
          // Generous budget: three steps per cell of straight-line distance plus a full turn-around.
          const int budget = 3 * static_cast<int>(std::ceil(octile(agent, decision.cell))) + 24;
          held_goal = HeldGoal{decision.cell, decision.dar_score, t + budget};
        }
      } else {
        held_goal.reset();
      }
      if (decision.kind == GoalKind::Stop) break;
      if (decision.kind == GoalKind::Explore && decision.cell == agent) {
        // Standing on the frontier: turning in place reveals the unexplored neighbours.
        path.cells.assign(1, agent);
        path_goal = agent;
        ready = true;
        break;
      }
      if (decision.cell != path_goal || path.cells.empty() || path_blocked(path, map.obstacle) ||
          !on_path(path, agent)) {
        const PlanResult plan = astar(map.obstacle, agent, decision.cell);
        if (!plan.reached && decision.kind == GoalKind::Explore) {
          exclude[decision.cell] = 1;
          continue;
        }
        path = plan.path;
        path_goal = decision.cell;
        if (!plan.reached) decision.cell = plan.substitute;
      }
      ready = true;
    }

    Action action = Action::TurnLeft;
    if (decision.kind == GoalKind::Stop) {
      action = Action::Stop;
    } else if (ready) {
      const CellCoord final_goal = path.cells.back();
      const bool navigate = decision.kind == GoalKind::Navigate;
      if (final_goal == agent) {
        action = navigate ? Action::Stop : Action::TurnLeft;
      } else {
        const CellCoord waypoint =
            visible_waypoint(path, pose, extract_waypoint(path, pose, res, config.lookahead_m), map.obstacle);
        action = local_step(pose, waypoint, res, navigate && waypoint == final_goal);
        if (action == Action::MoveForward && !known_free(map.obstacle, ahead(pose).cell(res))) recovering = true;
        if (recovering && action != Action::Stop) {
          const CellCoord next_cell = extract_waypoint(path, pose, res, res);
          action = recovery_action(pose, next_cell, map.obstacle).value_or(Action::TurnLeft);
        }
      }
    }
    if (decision.kind == GoalKind::Explore) {
      sci_sum += decision.sci.value;
      wpred_sum += decision.weights.w_pred;
      ++sci_steps;
    }

    trace << "step=" << t << " pose=" << fmt(pose.x) << ',' << fmt(pose.y) << ',' << fmt(pose.heading)
          << " sci=" << fmt(decision.sci.value) << " cat=" << to_string(decision.sci.category)
          << " w_pred=" << fmt(decision.weights.w_pred) << " w_vlm=" << fmt(decision.weights.w_vlm)
          << " goal=" << to_string(decision.kind) << '(' << decision.cell.x << ',' << decision.cell.y << ')'
          << " dar=" << (decision.dar_score ? fmt(*decision.dar_score) : std::string("-"))
          << " lock=" << (decision.locked ? 1 : 0) << " action=" << to_string(action) << '\n';
    if (!config.render_dir.empty()) render_step(config.render_dir, t, map, vmap, dmap ? &*dmap : nullptr, agent);

    result.steps = t + 1;
    if (action == Action::Stop) {
      result.termination = decision.kind == GoalKind::Stop ? Termination::NoFrontier : Termination::Stop;
      result.success = success_now();
      break;
    }
    const AgentPose next = step(scene, pose, action);
    if (action == Action::MoveForward) {
      const bool collided = next == pose;
      recovering = collided;
      if (collided) ++result.collisions;
      else result.path_length_m += kForwardStepM;
    }
    pose = next;
  }

  if (services.remote_predictor) result.counters.remote_fallbacks += services.remote_predictor->fallbacks();
  if (services.remote_scorer) result.counters.remote_fallbacks += services.remote_scorer->fallbacks();
  if (sci_steps > 0) {
    result.mean_sci = sci_sum / sci_steps;
    result.mean_w_pred = wpred_sum / sci_steps;
  }
  const auto& c = result.counters;
  trace << "end success=" << (result.success ? 1 : 0) << " steps=" << result.steps
        << " termination=" << to_string(result.termination) << " path=" << fmt(result.path_length_m)
        << " stl_updates=" << c.stl_updates << " mol_updates=" << c.mol_updates
        << " predictor_calls=" << c.predictor_calls << " value_fills=" << c.value_fills
        << " sci_evaluations=" << c.sci_evaluations << " remote_fallbacks=" << c.remote_fallbacks << '\n';
  result.trace = trace.str();
  return result;
}

// ---------------------------------------------------------------------------
// Metrics and suites

double spl(std::span<const EpisodeResult> results) {
  if (results.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& r : results) {
    if (!(r.optimal_length_m > 0.0)) throw ValidationError("SPL needs a positive optimal path length");
    if (r.success) sum += r.optimal_length_m / std::max(r.path_length_m, r.optimal_length_m);
  }
  return 100.0 * sum / static_cast<double>(results.size());
}

double success_rate(std::span<const EpisodeResult> results) {
  if (results.empty()) return 0.0;
  const auto n = std::count_if(results.begin(), results.end(), [](const EpisodeResult& r) { return r.success; });
  return 100.0 * static_cast<double>(n) / static_cast<double>(results.size());
}

SuiteSummary run_suite(std::span<const Scene> scenes, const EpisodeConfig& config, int repeats, int threads) {
  if (scenes.empty()) throw ValidationError("suite needs at least one scene");
  if (repeats < 1) throw ValidationError("repeats must be >= 1");
  config.validate();
  const std::size_t total = scenes.size() * static_cast<std::size_t>(repeats);
  SuiteSummary summary;
  summary.results.resize(total);
  auto run_one = [&](std::size_t k) {
    EpisodeConfig c = config;
    c.seed = config.seed + k % static_cast<std::size_t>(repeats);
    c.render_dir.clear();
    summary.results[k] = run_episode(scenes[k / static_cast<std::size_t>(repeats)], c);
  };
  unsigned n_threads = threads > 0 ? static_cast<unsigned>(threads) : std::max(1u, std::thread::hardware_concurrency());
  n_threads = std::min<unsigned>(n_threads, static_cast<unsigned>(total));
  if (n_threads <= 1) {
    for (std::size_t k = 0; k < total; ++k) run_one(k);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (unsigned i = 0; i < n_threads; ++i)
      pool.emplace_back([&] {
        for (std::size_t k = next++; k < total; k = next++) run_one(k);
      });
  }
  summary.sr = success_rate(summary.results);
  summary.spl = spl(summary.results);
  return summary;
}

std::vector<Scene> synthetic_suite(int count, std::uint64_t base_seed, int width, int height) {
  std::vector<Scene> scenes;
  for (int i = 0; i < count; ++i)
    scenes.push_back(generate_scene({width, height, i % 2 == 0 ? SemanticDensity::Sparse : SemanticDensity::Dense,
                                     base_seed + static_cast<std::uint64_t>(i)}));
  return scenes;
}

}  // namespace sonar
