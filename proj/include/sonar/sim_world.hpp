#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <numbers>
#include <string>
#include <vector>

#include "sonar/grid.hpp"
#include "sonar/layered_map.hpp"

namespace sonar {

inline constexpr double kForwardStepM = 0.25;
inline constexpr double kTurnRad = std::numbers::pi / 6.0;  // 30 degrees

enum class Action { MoveForward, TurnLeft, TurnRight, Stop };

const char* to_string(Action a);

/// Position in meters; cell (i, j) has its centre at (i * res, j * res).
/// Heading is counter-clockwise from +x with +y pointing down the rows, so heading pi/2 moves to smaller y.
struct AgentPose {
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;

  CellCoord cell(double resolution) const;
  friend bool operator==(const AgentPose&, const AgentPose&) = default;
};

double normalize_angle(double a);         // -> [0, 2pi)
double wrap_to_pi(double a);              // -> (-pi, pi]
AgentPose pose_at_cell(CellCoord c, double resolution, double heading = 0.0);

struct ObjectPlacement {
  ClassId cls = kNoClass;
  CellCoord cell;
};

/// Immutable world. Objects are floor-projected footprints: traversable, non-occluding, labelled cells.
struct Scene {
  std::string name;
  BitLayer walls;
  std::vector<ObjectPlacement> objects;  // sorted row-major by cell, then class
  std::vector<std::string> class_names;  // index = ClassId; [0] is ""
  AgentPose start;
  ClassId target_class = kNoClass;
  double optimal_path_length = 0.0;  // meters, start -> nearest target cell
  RealLayer target_distance;         // geodesic meters to the nearest target cell (inf if unreachable)
  LabelLayer object_layer;           // class per cell (0 = none)

  int width() const { return walls.width(); }
  int height() const { return walls.height(); }
  double resolution() const { return walls.resolution(); }
  ClassId num_classes() const { return static_cast<ClassId>(class_names.size() - 1); }
  ClassId class_id(const std::string& name) const;  // throws on unknown name
};

/// Fills derived fields (object layer, geodesic field, optimal length) and validates the scene.
/// `declared_optimal` < 0 means "compute"; otherwise it must match the computed value to 1e-6 m.
void finalize_scene(Scene& scene, double declared_optimal = -1.0);

/// Text scene format (docs/formats.md).
Scene parse_scene(std::istream& in, std::string name = "scene");
Scene load_scene(const std::string& path);
void write_scene(std::ostream& out, const Scene& scene);

// ---------------------------------------------------------------------------

struct SensorConfig {
  double fov_deg = 79.0;
  double max_range_m = 5.0;
  double angular_step_deg = 1.0;
  double radial_step_cells = 0.5;

  bool noise = true;
  double detect_accuracy = 0.9;  // mean confidence of a true detection
  double detect_sd = 0.08;
  double false_negative = 0.1;
  double false_positive_rate = 0.0005;  // per visible free cell
  double false_positive_conf = 0.45;
  double false_positive_sd = 0.1;

  double score_max = 1.0;
  double score_lambda_m = 2.5;
  double score_noise_sd = 0.05;
};

struct Observation {
  std::vector<CellCoord> visible_cells;  // sorted row-major, unique
  std::vector<CellCoord> wall_hits;      // subset of visible_cells that are walls
  std::vector<Detection> detections;     // sorted by cell (row-major) then class
  double fov_deg = 0.0;
  double max_range_m = 0.0;
};

/// MOVE_FORWARD into a wall or off the grid leaves the pose unchanged. STOP never moves.
AgentPose step(const Scene& scene, const AgentPose& pose, Action action);

/// Cells reached by rays fanned across the FOV; each ray includes and stops at the first wall.
std::vector<CellCoord> visible_cells(const BitLayer& walls, const AgentPose& pose, const SensorConfig& cfg);

Observation observe(const Scene& scene, const AgentPose& pose, std::uint64_t seed, const SensorConfig& cfg);

/// Scene-level relevance score in [0,1]: s_max * exp(-d / lambda) + noise, where d is the geodesic distance
/// (meters) from the closest visible cell to the nearest target-class object.
double semantic_score(const Scene& scene, const AgentPose& pose, ClassId target_class, std::uint64_t seed,
                      const SensorConfig& cfg);
double semantic_score(const Scene& scene, std::span<const CellCoord> visible, ClassId target_class,
                      std::uint64_t seed, const SensorConfig& cfg);

/// Pluggable scene-scoring boundary (oracle by default, remote client optional).
class SemanticScorer {
 public:
  virtual ~SemanticScorer() = default;
  virtual double score(const Scene& scene, const AgentPose& pose, std::span<const CellCoord> visible,
                       ClassId target_class, std::uint64_t seed) = 0;
};

class OracleScorer final : public SemanticScorer {
 public:
  explicit OracleScorer(SensorConfig cfg) : cfg_(cfg) {}
  double score(const Scene& scene, const AgentPose& pose, std::span<const CellCoord> visible, ClassId target_class,
               std::uint64_t seed) override;

 private:
  SensorConfig cfg_;
};

// ---------------------------------------------------------------------------
// Procedural scenes

enum class SemanticDensity { Sparse, Dense };

struct SceneGenParams {
  int width = 48;
  int height = 48;
  SemanticDensity density = SemanticDensity::Sparse;
  std::uint64_t seed = 1;
};

/// Indoor class vocabulary shared by generated scenes and the default co-occurrence prior.
const std::vector<std::string>& default_class_names();

Scene generate_scene(const SceneGenParams& params);

}  // namespace sonar
