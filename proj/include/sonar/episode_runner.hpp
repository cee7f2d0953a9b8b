#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "sonar/fusion_policy.hpp"
#include "sonar/sim_world.hpp"
#include "sonar/value_map.hpp"

namespace sonar {

enum class ExplorationPolicy { Sonar, RandomFrontier };

struct EpisodeConfig {
  int max_steps = 500;
  double success_radius_m = 1.0;
  std::uint64_t seed = 0;
  Ablation ablation;
  ExplorationPolicy policy = ExplorationPolicy::Sonar;

  std::string scorer = "oracle";        // oracle | remote
  std::string predictor = "heuristic";  // heuristic | remote
  std::string endpoint = "127.0.0.1:7878";
  int remote_timeout_ms = 2000;
  std::string prior_file;  // empty: built-in affinities

  int max_targets = 3;
  double lookahead_m = 1.0;

  SensorConfig sensor;
  ValueMapConfig value;
  FusionConfig fusion;

  std::string render_dir;  // per-step PGM panels when non-empty

  /// Throws ConfigError on an invalid combination.
  void validate() const;
};

/// Key-value text config ("key = value", '#' comments); unknown keys are errors. See docs/formats.md.
EpisodeConfig parse_config(std::istream& in, EpisodeConfig base = {});
EpisodeConfig load_config(const std::string& path, EpisodeConfig base = {});
void write_config(std::ostream& out, const EpisodeConfig& cfg);

enum class Termination { Stop, StepLimit, NoFrontier };
const char* to_string(Termination t);

/// Number of times each module was consulted during an episode.
struct ModuleCounters {
  long stl_updates = 0;
  long mol_updates = 0;
  long predictor_calls = 0;
  long value_fills = 0;
  long sci_evaluations = 0;
  long remote_fallbacks = 0;
};

struct EpisodeResult {
  std::string scene;
  std::uint64_t seed = 0;
  bool success = false;
  double path_length_m = 0.0;
  double optimal_length_m = 0.0;
  int steps = 0;
  Termination termination = Termination::StepLimit;
  double mean_sci = 0.0;     // over steps that ran frontier selection
  double mean_w_pred = 0.0;  // same steps
  int collisions = 0;
  ModuleCounters counters;
  std::string trace;  // one line per step
};

EpisodeResult run_episode(const Scene& scene, const EpisodeConfig& config);

struct SuiteSummary {
  double sr = 0.0;   // percent
  double spl = 0.0;  // percent
  std::vector<EpisodeResult> results;
};

/// SPL in percent: (100 / N) * sum S_i * l_i / max(p_i, l_i). Throws ValidationError if some l_i <= 0.
double spl(std::span<const EpisodeResult> results);
double success_rate(std::span<const EpisodeResult> results);

/// Every scene x repeats; repeat r uses seed config.seed + r. Results are ordered scene-major regardless
/// of `threads` (0 = hardware concurrency).
SuiteSummary run_suite(std::span<const Scene> scenes, const EpisodeConfig& config, int repeats, int threads = 1);

/// The synthetic benchmark: `count` generated scenes alternating sparse / dense, seeds base_seed + i.
std::vector<Scene> synthetic_suite(int count, std::uint64_t base_seed, int width = 48, int height = 48);

}  // namespace sonar
