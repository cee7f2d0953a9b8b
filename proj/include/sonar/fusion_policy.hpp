#pragma once

#include <optional>
#include <span>
#include <string>

#include "sonar/grid.hpp"
#include "sonar/layered_map.hpp"

namespace sonar {

struct FusionConfig {
  double sci_label_confidence = 0.6;  // a FOV cell counts toward SCI above this confidence
  double dense_above = 0.6;
  double sparse_below = 0.3;
  double lock_threshold = 0.7;
  double epsilon = 1e-6;
  int lock_neighborhood = 5;  // k for the k x k centroid window
};

enum class SciCategory { Dense, Moderate, Sparse };
const char* to_string(SciCategory c);

struct SciReading {
  double value = 0.0;
  SciCategory category = SciCategory::Sparse;
};

SciCategory categorize_sci(double value, const FusionConfig& cfg = {});

/// Fraction of FOV cells holding a label with confidence above cfg.sci_label_confidence.
/// Throws ValidationError for an empty FOV.
SciReading compute_sci(const LabelLayer& smap_multi, const RealLayer& cmap_multi, std::span<const CellCoord> fov_cells,
                       const FusionConfig& cfg = {});

struct DarWeights {
  double w_pred = 1.0;
  double w_vlm = 0.0;
};

DarWeights weights_from_sci(const SciReading& sci);

/// w_pred / (d + eps) + w_vlm * v, with d already divided by the map diagonal.
double dar_score(double d_normalized, double v, const DarWeights& w, double eps);

/// Map diagonal in cells, the normaliser for distance values.
double map_diagonal(int width, int height);

struct FrontierChoice {
  CellCoord cell;
  double score = 0.0;
};

/// argmax of DAR over frontier cells (excluding cells set in `exclude`, if given). Ties go to the cell nearest
/// the agent, then to row-major order. nullopt when no candidate exists.
std::optional<FrontierChoice> select_frontier(const BitLayer& frontier, const RealLayer& dmap, const RealLayer& vsmooth,
                                              const DarWeights& w, CellCoord agent, double eps = 1e-6,
                                              const BitLayer* exclude = nullptr);

/// Which layers drive target locking.
enum class LockSource { Fused, TargetOnly, MultiOnly };

struct LockResult {
  CellCoord goal;        // explored, obstacle-free cell nearest the neighbourhood centroid
  CellCoord peak;        // argmax cell
  double peak_value = 0.0;
  bool used_fallback = false;  // fused region empty, single-target map used instead
};

std::optional<LockResult> try_lock_target(const LayeredMap& map, ClassId target_class,
                                          LockSource source = LockSource::Fused, const FusionConfig& cfg = {});

struct Ablation {
  bool stl = true;  // single-target semantic layers
  bool mol = true;  // multi-object semantic layers
  bool tpm = true;  // target prediction
  bool vm = true;   // value map
  friend bool operator==(const Ablation&, const Ablation&) = default;
};

/// "stl,mol,tpm,vm" style list of enabled modules.
Ablation parse_ablation(const std::string& enabled);
std::string to_string(const Ablation& a);

enum class GoalKind { Explore, Navigate, Stop };
const char* to_string(GoalKind k);

struct GoalDecision {
  GoalKind kind = GoalKind::Stop;
  CellCoord cell;
  std::optional<double> dar_score;
  SciReading sci;
  DarWeights weights;
  bool locked = false;
  bool lock_fallback = false;
};

struct DecisionInputs {
  const LayeredMap& map;
  const RealLayer* vsmooth;  // nullptr when the value map is disabled
  const RealLayer* dmap;     // nullptr when target prediction is disabled
  CellCoord agent;
  ClassId target_class;
  std::span<const CellCoord> fov_cells;
  const BitLayer* exclude = nullptr;
};

/// Lock check first; otherwise SCI -> weights -> DAR frontier selection; Stop when no frontier remains.
GoalDecision decide(const DecisionInputs& in, const Ablation& ablation, const FusionConfig& cfg = {});

}  // namespace sonar
