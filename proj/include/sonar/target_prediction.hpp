#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "sonar/grid.hpp"
#include "sonar/layered_map.hpp"

namespace sonar {

struct PredictedTargets {
  std::vector<CellCoord> points;  // best first
  friend bool operator==(const PredictedTargets&, const PredictedTargets&) = default;
};

/// Per-cell distance (in cells) to the nearest predicted target.
using DistanceMap = RealLayer;

/// Affinity of each object class to each target class. Rows are target classes; index 0 is unused.
class CooccurrencePrior {
 public:
  CooccurrencePrior() = default;
  explicit CooccurrencePrior(ClassId num_classes);

  /// Text format: one "<target_name> <class_name> <weight>" triple per line, '#' comments.
  /// Names not present in `class_names` are skipped so one prior file can serve several legends.
  static CooccurrencePrior parse(std::istream& in, const std::vector<std::string>& class_names);
  static CooccurrencePrior load(const std::string& path, const std::vector<std::string>& class_names);
  /// Built-in indoor affinities for the given legend (matches data/cooccurrence.prior).
  static CooccurrencePrior builtin(const std::vector<std::string>& class_names);

  double operator()(ClassId target, ClassId cls) const;
  void set(ClassId target, ClassId cls, double w);
  bool covers(ClassId target) const;
  ClassId num_classes() const { return n_; }

 private:
  ClassId n_ = 0;
  std::vector<double> w_;  // (n+1) x (n+1)
};

inline constexpr int kDefaultMaxTargets = 3;

/// Heuristic predictor: per-class 8-connected clusters of labelled cells, scored by
/// prior(target, class) * mean confidence; the top `max_targets` centroids, best first.
/// An empty semantic map predicts the map centre.
PredictedTargets predict_targets(const LabelLayer& smap_multi, const RealLayer& cmap_multi, ClassId target_class,
                                 const CooccurrencePrior& prior, int max_targets = kDefaultMaxTargets);

/// D(x, y) = min_i |(x, y) - p_i|. Throws ValidationError for an empty point list.
DistanceMap distance_map(const PredictedTargets& targets, int width, int height, double resolution = kDefaultResolution);

// ---------------------------------------------------------------------------
// Predictor boundary

class TargetPredictor {
 public:
  virtual ~TargetPredictor() = default;
  virtual PredictedTargets predict(const LayeredMap& map, ClassId target_class) = 0;
};

class HeuristicPredictor final : public TargetPredictor {
 public:
  HeuristicPredictor(CooccurrencePrior prior, int max_targets = kDefaultMaxTargets)
      : prior_(std::move(prior)), max_targets_(max_targets) {}
  PredictedTargets predict(const LayeredMap& map, ClassId target_class) override;
  const CooccurrencePrior& prior() const { return prior_; }

 private:
  CooccurrencePrior prior_;
  int max_targets_;
};

struct RemotePrediction {
  PredictedTargets targets;
  bool fell_back = false;
  std::string warning;
};

/// Queries the predictor service; on transport or protocol failure falls back to predict_targets.
/// Throws ValidationError if the maps disagree in shape.
RemotePrediction remote_predict(const LabelLayer& smap_multi, const RealLayer& cmap_multi, ClassId target_class,
                                const std::string& endpoint, const CooccurrencePrior& fallback_prior,
                                int timeout_ms = 2000, int max_targets = kDefaultMaxTargets);

class RemotePredictor final : public TargetPredictor {
 public:
  RemotePredictor(std::string endpoint, CooccurrencePrior fallback_prior, int timeout_ms = 2000,
                  int max_targets = kDefaultMaxTargets)
      : endpoint_(std::move(endpoint)), prior_(std::move(fallback_prior)), timeout_ms_(timeout_ms),
        max_targets_(max_targets) {}
  PredictedTargets predict(const LayeredMap& map, ClassId target_class) override;

  int fallbacks() const { return fallbacks_; }
  const std::vector<std::string>& warnings() const { return warnings_; }

 private:
  std::string endpoint_;
  CooccurrencePrior prior_;
  int timeout_ms_;
  int max_targets_;
  int fallbacks_ = 0;
  std::vector<std::string> warnings_;
};

}  // namespace sonar
