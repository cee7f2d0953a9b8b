#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <utility>

#include "sonar/grid.hpp"

namespace sonar {

struct Detection {
  ClassId cls = kNoClass;
  CellCoord cell;
  double confidence = 0.0;

  friend bool operator==(const Detection&, const Detection&) = default;
};

/// All coupled map layers of one episode. Plain value type.
struct LayeredMap {
  BitLayer obstacle;
  BitLayer explored;
  BitLayer frontier;
  BitLayer smap_target;
  LabelLayer smap_multi;
  RealLayer cmap_target;
  RealLayer cmap_multi;
  /// Labels 1..num_classes are valid.
  ClassId num_classes = 0;

  static LayeredMap create(int width, int height, ClassId num_classes, double resolution = kDefaultResolution);

  int width() const { return obstacle.width(); }
  int height() const { return obstacle.height(); }
  double resolution() const { return obstacle.resolution(); }

  friend bool operator==(const LayeredMap&, const LayeredMap&) = default;
};

/// Single-target confidence rule: take c when c >= old, otherwise average.
double update_target_confidence(double cmap, double c);

struct LabelledConfidence {
  ClassId label;
  double confidence;
  friend bool operator==(const LabelledConfidence&, const LabelledConfidence&) = default;
};

/// Multi-object label/confidence rule. A label only changes when c strictly exceeds the stored
/// confidence; a matching label with c <= cmap averages; a mismatched label with c <= cmap is ignored.
LabelledConfidence update_multi_maps(ClassId smap, double cmap, ClassId l_obj, double c, ClassId num_classes);

/// Obstacles are sticky: once set they are never cleared.
void mark_obstacles(LayeredMap& map, std::span<const CellCoord> occupied);

void mark_explored(LayeredMap& map, std::span<const CellCoord> visible);

/// Frontier layer computed from E and O (does not modify the map).
BitLayer extract_frontiers(const LayeredMap& map);

/// Recompute map.frontier in place.
void refresh_frontiers(LayeredMap& map);

/// Applies detections in list order to the multi-object layers, and to the single-target layers for
/// detections of `target_class`.
void apply_detections(LayeredMap& map, std::span<const Detection> detections, ClassId target_class);

// Snapshot dump, format "SONARMAP 1" (docs/formats.md). Value and distance layers are optional.
struct MapSnapshot {
  LayeredMap map;
  std::optional<RealLayer> value;
  std::optional<RealLayer> distance;
};

void write_snapshot(std::ostream& out, const LayeredMap& map, const RealLayer* value = nullptr,
                    const RealLayer* distance = nullptr);
MapSnapshot read_snapshot(std::istream& in);

}  // namespace sonar
